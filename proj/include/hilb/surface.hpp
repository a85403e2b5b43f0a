#pragma once

/*
 * Registry of the fourteen Hilbert modular surfaces of K3 type and the genus
 * data attached to each: nine principal-genus surfaces and five
 * nonprincipal-genus surfaces (with the norm A of the chosen ideal).
 */

#include "ideal.hpp"

namespace hilb {

struct SurfaceId {
    long D;
    GenusKind kind;
    bool operator==(const SurfaceId& o) const { return D == o.D && kind == o.kind; }
    bool operator<(const SurfaceId& o) const {
        if (D != o.D) return D < o.D;
        return static_cast<int>(kind) < static_cast<int>(o.kind);
    }
    std::string str() const {
        return std::to_string(D) + (kind == GenusKind::principal ? "p" : "n");
    }
};

inline const std::vector<long>& k3_principal_list() {
    static const std::vector<long> v{29, 37, 40, 41, 44, 56, 57, 69, 105};
    return v;
}

/* D -> A for the nonprincipal-genus surfaces */
inline const std::vector<std::pair<long, long>>& k3_nonprincipal_list() {
    static const std::vector<std::pair<long, long>> v{{21, 5}, {24, 5}, {28, 3}, {33, 2}, {40, 3}};
    return v;
}

inline bool kodaira_gate(long D, GenusKind kind) {
    if (kind == GenusKind::principal) {
        for (long d : k3_principal_list())
            if (d == D) return true;
        return false;
    }
    for (auto [d, A] : k3_nonprincipal_list())
        if (d == D) return true;
    return false;
}

inline std::vector<SurfaceId> all_k3_surfaces() {
    std::vector<SurfaceId> out;
    for (long d : k3_principal_list()) out.push_back({d, GenusKind::principal});
    for (auto [d, A] : k3_nonprincipal_list()) out.push_back({d, GenusKind::nonprincipal});
    return out;
}

/* Full arithmetic context for one surface. */
struct Surface {
    SurfaceId id;
    Disc disc;
    GenusChoice genus;
    Units units;
    ClassGroup cl;
    QuadIdeal O;

    static Surface make(long D, GenusKind kind) {
        if (!kodaira_gate(D, kind))
            throw std::invalid_argument("not a K3-type surface: D = " + std::to_string(D) +
                                        (kind == GenusKind::principal ? " principal" : " nonprincipal"));
        Surface s;
        s.id = {D, kind};
        s.disc = Disc::make(D);
        if (kind == GenusKind::principal) {
            s.genus = GenusChoice::principal(s.disc);
        } else {
            long A = 0;
            for (auto [d, a] : k3_nonprincipal_list())
                if (d == D) A = a;
            s.genus = GenusChoice::nonprincipal(s.disc, A);
        }
        s.units = Units::compute(s.disc);
        s.cl = ClassGroup::compute(s.disc);
        s.O = QuadIdeal::ring_of_integers(s.disc);
        return s;
    }
};

}  // namespace hilb

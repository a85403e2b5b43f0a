#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hilb/cusp.hpp"
#include "hilb/golden.hpp"

using namespace hilb;

static std::vector<std::array<long, 3>> golden_forms(const nlohmann::json& g) {
    std::vector<std::array<long, 3>> out;
    for (const auto& f : g)
        out.push_back({f.at(0).get<long>(), f.at(1).get<long>(), f.at(2).get<long>()});
    return out;
}

TEST_CASE("hull recurrence and hand-checked cycle for D = 5 lattice O") {
    /* Independent small case: for Z[(1+sqrt5)/2] the hull boundary of the
     * totally positive elements has cycle [3] (w = (3+sqrt5)/2 is reduced,
     * w = 3 - 1/w).  Checked by hand from the definition. */
    auto d = Disc::make(5);
    QuadIdeal O = QuadIdeal::ring_of_integers(d);
    QuadNum w{5, Rat(3, 2), Rat(1, 2)};
    CHECK(detail::cf_reduced(w));
    auto cyc = detail::cf_run(QuadNum::one(5), w);
    CHECK(cyc.b == std::vector<long>{3});
}

TEST_CASE("cusp counts for the 14 surfaces") {
    for (auto sid : all_k3_surfaces()) {
        auto surf = Surface::make(sid.D, sid.kind);
        auto g = load_golden(sid);
        size_t expect = g["cusps"]["two_cusps"].get<bool>() ? 2 : 1;
        CHECK(enumerate_cusps(surf).size() == expect);
    }
}

TEST_CASE("resolution cycles reproduce the reference table for all 14 surfaces") {
    for (auto sid : all_k3_surfaces()) {
        CAPTURE(sid.str());
        auto surf = Surface::make(sid.D, sid.kind);
        auto g = load_golden(sid)["cusps"];
        std::vector<long> ref_b = g["selfint"].get<std::vector<long>>();
        auto ref_forms = golden_forms(g["forms"]);
        bool ref_doubled = g["doubled"].get<bool>();

        auto cusps = enumerate_cusps(surf);
        for (const auto& cusp : cusps) {
            auto cyc = resolve_cusp(surf, cusp);
            CHECK(cyc.doubled == ref_doubled);
            REQUIRE(cyc.period() == ref_b.size());
            auto aligned = align_cycle(cyc, ref_b, ref_forms);
            REQUIRE(aligned.has_value());
            CHECK(aligned->b_list == ref_b);
            CHECK(aligned->forms == ref_forms);

            /* structural checks on the aligned cycle */
            const auto& cc = *aligned;
            size_t L = cc.full_length();
            CHECK(L == (cc.doubled ? 2 : 1) * cc.period());
            for (size_t k = 0; k < L; ++k) {
                QuadNum prev = cc.point(static_cast<long>(k) - 1);
                QuadNum next = cc.point(static_cast<long>(k) + 1);
                long b = cc.b_list[k % cc.period()];
                CHECK(prev + next ==
                      cc.points[k] * QuadNum::rational(surf.disc.m, Rat(b)));
                CHECK(cc.points[k].totally_positive());
                CHECK(cusp.M.contains(cc.points[k]));
            }
            /* adjacent forms share the middle norm: Q_k(0,1) = Q_{k+1}(1,0) */
            size_t r = cc.period();
            for (size_t k = 0; k < r; ++k)
                CHECK(cc.forms[k][2] == cc.forms[(k + 1) % r][0]);
            /* closure under the square of the fundamental unit */
            CHECK(cc.closing_unit * surf.units.eps_sq == QuadNum::one(surf.disc.m) );
            /* every form has discriminant D */
            for (const auto& f : cc.forms)
                CHECK(f[1] * f[1] - 4 * f[0] * f[2] == surf.disc.D);
        }
        /* two cusps (if present) share the same displayed cycle */
        if (cusps.size() == 2) {
            auto c0 = resolve_cusp(surf, cusps[0]);
            auto c1 = resolve_cusp(surf, cusps[1]);
            CHECK(align_cycle(c1, c0.b_list, c0.forms).has_value());
        }
    }
}

TEST_CASE("doubling flag equals Nm(eps) = +1") {
    for (auto sid : all_k3_surfaces()) {
        auto surf = Surface::make(sid.D, sid.kind);
        auto g = load_golden(sid)["cusps"];
        CHECK(g["doubled"].get<bool>() == (surf.units.norm_sign == 1));
    }
}

#pragma once

/*
 * Cusps of the Hilbert modular surface X_g and their Hirzebruch-Jung
 * resolution cycles.
 *
 * A cusp corresponds to an ideal class [c]; its singularity is governed by
 * the module M = c^{-2} a^{-1}.  Writing M = gamma (Z + Z w) with gamma
 * totally positive and w reduced (w > 1 > w' > 0), the boundary points of
 * the convex hull of the totally positive elements M_+ are
 *
 *     x_0 = gamma,   x_{k+1} = x_k (b_k - w_k),
 *
 * where w_0 = w, b_k = ceil(w_k) and w_{k+1} = 1/(b_k - w_k) is the minus
 * (ceiling) continued-fraction step, purely periodic of period r.  The
 * recurrence x_{k-1} + x_{k+1} = b_k x_k holds and the resolution cycle of
 * the cusp has self-intersections -b_k.  One period multiplies x_k by the
 * inverse of the fundamental totally positive unit e+; the resolution
 * identifies points modulo eps^2, so the geometric cycle has length r when
 * Nm(eps) = -1 (e+ = eps^2) and 2r when Nm(eps) = +1 (e+ = eps) -- the
 * latter is the "doubled" case.
 *
 * The quadratic form of the cone spanned by (x_k, x_{k+1}) is
 *     Q_k(p,q) = Nm(p x_k + q x_{k+1}) / Nm(M),
 * integral, primitive, of discriminant D, and Q_k(0,1) = Q_{k+1}(1,0).
 */

#include "surface.hpp"

#include <array>
#include <map>

namespace hilb {

struct Cusp {
    size_t class_index = 0;
    QuadIdeal c;       /* ideal-class representative */
    QuadIdeal M;       /* c^{-2} a^{-1} */
    Rat norm_M;        /* Nm(M) */
};

struct CuspCycle {
    Cusp cusp;
    std::vector<long> b_list;                 /* one period (the displayed cycle) */
    std::vector<std::array<long, 3>> forms;   /* Q_k for the cone (x_k, x_{k+1}) */
    std::vector<QuadNum> points;              /* full resolution period, length L */
    bool doubled = false;                     /* L = 2 * b_list.size() */
    QuadNum closing_unit;                     /* x_{k+L} = closing_unit * x_k */

    size_t period() const { return b_list.size(); }
    size_t full_length() const { return points.size(); }
    /* boundary point with cyclic index, x_{k+L} = u x_k */
    QuadNum point(long k) const {
        long L = static_cast<long>(points.size());
        long q = k >= 0 ? k / L : -((-k + L - 1) / L);
        long r = k - q * L;
        QuadNum x = points[static_cast<size_t>(r)];
        QuadNum u = QuadNum::one(x.m);
        for (long i = 0; i < (q >= 0 ? q : -q); ++i) u = u * closing_unit;
        return (q >= 0) ? x * u : x / u;
    }
};

inline std::vector<Cusp> enumerate_cusps(const Surface& surf) {
    std::vector<Cusp> out;
    for (size_t i = 0; i < surf.cl.reps.size(); ++i) {
        Cusp cu;
        cu.class_index = i;
        cu.c = surf.cl.reps[i];
        QuadIdeal cinv = cu.c.inverse(surf.disc);
        cu.M = QuadIdeal::mul(QuadIdeal::mul(cinv, cinv), surf.genus.a_inv);
        cu.norm_M = cu.M.lattice_norm(surf.disc);
        out.push_back(cu);
    }
    return out;
}

namespace detail {

/* Reduced for the minus continued fraction: w > 1 > w' > 0. */
inline bool cf_reduced(const QuadNum& w) {
    QuadNum one = QuadNum::one(w.m);
    return (w - one).sign() > 0 && w.conj().sign() > 0 && (one - w.conj()).sign() > 0;
}

struct CfCycle {
    std::vector<long> b;       /* period of partial quotients */
    std::vector<QuadNum> w;    /* w_k along the period, all reduced */
    QuadNum gamma;             /* M = gamma (Z + Z w[0]) at cycle entry */
};

/* Run the minus-CF iteration from (gamma, w0) until the w-value repeats;
 * returns the periodic part.  M = gamma (Z + Z w) is a loop invariant. */
inline CfCycle cf_run(QuadNum gamma, QuadNum w) {
    std::map<std::string, size_t> seen;
    std::vector<long> bs;
    std::vector<QuadNum> ws, gammas;
    for (int guard = 0; guard < 10000; ++guard) {
        std::string key = w.str();
        auto it = seen.find(key);
        if (it != seen.end()) {
            size_t j = it->second;
            CfCycle cyc;
            cyc.b.assign(bs.begin() + j, bs.end());
            cyc.w.assign(ws.begin() + j, ws.end());
            cyc.gamma = gammas[j];
            return cyc;
        }
        seen[key] = ws.size();
        ws.push_back(w);
        gammas.push_back(gamma);
        Int b = quad_ceil(w);
        bs.push_back(b.get_si());
        QuadNum step = QuadNum::rational(w.m, Rat(b.get_si())) - w;  /* in (0,1) */
        gamma = gamma * step;
        w = step.inverse();
    }
    throw std::logic_error("cf_run: no period found");
}

}  // namespace detail

inline CuspCycle resolve_cusp(const Surface& surf, const Cusp& cusp) {
    long m = surf.disc.m;
    const QuadNum z1 = cusp.M.z1(), z2 = cusp.M.z2();
    const Units& U = surf.units;

    /* Seed candidates (gamma, w) with M = gamma (Z + Z w). */
    std::vector<std::pair<QuadNum, QuadNum>> seeds = {
        {z1, z2 / z1}, {z2, z1 / z2}, {z1, -(z2 / z1)}, {z2, -(z1 / z2)},
        {z1 + z2, z2 / (z1 + z2)}, {z2, (z1 + z2) / z2}};

    for (auto& [g0, w0] : seeds) {
        if (w0.is_rational()) continue;
        detail::CfCycle cyc = detail::cf_run(g0, w0);
        QuadNum gamma = cyc.gamma;
        /* Fix the sign of gamma so it is totally positive: negate, and use
         * the mixed-sign fundamental unit when Nm(eps) = -1. */
        if (gamma.sign() < 0 && gamma.conj().sign() < 0) gamma = -gamma;
        if (!gamma.totally_positive() && U.norm_sign == -1) {
            gamma = gamma * U.eps;
            if (gamma.sign() < 0 && gamma.conj().sign() < 0) gamma = -gamma;
        }
        if (!gamma.totally_positive()) continue;

        size_t r = cyc.b.size();
        bool doubled = (U.norm_sign == 1);
        size_t L = doubled ? 2 * r : r;

        /* Boundary points over the full resolution period. */
        std::vector<QuadNum> pts;
        QuadNum x = gamma;
        for (size_t k = 0; k < L; ++k) {
            pts.push_back(x);
            const QuadNum& wk = cyc.w[k % r];
            long bk = cyc.b[k % r];
            x = x * (QuadNum::rational(m, Rat(bk)) - wk);
        }
        QuadNum u = x / gamma;  /* closing unit, = e+^{-1} per CF period */

        /* Postconditions; a bad seed never survives these. */
        bool ok = true;
        for (const auto& p : pts)
            if (!p.totally_positive() || !cusp.M.contains(p)) ok = false;
        /* closure: u must be eps^{-2} (doubled) resp. e+^{-1} = eps^{-2} */
        if (u * U.eps_sq != QuadNum::one(m)) ok = false;
        for (size_t k = 0; k < L && ok; ++k) {
            QuadNum prev = (k == 0) ? pts[L - 1] / u : pts[k - 1];
            QuadNum next = (k + 1 == L) ? pts[0] * u : pts[k + 1];
            if (prev + next != pts[k] * QuadNum::rational(m, Rat(cyc.b[k % r]))) ok = false;
        }
        if (!ok) continue;

        /* Quadratic forms of the cones, scaled by 1/Nm(M). */
        std::vector<std::array<long, 3>> forms;
        for (size_t k = 0; k < r; ++k) {
            const QuadNum& xk = pts[k];
            QuadNum xk1 = (k + 1 < L) ? pts[k + 1] : pts[0] * u;
            Rat fa = xk.norm() / cusp.norm_M;
            Rat fb = (xk * xk1.conj() + xk1 * xk.conj()).u / cusp.norm_M;
            Rat fc = xk1.norm() / cusp.norm_M;
            if (fa.get_den() != 1 || fb.get_den() != 1 || fc.get_den() != 1)
                throw std::logic_error("resolve_cusp: non-integral form");
            std::array<long, 3> f{fa.get_num().get_si(), fb.get_num().get_si(),
                                  fc.get_num().get_si()};
            if (f[0] <= 0 || f[1] <= 0 || f[2] <= 0)
                throw std::logic_error("resolve_cusp: non-positive form coefficient");
            Int g1 = gcd(Int(f[0]), Int(f[1]));
            if (gcd(g1, Int(f[2])) != 1)
                throw std::logic_error("resolve_cusp: imprimitive form");
            if (Int(f[1]) * f[1] - 4 * Int(f[0]) * f[2] != surf.disc.D)
                throw std::logic_error("resolve_cusp: form discriminant != D");
            forms.push_back(f);
        }

        /* Canonical rotation: lexicographically smallest (forms, b) period. */
        size_t best = 0;
        auto rot_key = [&](size_t s) {
            std::vector<long> key;
            for (size_t k = 0; k < r; ++k) {
                const auto& f = forms[(s + k) % r];
                key.insert(key.end(), {f[0], f[1], f[2], cyc.b[(s + k) % r]});
            }
            return key;
        };
        for (size_t s = 1; s < r; ++s)
            if (rot_key(s) < rot_key(best)) best = s;

        CuspCycle out;
        out.cusp = cusp;
        out.doubled = doubled;
        out.closing_unit = u;
        for (size_t k = 0; k < r; ++k) {
            out.b_list.push_back(cyc.b[(best + k) % r]);
            out.forms.push_back(forms[(best + k) % r]);
        }
        for (size_t k = 0; k < L; ++k) {
            size_t i = best + k;
            out.points.push_back(i < L ? pts[i] : pts[i - L] * u);
        }
        /* sanity: all b >= 2, at least one >= 3 */
        long mx = 0;
        for (long b : out.b_list) {
            if (b < 2) throw std::logic_error("resolve_cusp: partial quotient < 2");
            mx = std::max(mx, b);
        }
        if (mx < 3) throw std::logic_error("resolve_cusp: trivial fan (all b = 2)");
        return out;
    }
    throw std::logic_error("resolve_cusp: no seed produced a totally positive hull");
}

/* Align a computed cycle with a reference (b, forms) ordering: try all
 * rotations in both orientations; returns the matching rotation applied to
 * the whole cycle, or nullopt.  Reversal maps b'_k = b_{-k}, Q'_k =
 * reverse(Q_{-k-1}), x'_k = x_{-k}. */
inline std::optional<CuspCycle> align_cycle(const CuspCycle& cyc,
                                            const std::vector<long>& ref_b,
                                            const std::vector<std::array<long, 3>>& ref_forms) {
    size_t r = cyc.period();
    if (ref_b.size() != r || ref_forms.size() != r) return std::nullopt;
    size_t L = cyc.full_length();
    for (int orient = 0; orient < 2; ++orient) {
        /* build the (b, forms, points) sequence for this orientation */
        std::vector<long> b(r);
        std::vector<std::array<long, 3>> fo(r);
        std::vector<QuadNum> px;
        if (orient == 0) {
            b = cyc.b_list;
            fo = cyc.forms;
            px = cyc.points;
        } else {
            for (size_t k = 0; k < r; ++k) {
                b[k] = cyc.b_list[(r - k) % r];
                const auto& f = cyc.forms[(2 * r - k - 1) % r];
                fo[k] = {f[2], f[1], f[0]};
            }
            for (size_t k = 0; k < L; ++k)
                px.push_back(cyc.point(-static_cast<long>(k)));
        }
        QuadNum u = (orient == 0) ? cyc.closing_unit : cyc.closing_unit.inverse();
        for (size_t s = 0; s < r; ++s) {
            bool match = true;
            for (size_t k = 0; k < r && match; ++k)
                if (b[(s + k) % r] != ref_b[k] || fo[(s + k) % r] != ref_forms[k]) match = false;
            if (!match) continue;
            CuspCycle out;
            out.cusp = cyc.cusp;
            out.doubled = cyc.doubled;
            out.closing_unit = u;
            out.b_list = ref_b;
            out.forms = ref_forms;
            for (size_t k = 0; k < L; ++k) {
                size_t i = s + k;
                out.points.push_back(i < L ? px[i] : px[i - L] * u);
            }
            return out;
        }
    }
    return std::nullopt;
}

}  // namespace hilb

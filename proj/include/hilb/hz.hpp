#pragma once

/*
 * Hirzebruch-Zagier divisors F_N on X_g.
 *
 * F_N is the union of the curves H_B = {(z2,1) B (z1,1)^t = 0} over
 * skew-hermitian, integral, primitive B with det(B) A = N.  SL(Lambda)
 * acts by B -> g'^t B g (preserving det, integrality and primitivity), and
 * the geometrically irreducible components of F_N correspond to the orbits
 * (with B and -B giving the same curve).
 *
 * Orbits are merged by a bounded search (greedy height descent + plateau
 * exploration over elementary generators with union-find); completeness is
 * certified externally against the reference component tables.
 *
 * Branches at the cusps: in the toric chart of a cone (x_{s,k}, x_{s,k+1})
 * of the cusp fan, every branch of an HZ divisor is cut by an equation
 * u1^{p/n} = zeta_n^b u2^{q/n} (n = gcd(p,q)) and comes from the matrix
 * B_loc = [[0, lambda], [-lambda', y sqrt(D)]] with
 * lambda = p x_{s,k} + q x_{s,k+1} pulled back through a frame t_s that
 * moves the cusp to infinity; the level is N = A Nm(lambda) (independent
 * of the y-entry, which only selects the branch label b).  The branch
 * meets the cusp divisor of ray x_{s,k} with multiplicity p/n and the one
 * of ray x_{s,k+1} with multiplicity q/n (so a (p, 0) branch is transverse
 * to the ray it lies along, and a (1, 1) branch passes through the corner).
 *
 * Transversal HZ-HZ intersections follow the closed formula
 *   (T'_M, T'_N)_tr = 1/2 sum_{d | gcd(M,N)} d H_D^o(MN/d^2)
 *                     prod_{p | D} (kron(D_p, d) + kron(D_p, P_p A / d))
 * with H_D^o built from Hurwitz class numbers.  For N <= 10 almost all of
 * it is supported at the elliptic points; the small remainder that is not
 * is located by a certified search over SL(Lambda)-orbits of crossing
 * pairs (interior_crossings below), which attributes each leftover
 * transversal intersection point to its pair of components.
 */

#include "cusp.hpp"
#include "elliptic.hpp"

#include <deque>
#include <numeric>
#include <optional>

namespace hilb {

/* ------------------------------------------------------------------ */
/* Class-number arithmetic                                            */
/* ------------------------------------------------------------------ */

/* Hurwitz class number H(n): weighted count of all (not necessarily
 * primitive) reduced positive definite binary forms of discriminant -n.
 * 0 unless n = 0, 3 mod 4. */
inline Rat hurwitz_H(long n) {
    if (n <= 0) throw std::invalid_argument("hurwitz_H: n must be positive");
    long r = n % 4;
    if (r == 1 || r == 2) return Rat(0);
    Rat H(0);
    long bmax = 0;
    while (static_cast<long long>(bmax + 1) * (bmax + 1) <= n) ++bmax;
    for (long b = -bmax; b <= bmax; ++b) {
        if (((b % 2) + 2) % 2 != n % 2) continue;
        long long num = static_cast<long long>(b) * b + n; /* = 4ac */
        for (long a = std::max(std::labs(b), 1L); 4LL * a * a <= num; ++a) {
            if (num % (4LL * a)) continue;
            long c = static_cast<long>(num / (4LL * a));
            if (c < a) continue;
            /* reduced: |b| <= a <= c, with b >= 0 when |b| = a or a = c */
            if (b < 0 && (a == -b || a == c)) continue;
            if (a == c && b == 0)
                H += Rat(1, 2);
            else if (a == b && b == c)
                H += Rat(1, 3);
            else
                H += 1;
        }
    }
    return H;
}

/* H_D^o(n) = sum over s in Z, s^2 < 4n, s^2 = 4n mod D of H((4n - s^2)/D). */
inline Rat H_D_o(long D, long n) {
    Rat total(0);
    for (long s = 0; static_cast<long long>(s) * s < 4LL * n;
         s = (s <= 0 ? -s + 1 : -s)) {
        long long rem = 4LL * n - static_cast<long long>(s) * s;
        if (rem % D) continue;
        total += hurwitz_H(static_cast<long>(rem / D));
    }
    return total;
}

/* Kronecker symbol (a | n). */
inline int kronecker(long a, long n) {
    if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
    int result = 1;
    if (n < 0) {
        n = -n;
        if (a < 0) result = -result;
    }
    while (n % 2 == 0) {
        n /= 2;
        if (a % 2 == 0) return 0;
        long r = ((a % 8) + 8) % 8;
        if (r == 3 || r == 5) result = -result;
    }
    a %= n;
    if (a < 0) a += n;
    while (a != 0) {
        while (a % 2 == 0) {
            a /= 2;
            long r = n % 8;
            if (r == 3 || r == 5) result = -result;
        }
        std::swap(a, n);
        if (a % 4 == 3 && n % 4 == 3) result = -result;
        a %= n;
    }
    return n == 1 ? result : 0;
}

/* Factor D into prime power fundamental discriminants D_p (odd p | D gives
 * (-1)^((p-1)/2) p; the 2-part is whatever remains). */
inline std::vector<std::pair<long, long>> fundamental_factors(long D) {
    std::vector<std::pair<long, long>> out; /* (p, D_p) */
    long odd = D;
    while (odd % 2 == 0) odd /= 2;
    long odd_prod = 1;
    for (long p = 3; p * p <= odd; p += 2)
        if (odd % p == 0) {
            long Dp = (p % 4 == 1) ? p : -p;
            out.emplace_back(p, Dp);
            odd_prod *= Dp;
            while (odd % p == 0) odd /= p;
        }
    if (odd > 1) {
        long Dp = (odd % 4 == 1) ? odd : -odd;
        out.emplace_back(odd, Dp);
        odd_prod *= Dp;
    }
    if (D % 2 == 0) out.emplace_back(2, D / odd_prod);
    long prod = 1;
    for (auto [p, Dp] : out) prod *= Dp;
    if (prod != D) throw std::logic_error("fundamental_factors: product mismatch");
    return out;
}

inline long vp(long n, long p) {
    long v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

/* Transversal intersection number (T'_M, T'_N)_tr of the T-divisors. */
inline Rat hausmann_total(const Surface& surf, long M, long N) {
    long D = surf.disc.D, A = surf.genus.A;
    auto factors = fundamental_factors(D);
    long g = std::gcd(M, N);
    Rat total(0);
    for (long d = 1; d <= g; ++d) {
        if (g % d) continue;
        Rat term = Rat(d) * H_D_o(D, (M / d) * (N / d));
        for (auto [p, Dp] : factors) {
            long Pp = (vp(M, p) <= vp(N, p)) ? M : N;
            term *= kronecker(Dp, d) + kronecker(Dp, Pp * A / d);
        }
        total += term;
    }
    total /= 2;
    /* the transversal count is a sum of #pairs / #isotropy terms */
    Rat scaled = total * 12;
    if (total < 0 || scaled.get_den() != 1)
        throw std::logic_error("hausmann_total: value " + total.get_str() +
                               " is not a nonnegative half-third-integer");
    return total;
}

/* (F_M, F_N)_tr by Moebius inversion of T'_M = sum_{d^2 | M} F_{M/d^2}. */
inline Rat f_level_total(const Surface& surf, long M, long N) {
    auto mu = [](long n) -> long {
        long result = 1;
        for (long p = 2; p * p <= n; ++p)
            if (n % p == 0) {
                n /= p;
                if (n % p == 0) return 0;
                result = -result;
            }
        if (n > 1) result = -result;
        return result;
    };
    Rat total(0);
    for (long d = 1; d * d <= M; ++d) {
        if (M % (d * d) || mu(d) == 0) continue;
        for (long e = 1; e * e <= N; ++e) {
            if (N % (e * e) || mu(e) == 0) continue;
            total += Rat(mu(d) * mu(e)) * hausmann_total(surf, M / (d * d), N / (e * e));
        }
    }
    return total;
}

/* ------------------------------------------------------------------ */
/* SkewHermitian utilities                                            */
/* ------------------------------------------------------------------ */

namespace detail {

/* Read a matrix back into (a1, a2, lambda) coordinates, validating the
 * skew-hermitian integral shape. */
inline SkewHermitian skew_from_matrix(const Surface& surf, const Mat2K& B) {
    const Disc& d = surf.disc;
    long t = (d.D == d.m) ? 1 : 2;
    if (!(B.a.u == 0) || !(B.d.u == 0) || !(B.c == -B.b.conj()))
        throw std::logic_error("skew_from_matrix: not skew-hermitian");
    Rat a1 = B.a.v / t;
    Rat a2 = B.d.v * surf.genus.A / t;
    if (a1.get_den() != 1 || a2.get_den() != 1)
        throw std::logic_error("skew_from_matrix: non-integral diagonal");
    SkewHermitian S;
    S.m = d.m;
    S.a1 = a1.get_num();
    S.a2 = a2.get_num();
    S.lambda = B.b;
    return S;
}

/* g'^t B g, the SL(Lambda) substitution action; det(B) A is invariant and
 * checked on every step. */
inline SkewHermitian hz_apply(const Surface& surf, const SkewHermitian& B, const Mat2K& g) {
    Mat2K M = g.conj().transpose() * B.to_matrix(surf.disc, surf.genus.A) * g;
    SkewHermitian S = skew_from_matrix(surf, M);
    if (S.detA(surf.disc, surf.genus.A) != B.detA(surf.disc, surf.genus.A))
        throw std::logic_error("hz_apply: level not preserved");
    return S;
}

inline Rat hz_height(const SkewHermitian& B) {
    return rat_abs(Rat(B.a1)) + rat_abs(Rat(B.a2)) + rat_abs(B.lambda.u) +
           rat_abs(B.lambda.v);
}

inline std::string hz_key(const SkewHermitian& B) { return B.str(); }

/* F_B = F_{-B}: normalize the global sign by key. */
inline SkewHermitian hz_sign_normal(const SkewHermitian& B) {
    SkewHermitian n = -B;
    return hz_key(n) < hz_key(B) ? n : B;
}

/* Integer content of B: gcd of a1, a2 and the a^{-1}-coordinates of
 * lambda (primitive means content 1). */
inline Int hz_content(const Surface& surf, const SkewHermitian& B) {
    auto [s, t] = surf.genus.a_inv.coords(B.lambda);
    if (s.get_den() != 1 || t.get_den() != 1)
        throw std::logic_error("hz_content: lambda not in a^{-1}");
    Int sn = s.get_num(), tn = t.get_num();
    Int g1 = gcd(B.a1, B.a2);
    Int g2 = gcd(sn, tn);
    Int g = gcd(g1, g2);
    return g;
}

}  // namespace detail

/* ------------------------------------------------------------------ */
/* Branch solutions at an elliptic point                              */
/* ------------------------------------------------------------------ */

inline SkewHermitian elliptic_combo(const EllipticPoint& pt, long x, long y) {
    return {pt.B1.m, pt.B1.a1 * x + pt.B2.a1 * y, pt.B1.a2 * x + pt.B2.a2 * y,
            pt.B1.lambda * Rat(x) + pt.B2.lambda * Rat(y)};
}

/* Primitive branch solutions at an elliptic point: +-classes (x, y) with
 * phi(x, y) = N and x B1 + y B2 of content 1. */
inline std::vector<std::pair<long, long>> elliptic_solutions(const Surface& surf,
                                                             const EllipticPoint& pt,
                                                             long N) {
    Int p0 = pt.phi[0], p1 = pt.phi[1], p2 = pt.phi[2];
    Int disc = 4 * p0 * p2 - p1 * p1;
    Int xb = 4 * p2 * N / disc, yb = 4 * p0 * N / disc;
    long X = static_cast<long>(std::sqrt(xb.get_d())) + 2;
    long Y = static_cast<long>(std::sqrt(yb.get_d())) + 2;
    std::vector<std::pair<long, long>> out;
    for (long x = 0; x <= X; ++x)
        for (long y = -Y; y <= Y; ++y) {
            if (x == 0 && y <= 0) continue; /* one representative per +-class */
            if (p0 * x * x + p1 * x * y + p2 * y * y != N) continue;
            if (detail::hz_content(surf, elliptic_combo(pt, x, y)) != 1) continue;
            out.emplace_back(x, y);
        }
    return out;
}

/* ------------------------------------------------------------------ */
/* Components, branches, and the per-surface orbit system             */
/* ------------------------------------------------------------------ */

struct HZBranch {
    size_t cusp_index = 0;
    long cone = 0; /* cone (x_k, x_{k+1}), k in 0..L-1 */
    long p = 0, q = 0;
    long b = 0; /* branch label, reduced mod n = gcd(p, q) */
};

struct HZComponent {
    SkewHermitian rep;
    long N = 0;
    std::vector<HZBranch> branches;
};

class HZSystem {
public:
    struct Frame {
        Cusp cusp;
        CuspCycle cycle;
        Mat2K t = Mat2K::identity(0); /* maps infinity to the cusp */
        long C = 1;                   /* Nm of the class representative */
    };

    explicit HZSystem(const Surface& surf) : surf_(surf) {
        build_generators();
        build_frames();
    }

    const Surface& surface() const { return surf_; }
    const std::vector<Frame>& frames() const { return frames_; }

    /* Components of F_N (orbit list with cusp branches), cached.  The
     * expected component count certifies the heuristic orbit merge: the
     * search escalates until the enumerated orbits reach it, and a
     * shortfall or an irreducible excess is an error. */
    const std::vector<HZComponent>& components(long N, size_t expected) {
        auto it = cache_.find(N);
        if (it != cache_.end()) {
            if (it->second.size() != expected)
                throw std::invalid_argument("HZSystem::components: inconsistent expected count");
            return it->second;
        }
        auto comps = enumerate(N, expected);
        attach_branches(N, comps);
        return cache_.emplace(N, std::move(comps)).first->second;
    }

    /* Component index of an arbitrary primitive B within the cached
     * components of its level. */
    size_t match(const SkewHermitian& B) {
        if (detail::hz_content(surf_, B) != 1)
            throw std::invalid_argument("HZSystem::match: B not primitive");
        Rat NA = B.detA(surf_.disc, surf_.genus.A);
        if (NA.get_den() != 1 || !(NA > 0))
            throw std::invalid_argument("HZSystem::match: det(B)A not a positive integer");
        long N = static_cast<long>(NA.get_num().get_si());
        auto it = cache_.find(N);
        if (it == cache_.end())
            throw std::logic_error("HZSystem::match: components(" + std::to_string(N) +
                                   ") not yet enumerated");
        std::vector<size_t> targets;
        for (const auto& c : it->second) targets.push_back(orbit_of(reduce(c.rep), 2000));
        return resolve_to(B, targets, "match " + B.str());
    }

    /* Pulled-back branch matrices for direction lambda = p x1 + q x2 at a
     * frame: B_loc = [[0, lambda], [-lambda', y sqrt(D)]] for each y making
     * t'^t B_loc t integral; one representative per branch label b mod n,
     * where b = y A C^2. */
    std::vector<std::pair<SkewHermitian, long>> branch_matrices(const Frame& fr,
                                                                const QuadNum& lam,
                                                                long p, long q) const {
        long m = surf_.disc.m;
        long A = surf_.genus.A;
        long n = static_cast<long>(std::gcd(p, q));
        QuadNum sqrtD{m, Rat(0), Rat(surf_.disc.D == m ? 1 : 2)};
        QuadNum zero = QuadNum::zero(m);
        Mat2K tct = fr.t.conj().transpose();
        Mat2K B0 = tct * Mat2K{zero, lam, -lam.conj(), zero} * fr.t;
        Mat2K B1 = tct * Mat2K{zero, zero, zero, sqrtD} * fr.t;
        /* integrality of B0 + y B1 in (a1, a2, lambda-coords): four affine
         * conditions c0_i + y c1_i in Z */
        auto coords4 = [&](const Mat2K& B) -> std::array<Rat, 4> {
            long tt = (surf_.disc.D == m) ? 1 : 2;
            auto [s, t2] = surf_.genus.a_inv.coords(B.b);
            return {B.a.v / tt, B.d.v * A / tt, s, t2};
        };
        std::array<Rat, 4> c0 = coords4(B0), c1 = coords4(B1);
        std::vector<std::pair<SkewHermitian, long>> out;
        int first = -1;
        for (int i = 0; i < 4; ++i)
            if (c1[i] != 0) {
                first = i;
                break;
            }
        if (first < 0) {
            bool integral = true;
            for (int i = 0; i < 4; ++i)
                if (c0[i].get_den() != 1) integral = false;
            if (integral) out.emplace_back(detail::skew_from_matrix(surf_, B0), 0);
            return out;
        }
        std::map<long, SkewHermitian> by_label;
        long CC = fr.C * fr.C;
        for (long j = 0; j <= 600; j = (j <= 0 ? -j + 1 : -j)) {
            Rat y = (Rat(j) - c0[first]) / c1[first];
            bool ok = true;
            for (int i = 0; i < 4 && ok; ++i) {
                Rat v = c0[i] + y * c1[i];
                if (v.get_den() != 1) ok = false;
            }
            if (!ok) continue;
            Rat brat = y * A * CC;
            if (brat.get_den() != 1) continue; /* the branch label is integral */
            long b = static_cast<long>(brat.get_num().get_si());
            long lab = ((b % n) + n) % n;
            if (by_label.count(lab)) continue;
            Mat2K BM{B0.a + B1.a * y, B0.b + B1.b * y, B0.c + B1.c * y, B0.d + B1.d * y};
            by_label.emplace(lab, detail::skew_from_matrix(surf_, BM));
            if (static_cast<long>(by_label.size()) == n) break;
        }
        for (auto& [lab, B] : by_label) out.emplace_back(B, lab);
        return out;
    }

    /* A transversal crossing point of F_M and F_N away from the elliptic
     * points, attributed to its pair of components. */
    struct Crossing {
        size_t comp_m = 0; /* component index within components(M) */
        size_t comp_n = 0; /* within components(N); for M == N, comp_m <= comp_n */
        long points = 0;   /* geometric crossing points of this pair */
    };

    /* Crossing points of F_M and F_N supported away from the elliptic
     * points.  Two branches H_B, H_B' cross in (H^+)^2 exactly when the
     * binary form A det(xB + yB') = M x^2 + 2q xy + N y^2 is positive
     * definite, and then in a single transversal point.  The SL(Lambda)
     * orbits of such pairs are enumerated from the coefficient box and
     * merged by a joint height search; orbits containing a pair of
     * phi_tau-solutions at an enumerated elliptic point are discarded as
     * elliptic.  The outcome is certified against `expected_ordered`, the
     * ordered-pair count that the transversal intersection formula leaves
     * after subtracting all elliptic contributions (each crossing point
     * carries one ordered pair for M != N and two for M == N).
     * components(M, .) and components(N, .) must already be enumerated. */
    std::vector<Crossing> interior_crossings(long M, long N,
                                             const std::vector<EllipticPoint>& pts,
                                             const Rat& expected_ordered) {
        if (M > N) throw std::invalid_argument("interior_crossings: require M <= N");
        using Pair = std::pair<SkewHermitian, SkewHermitian>;
        auto norm_pair = [&](const SkewHermitian& X0, const SkewHermitian& Y0) {
            SkewHermitian X = detail::hz_sign_normal(X0);
            SkewHermitian Y = detail::hz_sign_normal(Y0);
            if (M == N && detail::hz_key(Y) < detail::hz_key(X)) std::swap(X, Y);
            return Pair{std::move(X), std::move(Y)};
        };
        auto pkey = [](const Pair& P) {
            return detail::hz_key(P.first) + "|" + detail::hz_key(P.second);
        };
        auto pheight = [](const Pair& P) {
            return detail::hz_height(P.first) + detail::hz_height(P.second);
        };
        auto papply = [&](const Pair& P, const Mat2K& g) {
            return norm_pair(detail::hz_apply(surf_, P.first, g),
                             detail::hz_apply(surf_, P.second, g));
        };
        auto descend = [&](Pair P) {
            Rat h = pheight(P);
            for (int guard = 0; guard < 100000; ++guard) {
                bool moved = false;
                for (const auto& g : greedy_) {
                    Pair Q = papply(P, g);
                    Rat hq = pheight(Q);
                    if (hq < h) {
                        P = std::move(Q);
                        h = std::move(hq);
                        moved = true;
                        break;
                    }
                }
                if (!moved) return P;
            }
            throw std::logic_error("interior_crossings: descent does not converge");
        };
        auto preduce = [&](Pair P) {
            P = descend(std::move(P));
            Rat h = pheight(P);
            for (int guard = 0; guard < 1000; ++guard) {
                bool moved = false;
                for (const auto& g : plateau_) {
                    Pair Q = descend(papply(P, g));
                    Rat hq = pheight(Q);
                    if (hq < h) {
                        P = std::move(Q);
                        h = std::move(hq);
                        moved = true;
                        break;
                    }
                }
                if (!moved) return P;
            }
            throw std::logic_error("interior_crossings: plateau walk does not converge");
        };

        /* local union-find over joint orbits */
        std::map<std::string, size_t> pindex;
        std::vector<size_t> ppar;
        std::vector<Pair> prep;
        auto pfind = [&](size_t x) {
            while (ppar[x] != x) {
                ppar[x] = ppar[ppar[x]];
                x = ppar[x];
            }
            return x;
        };
        auto punite = [&](size_t a, size_t b) {
            a = pfind(a);
            b = pfind(b);
            if (a == b) return a;
            if (pheight(prep[b]) < pheight(prep[a])) std::swap(a, b);
            ppar[b] = a;
            return a;
        };
        auto orbit_of_pair = [&](const Pair& start, int budget) {
            std::string skey = pkey(start);
            if (auto it = pindex.find(skey); it != pindex.end()) return pfind(it->second);
            std::map<std::string, Pair> visited;
            std::deque<const Pair*> queue;
            std::vector<size_t> hits;
            Rat cap = pheight(start) * 3 + 30;
            auto push = [&](Pair X) {
                if (pheight(X) > cap) return;
                std::string key = pkey(X);
                if (visited.count(key)) return;
                if (auto it = pindex.find(key); it != pindex.end()) {
                    hits.push_back(pfind(it->second));
                    return;
                }
                auto ins = visited.emplace(std::move(key), std::move(X));
                queue.push_back(&ins.first->second);
            };
            push(start);
            for (int n = 0; n < budget && !queue.empty(); ++n) {
                const Pair* cur = queue.front();
                queue.pop_front();
                for (const auto& g : plateau_) push(papply(*cur, g));
            }
            size_t root;
            if (hits.empty()) {
                root = ppar.size();
                ppar.push_back(root);
                prep.push_back(start);
            } else {
                root = hits[0];
                for (size_t h : hits) root = punite(root, h);
            }
            root = pfind(root);
            for (auto& [key, val] : visited) {
                pindex.emplace(key, root);
                if (pheight(val) < pheight(prep[root])) prep[root] = val;
            }
            return root;
        };

        /* crossing test: positive definite pair form, strict (a tangency
         * would contradict transversality, and an indefinite or degenerate
         * form means the curves only meet outside (H^+)^2) */
        auto crossing_mid = [&](const SkewHermitian& X, const SkewHermitian& Y,
                                Rat& mid) {
            SkewHermitian S{X.m, X.a1 + Y.a1, X.a2 + Y.a2, X.lambda + Y.lambda};
            mid = (S.detA(surf_.disc, surf_.genus.A) - M - N) / 2;
            return mid * mid < Rat(M) * N;
        };

        /* seed the orbits that live over the elliptic points */
        std::set<size_t> elliptic_roots_raw;
        std::vector<size_t> eroots;
        for (const auto& pt : pts) {
            auto sM = elliptic_solutions(surf_, pt, M);
            auto sN = (M == N) ? sM : elliptic_solutions(surf_, pt, N);
            for (auto [x1, y1] : sM)
                for (auto [x2, y2] : sN) {
                    Pair P = norm_pair(elliptic_combo(pt, x1, y1),
                                       elliptic_combo(pt, x2, y2));
                    if (detail::hz_key(P.first) == detail::hz_key(P.second)) continue;
                    eroots.push_back(orbit_of_pair(preduce(P), 2000));
                }
        }

        /* seed from the coefficient box */
        std::vector<SkewHermitian> candM = box_candidates(M);
        std::vector<SkewHermitian> candN = (M == N) ? candM : box_candidates(N);
        std::vector<size_t> roots;
        Rat mid;
        for (const auto& X : candM)
            for (const auto& Y : candN) {
                if (detail::hz_key(detail::hz_sign_normal(X)) ==
                    detail::hz_key(detail::hz_sign_normal(Y)))
                    continue;
                if (!crossing_mid(X, Y, mid)) continue;
                roots.push_back(orbit_of_pair(preduce(norm_pair(X, Y)), 2000));
            }

        auto tally = [&]() {
            std::set<size_t> ell;
            for (size_t r : eroots) ell.insert(pfind(r));
            std::set<size_t> seen;
            Rat ordered(0);
            std::map<std::pair<size_t, size_t>, long> comp_points;
            for (size_t r0 : roots) {
                size_t r = pfind(r0);
                if (ell.count(r) || !seen.insert(r).second) continue;
                size_t cm = match(prep[r].first);
                size_t cn = match(prep[r].second);
                if (M == N && cn < cm) std::swap(cm, cn);
                ++comp_points[{cm, cn}];
                ordered += (M == N) ? 2 : 1;
            }
            return std::pair(ordered, comp_points);
        };

        auto [ordered, comp_points] = tally();
        if (ordered != expected_ordered) {
            /* escalate: unmerged islands are reconnected through the thick
             * conjugator set */
            build_thick();
            std::set<size_t> seen;
            std::vector<size_t> all = roots;
            all.insert(all.end(), eroots.begin(), eroots.end());
            for (size_t r0 : all) {
                size_t r = pfind(r0);
                if (!seen.insert(r).second) continue;
                for (const auto& g : thick_)
                    orbit_of_pair(preduce(papply(prep[pfind(r)], g)), 200);
            }
            std::tie(ordered, comp_points) = tally();
        }
        if (ordered != expected_ordered) {
            Rat o = ordered;
            throw std::runtime_error("interior_crossings: F_" + std::to_string(M) +
                                     ".F_" + std::to_string(N) + " on " + surf_.id.str() +
                                     ": found ordered count " + o.get_str() +
                                     ", expected " + expected_ordered.get_str());
        }
        std::vector<Crossing> out;
        for (auto& [cc, pts_n] : comp_points) out.push_back({cc.first, cc.second, pts_n});
        return out;
    }

private:
    /* ---------------- orbit machinery ---------------- */

    void build_generators() {
        long m = surf_.disc.m;
        QuadNum one = QuadNum::one(m), zero = QuadNum::zero(m);
        QuadNum w1 = surf_.genus.a_inv.z1(), w2 = surf_.genus.a_inv.z2();
        QuadNum y1 = surf_.genus.a.z1(), y2 = surf_.genus.a.z2();
        auto add = [](std::vector<Mat2K>& v, const Mat2K& g) {
            v.push_back(g);
            v.push_back(g.inv_unimodular());
        };
        for (long k = 1; k <= (1L << 12); k <<= 1) {
            for (const QuadNum* x : {&w1, &w2})
                add(greedy_, {one, *x * Rat(k), zero, one});
            for (const QuadNum* y : {&y1, &y2})
                add(greedy_, {one, zero, *y * Rat(k), one});
        }
        U_ = Mat2K{surf_.units.eps, zero, zero, surf_.units.eps.inverse()};
        Uinv_ = U_.inv_unimodular();
        log_eps_ = std::log(std::abs(surf_.units.eps.approx()));
        add(greedy_, U_);
        if (surf_.genus.a.contains(one) && surf_.genus.a_inv.contains(one))
            add(greedy_, {zero, -one, one, zero});
        for (const QuadNum* x : {&w1, &w2}) add(plateau_, {one, *x, zero, one});
        for (const QuadNum* y : {&y1, &y2}) add(plateau_, {one, zero, *y, one});
        add(plateau_, U_);
        if (surf_.genus.a.contains(one) && surf_.genus.a_inv.contains(one))
            add(plateau_, {zero, -one, one, zero});
    }

    /* Balance |lambda| vs |lambda'| by conjugating with U^k, then
     * sign-normalize. */
    SkewHermitian normal(SkewHermitian B) const {
        double r = std::abs(B.lambda.approx());
        double r2 = std::abs(B.lambda.approx_conj());
        if (r > 0 && r2 > 0) {
            long k = std::lround(std::log(r / r2) / (4 * log_eps_));
            const Mat2K& P = k > 0 ? U_ : Uinv_;
            for (long i = 0; i < std::labs(k); ++i) B = detail::hz_apply(surf_, B, P);
        }
        return detail::hz_sign_normal(B);
    }

    /* Exact centering move: T_x with x = -round(lambda / (a1 sqrt(D))) in
     * a^{-1}-coordinates, the Gauss-reduction step for lambda mod a1. */
    std::optional<Mat2K> center_T(const SkewHermitian& B) const {
        if (B.a1 == 0) return std::nullopt;
        long m = surf_.disc.m;
        QuadNum sqrtD{m, Rat(0), Rat(surf_.disc.D == m ? 1 : 2)};
        QuadNum x0 = -(B.lambda / (sqrtD * Rat(B.a1)));
        auto [s, t] = surf_.genus.a_inv.coords(x0);
        Int si = detail::round_rat(s), ti = detail::round_rat(t);
        if (si == 0 && ti == 0) return std::nullopt;
        QuadNum x = surf_.genus.a_inv.z1() * Rat(si) + surf_.genus.a_inv.z2() * Rat(ti);
        long mm = surf_.disc.m;
        return Mat2K{QuadNum::one(mm), x, QuadNum::zero(mm), QuadNum::one(mm)};
    }

    /* The mirror step: L_y with y' = -round(lambda A / (a2 sqrt(D))) in
     * a-coordinates. */
    std::optional<Mat2K> center_L(const SkewHermitian& B) const {
        if (B.a2 == 0) return std::nullopt;
        long m = surf_.disc.m;
        QuadNum sqrtD{m, Rat(0), Rat(surf_.disc.D == m ? 1 : 2)};
        QuadNum y0 = (-(B.lambda * Rat(surf_.genus.A) / (sqrtD * Rat(B.a2)))).conj();
        auto [s, t] = surf_.genus.a.coords(y0);
        Int si = detail::round_rat(s), ti = detail::round_rat(t);
        if (si == 0 && ti == 0) return std::nullopt;
        QuadNum y = surf_.genus.a.z1() * Rat(si) + surf_.genus.a.z2() * Rat(ti);
        return Mat2K{QuadNum::one(m), QuadNum::zero(m), y, QuadNum::one(m)};
    }

    SkewHermitian reduce(SkewHermitian B) const {
        Rat h = detail::hz_height(B);
        auto try_move = [&](const Mat2K& g) {
            SkewHermitian C = detail::hz_apply(surf_, B, g);
            Rat hc = detail::hz_height(C);
            if (hc < h) {
                B = std::move(C);
                h = std::move(hc);
                return true;
            }
            return false;
        };
        /* greedy centering closure, for the lookahead step */
        auto center_closure = [&](SkewHermitian C) {
            for (int guard = 0; guard < 10000; ++guard) {
                Rat hc = detail::hz_height(C);
                bool m2 = false;
                for (auto mk : {&HZSystem::center_T, &HZSystem::center_L}) {
                    if (auto g = (this->*mk)(C)) {
                        SkewHermitian D2 = detail::hz_apply(surf_, C, *g);
                        if (detail::hz_height(D2) < hc) {
                            C = std::move(D2);
                            m2 = true;
                            break;
                        }
                    }
                }
                if (!m2) return C;
            }
            return C;
        };
        for (int guard = 0; guard < 100000; ++guard) {
            bool moved = false;
            if (auto g = center_T(B)) moved = try_move(*g);
            if (!moved)
                if (auto g = center_L(B)) moved = try_move(*g);
            if (!moved)
                for (const auto& g : greedy_)
                    if (try_move(g)) {
                        moved = true;
                        break;
                    }
            if (!moved) {
                /* plateau lookahead: a height-neutral elementary move (swap,
                 * unit, single translation) may unlock further centering */
                for (const auto& g : plateau_) {
                    SkewHermitian C =
                        center_closure(normal(detail::hz_apply(surf_, B, g)));
                    Rat hc = detail::hz_height(C);
                    if (hc < h) {
                        B = std::move(C);
                        h = std::move(hc);
                        moved = true;
                        break;
                    }
                }
            }
            if (!moved) return normal(B);
        }
        throw std::logic_error("HZSystem::reduce: no convergence");
    }

    static bool better_rep(const SkewHermitian& a, const SkewHermitian& b) {
        Rat ha = detail::hz_height(a), hb = detail::hz_height(b);
        if (ha != hb) return ha < hb;
        return detail::hz_key(a) < detail::hz_key(b);
    }

    /* Breadth-first exploration (sign-normalized states, height-capped) from
     * a reduced element; visited states are recorded so overlapping
     * explorations merge via union-find. */
    size_t orbit_of(const SkewHermitian& start0, int budget) {
        SkewHermitian start = normal(start0);
        std::string skey = detail::hz_key(start);
        if (auto it = orbit_index_.find(skey); it != orbit_index_.end())
            return find(it->second);
        std::map<std::string, SkewHermitian> visited;
        std::deque<const SkewHermitian*> queue;
        std::vector<size_t> hits;
        Rat cap = detail::hz_height(start) * 3 + 30;
        auto push = [&](const SkewHermitian& X) {
            SkewHermitian S = detail::hz_sign_normal(X);
            if (detail::hz_height(S) > cap) return;
            std::string key = detail::hz_key(S);
            if (visited.count(key)) return;
            if (auto it = orbit_index_.find(key); it != orbit_index_.end()) {
                hits.push_back(find(it->second));
                return;
            }
            auto ins = visited.emplace(std::move(key), std::move(S));
            queue.push_back(&ins.first->second);
        };
        push(start);
        for (int n = 0; n < budget && !queue.empty(); ++n) {
            const SkewHermitian* cur = queue.front();
            queue.pop_front();
            for (const auto& g : plateau_) push(detail::hz_apply(surf_, *cur, g));
        }
        size_t root;
        if (hits.empty()) {
            root = parent_.size();
            parent_.push_back(root);
            rep_.push_back(start);
        } else {
            root = hits[0];
            for (size_t h : hits) root = unite(root, h);
        }
        root = find(root);
        for (auto& [key, val] : visited) {
            orbit_index_.emplace(key, root);
            if (better_rep(val, rep_[root])) rep_[root] = val;
        }
        return root;
    }

    size_t find(size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    size_t unite(size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return a;
        if (better_rep(rep_[b], rep_[a])) std::swap(a, b);
        parent_[b] = a;
        return a;
    }

    /* Small SL(Lambda) elements used as single-step conjugators when basic
     * exploration leaves orbit islands unconnected (they cross saddles whose
     * intermediate states are too tall for the height-capped search). */
    void build_thick() {
        if (!thick_.empty()) return;
        long m = surf_.disc.m;
        QuadNum o1 = surf_.O.z1(), o2 = surf_.O.z2();
        QuadNum g1 = surf_.genus.a.z1(), g2 = surf_.genus.a.z2();
        for (long ci = -2; ci <= 2; ++ci)
            for (long cj = -2; cj <= 2; ++cj) {
                if (ci == 0 && cj == 0) continue;
                QuadNum c = g1 * Rat(ci) + g2 * Rat(cj);
                for (long ai = -2; ai <= 2; ++ai)
                    for (long aj = -2; aj <= 2; ++aj) {
                        QuadNum a = o1 * Rat(ai) + o2 * Rat(aj);
                        for (long di = -2; di <= 2; ++di)
                            for (long dj = -2; dj <= 2; ++dj) {
                                QuadNum dd = o1 * Rat(di) + o2 * Rat(dj);
                                QuadNum b = (a * dd - QuadNum::one(m)) / c;
                                if (!surf_.genus.a_inv.contains(b)) continue;
                                thick_.push_back(Mat2K{a, b, c, dd});
                            }
                    }
            }
    }

    /* Identify the component root that B belongs to, escalating through the
     * thick conjugator set when the basic search does not connect. */
    size_t resolve_to(const SkewHermitian& B, const std::vector<size_t>& targets,
                      const std::string& what) {
        size_t r = find(orbit_of(reduce(B), 4000));
        auto hit = [&]() -> int {
            for (size_t i = 0; i < targets.size(); ++i)
                if (find(targets[i]) == find(r)) return static_cast<int>(i);
            return -1;
        };
        if (int h = hit(); h >= 0) return static_cast<size_t>(h);
        build_thick();
        for (const auto& g : thick_) {
            orbit_of(reduce(detail::hz_apply(surf_, rep_[find(r)], g)), 150);
            if (int h = hit(); h >= 0) return static_cast<size_t>(h);
        }
        /* escalate from the target side as well */
        for (size_t t : targets)
            for (const auto& g : thick_) {
                orbit_of(reduce(detail::hz_apply(surf_, rep_[find(t)], g)), 150);
                if (int h = hit(); h >= 0) return static_cast<size_t>(h);
            }
        throw std::runtime_error("HZSystem: orbit not resolved (" + what + ")");
    }

    /* The fixed deterministic coefficient box of primitive B with
     * det(B) A = a1 a2 D + A Nm(lambda) = N. */
    std::vector<SkewHermitian> box_candidates(long N) const {
        long D = surf_.disc.D, A = surf_.genus.A;
        long m = surf_.disc.m;
        QuadNum w1 = surf_.genus.a_inv.z1(), w2 = surf_.genus.a_inv.z2();
        std::vector<SkewHermitian> out;
        for (long a1 = -5; a1 <= 5; ++a1)
            for (long a2 = -5; a2 <= 5; ++a2) {
                Rat target = Rat(N) - Rat(a1) * Rat(a2) * D;
                for (long li = -18; li <= 18; ++li)
                    for (long lj = -18; lj <= 18; ++lj) {
                        QuadNum lam = w1 * Rat(li) + w2 * Rat(lj);
                        if (Rat(A) * lam.norm() != target) continue;
                        SkewHermitian B{m, Int(a1), Int(a2), lam};
                        if (detail::hz_content(surf_, B) != 1) continue;
                        out.push_back(std::move(B));
                    }
            }
        return out;
    }

    /* All orbits of primitive B with det(B) A = N from the box. */
    std::vector<HZComponent> enumerate(long N, size_t expected) {
        std::vector<size_t> roots;
        std::set<std::string> seen;
        for (const SkewHermitian& B : box_candidates(N)) {
            SkewHermitian R = reduce(B);
            if (!seen.insert(detail::hz_key(R)).second) continue;
            roots.push_back(orbit_of(R, 4000));
        }
        auto distinct = [&]() {
            std::set<size_t> s;
            for (size_t r : roots) s.insert(find(r));
            return s;
        };
        std::set<size_t> final_roots = distinct();
        if (final_roots.size() > expected) {
            /* escalate: conjugate each representative by the thick set */
            build_thick();
            for (size_t r0 : final_roots) {
                for (const auto& g : thick_) {
                    orbit_of(reduce(detail::hz_apply(surf_, rep_[find(r0)], g)), 150);
                    if (distinct().size() <= expected) break;
                }
                if (distinct().size() <= expected) break;
            }
            final_roots = distinct();
        }
        if (final_roots.size() != expected)
            throw std::runtime_error("HZSystem: F_" + std::to_string(N) + " on " +
                                     surf_.id.str() + ": found " +
                                     std::to_string(final_roots.size()) +
                                     " orbits, expected " + std::to_string(expected));
        std::vector<HZComponent> out;
        for (size_t r : final_roots) {
            HZComponent c;
            c.rep = rep_[r];
            c.N = N;
            out.push_back(c);
        }
        std::sort(out.begin(), out.end(), [](const HZComponent& x, const HZComponent& y) {
            return detail::hz_key(x.rep) < detail::hz_key(y.rep);
        });
        return out;
    }

    /* ---------------- cusp frames and branches ---------------- */

    static std::vector<QuadNum> small_elements(const QuadIdeal& I, long box) {
        std::vector<QuadNum> out;
        for (long i = -box; i <= box; ++i)
            for (long j = -box; j <= box; ++j) {
                if (i == 0 && j == 0) continue;
                out.push_back(I.z1() * Rat(i) + I.z2() * Rat(j));
            }
        return out;
    }

    void build_frames() {
        long m = surf_.disc.m;
        const Disc& d = surf_.disc;
        for (const Cusp& cu : enumerate_cusps(surf_)) {
            Frame fr;
            fr.cusp = cu;
            fr.cycle = resolve_cusp(surf_, cu);
            Rat C = cu.c.lattice_norm(d);
            if (C.get_den() != 1) throw std::logic_error("build_frames: non-integral norm");
            fr.C = static_cast<long>(C.get_num().get_si());
            /* t = [[alpha, gamma], [beta, delta]], det 1, mapping the lattice
             * c^{-1} (+) c a (columns) onto o (+) a:
             * alpha in c, beta in a c, gamma in (c a)^{-1}, delta in c^{-1} */
            QuadIdeal cinv = cu.c.inverse(d);
            QuadIdeal ac = QuadIdeal::mul(surf_.genus.a, cu.c);
            QuadIdeal cia = QuadIdeal::mul(cinv, surf_.genus.a_inv);
            bool done = false;
            if (cu.c.contains(QuadNum::one(m)) && cinv.contains(QuadNum::one(m))) {
                fr.t = Mat2K::identity(m); /* principal class: identity frame */
                done = true;
            }
            if (!done)
                for (const QuadNum& alpha : small_elements(cu.c, 3)) {
                    for (const QuadNum& beta : small_elements(ac, 3)) {
                        if (beta.is_zero()) continue;
                        for (const QuadNum& delta : small_elements(cinv, 4)) {
                            QuadNum gamma = (alpha * delta - QuadNum::one(m)) / beta;
                            if (!cia.contains(gamma)) continue;
                            fr.t = Mat2K{alpha, gamma, beta, delta};
                            done = true;
                            break;
                        }
                        if (done) break;
                    }
                    if (done) break;
                }
            if (!done) throw std::logic_error("build_frames: no frame found");
            /* sanity: conjugated translations by M_s land in SL(Lambda) */
            Mat2K tinv = fr.t.inv_unimodular();
            for (const QuadNum& x : {fr.cusp.M.z1(), fr.cusp.M.z2()}) {
                Mat2K T{QuadNum::one(m), x, QuadNum::zero(m), QuadNum::one(m)};
                if (!sl_lambda_member(d, fr.t * T * tinv, surf_.genus))
                    throw std::logic_error("build_frames: frame does not conjugate M_s");
            }
            frames_.push_back(fr);
        }
    }

    /* All branches over all cusps for level N, attached to the components. */
    void attach_branches(long N, std::vector<HZComponent>& comps) {
        long A = surf_.genus.A;
        std::vector<size_t> comp_root;
        for (const auto& c : comps) comp_root.push_back(orbit_of(reduce(c.rep), 4000));
        for (size_t ci = 0; ci < frames_.size(); ++ci) {
            const Frame& fr = frames_[ci];
            long L = static_cast<long>(fr.cycle.full_length());
            for (long k = 0; k < L; ++k) {
                QuadNum x1 = fr.cycle.point(k), x2 = fr.cycle.point(k + 1);
                /* (p, 0) in cone k represents the ray branch along x_{k+1};
                 * the equivalent chart-(k+1) direction (0, p) is skipped */
                for (long p = 1; p <= 16; ++p)
                    for (long q = 0; q <= 16; ++q) {
                        QuadNum lam = x1 * Rat(p) + x2 * Rat(q);
                        if (Rat(A) * lam.norm() != N) continue;
                        for (const auto& [BH, blabel] : branch_matrices(fr, lam, p, q)) {
                            if (detail::hz_content(surf_, BH) != 1) continue;
                            size_t i = resolve_to(BH, comp_root,
                                                  "branch N=" + std::to_string(N) +
                                                      " p=" + std::to_string(p) +
                                                      " q=" + std::to_string(q));
                            comps[i].branches.push_back({ci, k, p, q, blabel});
                        }
                    }
            }
        }
    }

    Surface surf_;
    std::vector<Mat2K> greedy_, plateau_, thick_;
    Mat2K U_ = Mat2K::identity(0), Uinv_ = Mat2K::identity(0);
    double log_eps_ = 0;
    std::vector<Frame> frames_;
    std::vector<size_t> parent_;
    std::vector<SkewHermitian> rep_;
    std::map<std::string, size_t> orbit_index_;
    std::map<long, std::vector<HZComponent>> cache_;
};

/* ------------------------------------------------------------------ */
/* Elliptic incidences and the zero-remainder accounting              */
/* ------------------------------------------------------------------ */

/* Branch count of T_N at a point: primitive solutions over all levels
 * N/d^2. */
inline size_t t_branch_count(const Surface& surf, const EllipticPoint& pt, long N) {
    size_t total = 0;
    for (long d = 1; d * d <= N; ++d)
        if (N % (d * d) == 0) total += elliptic_solutions(surf, pt, N / (d * d)).size();
    return total;
}

/* Sum over elliptic points of (ordered pairs of distinct branches) / |Gamma_x|
 * for the T-divisors; equals the Hausmann total exactly when all transversal
 * intersections are supported at the elliptic points. */
inline Rat elliptic_pair_total(const Surface& surf, const std::vector<EllipticPoint>& pts,
                               long M, long N) {
    Rat total(0);
    for (const auto& pt : pts) {
        long nM = static_cast<long>(t_branch_count(surf, pt, M));
        long nN = static_cast<long>(t_branch_count(surf, pt, N));
        /* branches lying in both the T_M and T_N sets */
        long both = 0;
        for (long d = 1; d * d <= M; ++d) {
            if (M % (d * d)) continue;
            long lev = M / (d * d);
            bool shared = false;
            for (long e = 1; e * e <= N; ++e)
                if (N % (e * e) == 0 && N / (e * e) == lev) shared = true;
            if (shared) both += static_cast<long>(elliptic_solutions(surf, pt, lev).size());
        }
        long pairs = nM * nN - both; /* ordered, distinct */
        total += Rat(pairs) / pt.order;
    }
    return total;
}

namespace detail {

/* Isotropy orbits of the +-solution classes of phi_tau = N at one elliptic
 * point, each orbit as its list of sign-normalized matrices. */
inline std::vector<std::vector<SkewHermitian>> solution_orbits(const Surface& surf,
                                                               const EllipticPoint& pt,
                                                               long N) {
    std::vector<SkewHermitian> mats;
    std::map<std::string, size_t> index;
    for (auto [x, y] : elliptic_solutions(surf, pt, N)) {
        SkewHermitian B = hz_sign_normal(elliptic_combo(pt, x, y));
        index.emplace(hz_key(B), mats.size());
        mats.push_back(B);
    }
    std::vector<int> orbit(mats.size(), -1);
    int norb = 0;
    for (size_t i = 0; i < mats.size(); ++i) {
        if (orbit[i] >= 0) continue;
        orbit[i] = norb++;
        SkewHermitian cur = mats[i];
        for (int step = 0; step < 6; ++step) {
            cur = hz_sign_normal(hz_apply(surf, cur, pt.stab));
            auto f = index.find(hz_key(cur));
            if (f == index.end())
                throw std::logic_error(
                    "solution_orbits: isotropy does not permute the solutions");
            if (orbit[f->second] < 0)
                orbit[f->second] = orbit[i];
            else if (orbit[f->second] != orbit[i])
                throw std::logic_error("solution_orbits: orbit merge conflict");
        }
    }
    std::vector<std::vector<SkewHermitian>> out(norb);
    for (size_t i = 0; i < mats.size(); ++i) out[orbit[i]].push_back(mats[i]);
    return out;
}

}  // namespace detail

/* Incidence of F_N components with an elliptic point: branches downstairs
 * are the orbits of the +-solution classes under the isotropy action
 * B -> s'^t B s.  Each branch meets the exceptional curve of a type 2 or
 * 3+ point with multiplicity 1.  At a type 3- point a free orbit (of size
 * 3) descends to a branch through the crossing point of the two halves E1
 * and E2, meeting both with multiplicity 1, while an isotropy-fixed
 * solution (orbit of size 1) is tangent to one of the two coordinate axes
 * and meets only the corresponding half. */
struct EllipticIncidence {
    size_t point = 0;     /* index into the elliptic point list */
    size_t component = 0; /* index into components(N) */
    long branches = 0;    /* downstairs branches of this component here */
};

inline std::vector<EllipticIncidence> elliptic_incidences(
    HZSystem& sys, const std::vector<EllipticPoint>& pts, long N) {
    const Surface& surf = sys.surface();
    std::vector<EllipticIncidence> out;
    for (size_t pi = 0; pi < pts.size(); ++pi) {
        std::map<size_t, long> per_comp;
        for (const auto& orb : detail::solution_orbits(surf, pts[pi], N))
            ++per_comp[sys.match(orb.front())];
        for (auto [ci, cnt] : per_comp) out.push_back({pi, ci, cnt});
    }
    return out;
}

/* One downstairs branch of F_N at an elliptic point.  `fixed` records
 * whether the isotropy stabilizes the branch (always true at points of
 * type 2 and 3+, where the rotation is scalar to first order; at a 3-
 * point it distinguishes axis-tangent branches, which meet a single half
 * of the exceptional divisor, from free ones, which meet both halves and
 * each other). */
struct EllipticBranch {
    size_t point = 0;
    size_t component = 0;
    bool fixed = true;
};

inline std::vector<EllipticBranch> elliptic_branches(HZSystem& sys,
                                                     const std::vector<EllipticPoint>& pts,
                                                     long N) {
    const Surface& surf = sys.surface();
    std::vector<EllipticBranch> out;
    for (size_t pi = 0; pi < pts.size(); ++pi) {
        const EllipticPoint& pt = pts[pi];
        for (const auto& orb : detail::solution_orbits(surf, pt, N)) {
            if (pt.rot == RotType::three_minus) {
                if (orb.size() != 1 && orb.size() != 3)
                    throw std::logic_error("elliptic_branches: bad 3- orbit size");
            } else if (orb.size() != 1) {
                /* scalar rotation: every curve through the point is fixed */
                throw std::logic_error("elliptic_branches: non-fixed branch at a " +
                                       rot_str(pt.rot) + " point");
            }
            out.push_back({pi, sys.match(orb.front()), orb.size() == 1});
        }
    }
    return out;
}

/* Ordered pairs of distinct primitive branches of F_M and F_N over the
 * elliptic points, each point weighted by 1/|Gamma_x| -- the part of the
 * transversal intersection number of F_M and F_N (after removing the
 * imprimitive T-levels) that is supported at the elliptic points. */
inline Rat f_level_elliptic(const Surface& surf, const std::vector<EllipticPoint>& pts,
                            long M, long N) {
    Rat total(0);
    for (const auto& pt : pts) {
        long nM = static_cast<long>(elliptic_solutions(surf, pt, M).size());
        long nN = (M == N) ? nM : static_cast<long>(elliptic_solutions(surf, pt, N).size());
        long both = (M == N) ? nM : 0;
        total += Rat(nM * nN - both) / pt.order;
    }
    return total;
}

}  // namespace hilb

#pragma once

/*
 * Fractional ideals of the ring of integers of K = Q(sqrt(D)) as rank-2
 * Z-lattices in Hermite normal form, the class group via reduction cycles of
 * indefinite binary quadratic forms, genus selection, the fundamental unit,
 * and SL-membership for the module Lambda = O (+) a.
 *
 * HNF convention: every lattice is spanned by
 *     z1 = n            (pure rational, n > 0)
 *     z2 = a + c*beta   (c > 0, 0 <= a < n)
 * and this presentation is unique, so lattice equality is componentwise.
 */

#include "quadnum.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <tuple>

namespace hilb {

/* ------------------------------------------------------------------ */
/* Lattices / fractional ideals                                       */
/* ------------------------------------------------------------------ */

struct QuadIdeal {
    long m = 0;
    Rat n, a, c;  /* basis z1 = n, z2 = a + c*beta */

    QuadNum z1() const { return QuadNum::rational(m, n); }
    QuadNum z2() const { return {m, a, c}; }

    /* Z-span of arbitrary generators (must span a full lattice). */
    static QuadIdeal from_gens(long m, const std::vector<QuadNum>& gens) {
        /* Clear denominators. */
        Int den = 1;
        for (const auto& g : gens) {
            den = lcm(den, g.u.get_den());
            den = lcm(den, g.v.get_den());
        }
        std::vector<std::pair<Int, Int>> rows;  /* (x, y) = x + y*beta, scaled */
        for (const auto& g : gens) {
            Int x = g.u.get_num() * (den / g.u.get_den());
            Int y = g.v.get_num() * (den / g.v.get_den());
            if (x != 0 || y != 0) rows.emplace_back(x, y);
        }
        /* Bring the y-column to gcd form by accumulating Bezout rows. */
        Int gy = 0, bx = 0;  /* row (bx, gy) with gy = gcd of y's */
        for (auto& [x, y] : rows) {
            if (y == 0) continue;
            if (gy == 0) { gy = y; bx = x; continue; }
            Int g, s, t;
            mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), gy.get_mpz_t(), y.get_mpz_t());
            Int nbx = s * bx + t * x;
            /* replace: the two rows reduce to (nbx, g) and eliminated rows below */
            Int k = y / g;
            Int l = gy / g;
            /* combination with y-part zero: l*(x,y) - k*(bx,gy) */
            Int zx = l * x - k * bx;
            bx = nbx;
            gy = g;
            x = zx;
            y = 0;
        }
        if (gy < 0) { gy = -gy; bx = -bx; }
        Int gx = 0;
        for (auto& [x, y] : rows)
            if (y == 0) gx = gcd(gx, x);
        if (gx == 0 || gy == 0)
            throw std::invalid_argument("QuadIdeal: generators do not span a full lattice");
        if (gx < 0) gx = -gx;
        /* reduce bx mod gx */
        Int r = bx % gx;
        if (r < 0) r += gx;
        QuadIdeal I;
        I.m = m;
        I.n = Rat(gx, den);
        I.a = Rat(r, den);
        I.c = Rat(gy, den);
        I.n.canonicalize();
        I.a.canonicalize();
        I.c.canonicalize();
        return I;
    }

    static QuadIdeal ring_of_integers(const Disc& d) {
        QuadNum omega = (d.m % 4 == 1) ? QuadNum{d.m, Rat(1, 2), Rat(1, 2)}
                                       : QuadNum::beta(d.m);
        return from_gens(d.m, {QuadNum::one(d.m), omega});
    }

    bool operator==(const QuadIdeal& o) const {
        return m == o.m && n == o.n && a == o.a && c == o.c;
    }
    bool operator!=(const QuadIdeal& o) const { return !(*this == o); }
    /* lexicographic, for canonical "smallest HNF" choices */
    bool operator<(const QuadIdeal& o) const {
        return std::tie(n, a, c) < std::tie(o.n, o.a, o.c);
    }

    /* coordinates of x in the basis (z1, z2); exact rationals */
    std::pair<Rat, Rat> coords(const QuadNum& x) const {
        Rat t = x.v / c;
        Rat s = (x.u - t * a) / n;
        return {s, t};
    }
    bool contains(const QuadNum& x) const {
        if (x.m != m) return false;
        auto [s, t] = coords(x);
        return s.get_den() == 1 && t.get_den() == 1;
    }

    /* covolume relative to O: Nm for O-modules */
    Rat lattice_norm(const Disc& d) const {
        Rat covol = n * c;                       /* det of basis in (1,beta) coords */
        Rat o_covol = (d.m % 4 == 1) ? Rat(1, 2) : Rat(1);
        return covol / o_covol;
    }

    QuadIdeal conj() const {
        return from_gens(m, {z1(), z2().conj()});
    }

    QuadIdeal scaled(const QuadNum& x) const {
        return from_gens(m, {z1() * x, z2() * x});
    }

    static QuadIdeal mul(const QuadIdeal& A, const QuadIdeal& B) {
        return from_gens(A.m, {A.z1() * B.z1(), A.z1() * B.z2(),
                               A.z2() * B.z1(), A.z2() * B.z2()});
    }

    /* a^-1 = conj(a) / Nm(a), valid for invertible O-modules */
    QuadIdeal inverse(const Disc& d) const {
        Rat N = lattice_norm(d);
        QuadNum scale = QuadNum::rational(m, Rat(1) / N);
        return conj().scaled(scale);
    }

    bool is_o_module(const Disc& d) const {
        QuadNum omega = (d.m % 4 == 1) ? QuadNum{d.m, Rat(1, 2), Rat(1, 2)}
                                       : QuadNum::beta(d.m);
        return contains(z1() * omega) && contains(z2() * omega);
    }

    std::string str() const {
        return "[" + z1().str() + ", " + z2().str() + "]";
    }
};

/* ------------------------------------------------------------------ */
/* Indefinite binary quadratic forms: reduction cycles                */
/* ------------------------------------------------------------------ */

struct BQForm {
    Int a, b, c;
    bool operator<(const BQForm& o) const { return std::tie(a, b, c) < std::tie(o.a, o.b, o.c); }
    bool operator==(const BQForm& o) const { return a == o.a && b == o.b && c == o.c; }
    Int disc() const { return b * b - 4 * a * c; }
};

inline Int isqrt(const Int& n) {
    Int r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

/* Reduced for indefinite D > 0 (not a square):
 * 0 < b < sqrt(D) and sqrt(D) - b < 2|a| < sqrt(D) + b. */
inline bool bq_reduced(const BQForm& f, const Int& D) {
    if (f.b <= 0 || f.b * f.b >= D) return false;
    Int ta = 2 * abs(f.a);
    /* sqrt(D) - b < ta  <=>  sqrt(D) < ta + b  <=>  D < (ta+b)^2 */
    if (D >= (ta + f.b) * (ta + f.b)) return false;
    /* ta < sqrt(D) + b: if ta <= b trivially true, else (ta-b)^2 < D */
    if (ta > f.b && (ta - f.b) * (ta - f.b) >= D) return false;
    return true;
}

/* One step of the reduction operator rho. */
inline BQForm bq_rho(const BQForm& f, const Int& D) {
    Int ac = abs(f.c);
    Int t = 2 * ac;
    Int fl = isqrt(D);                 /* floor(sqrt D), D non-square */
    /* b2 = -b mod t, shifted maximal with b2 <= floor(sqrt D) when 2|c| < sqrt D,
     * else b2 in (sqrt D - 2|c|, sqrt D]. Both cases: maximal b2 <= fl. */
    Int r = (-f.b) % t;
    if (r < 0) r += t;
    Int b2 = r + t * ((fl - r) / t);
    if (b2 > fl) b2 -= t;              /* guard for negative division rounding */
    while (b2 + t <= fl) b2 += t;
    Int c2 = (b2 * b2 - D) / (4 * f.c);
    return {f.c, b2, c2};
}

inline BQForm bq_reduce(BQForm f, const Int& D) {
    for (int i = 0; i < 10000; ++i) {
        if (bq_reduced(f, D)) return f;
        f = bq_rho(f, D);
    }
    throw std::logic_error("bq_reduce: failed to reduce");
}

inline std::vector<BQForm> bq_cycle(BQForm f, const Int& D) {
    f = bq_reduce(f, D);
    std::vector<BQForm> cyc{f};
    BQForm g = bq_rho(f, D);
    while (!(g == f)) {
        cyc.push_back(g);
        g = bq_rho(g, D);
        if (cyc.size() > 100000) throw std::logic_error("bq_cycle: runaway cycle");
    }
    return cyc;
}

/* proper (SL2) equivalence <=> same reduction cycle */
inline bool bq_equivalent(const BQForm& f, const BQForm& g, const Int& D) {
    BQForm gr = bq_reduce(g, D);
    for (const BQForm& h : bq_cycle(f, D))
        if (h == gr) return true;
    return false;
}

/* ------------------------------------------------------------------ */
/* Ideal classes                                                      */
/* ------------------------------------------------------------------ */

/* Norm form of an ideal w.r.t. a positively oriented basis; integral,
 * discriminant D, well-defined up to proper equivalence. */
inline BQForm ideal_form(const Disc& d, const QuadIdeal& I) {
    /* (z1, z2) = (n, a + c beta) has (z1 z2' - z1' z2)/sqrt(D) < 0; swap. */
    QuadNum alpha = I.z2(), beta2 = I.z1();
    Rat N = I.lattice_norm(d);
    Rat fa = alpha.norm() / N;
    Rat fb = (alpha * beta2.conj() + beta2 * alpha.conj()).u / N;  /* Tr(alpha beta2') */
    Rat fc = beta2.norm() / N;
    if (fa.get_den() != 1 || fb.get_den() != 1 || fc.get_den() != 1)
        throw std::logic_error("ideal_form: non-integral form");
    BQForm f{fa.get_num(), fb.get_num(), fc.get_num()};
    if (f.disc() != d.D) throw std::logic_error("ideal_form: wrong discriminant");
    return f;
}

/* narrow (proper/SL2) equivalence of ideals */
inline bool narrow_equal(const Disc& d, const QuadIdeal& A, const QuadIdeal& B) {
    return bq_equivalent(ideal_form(d, A), ideal_form(d, B), Int(d.D));
}

/* wide equivalence: equal up to multiplication by any field element */
inline bool wide_equal(const Disc& d, const QuadIdeal& A, const QuadIdeal& B) {
    if (narrow_equal(d, A, B)) return true;
    QuadIdeal Abeta = A.scaled(QuadNum::beta(d.m));  /* Nm(beta) < 0 flips orientation class */
    return narrow_equal(d, Abeta, B);
}

/* prime ideals above a rational prime p, as O-submodules */
inline std::vector<QuadIdeal> prime_ideals_above(const Disc& d, long p) {
    QuadIdeal O = QuadIdeal::ring_of_integers(d);
    QuadNum omega = O.z2();
    /* minimal polynomial of omega: x^2 - t x + q */
    long t, q;
    if (d.m % 4 == 1) { t = 1; q = (1 - d.m) / 4; }
    else              { t = 0; q = -d.m; }
    std::vector<QuadIdeal> out;
    std::set<QuadIdeal> seen;
    for (long k = 0; k < p; ++k) {
        long val = ((k * k - t * k + q) % p + p) % p;
        if (val != 0) continue;
        QuadNum gen = omega - QuadNum::rational(d.m, Rat(k));
        QuadIdeal P = QuadIdeal::from_gens(
            d.m, {QuadNum::rational(d.m, Rat(p)), QuadNum::rational(d.m, Rat(p)) * omega,
                  gen, gen * omega});
        if (seen.insert(P).second) out.push_back(P);
    }
    return out;
}

/* all integral O-ideals of a given norm (small norms only) */
inline std::vector<QuadIdeal> ideals_of_norm(const Disc& d, long N) {
    /* Build from prime factorizations; for the small N we need (N prime or 1),
     * a direct approach suffices: N = 1 -> O; N prime -> primes above N of
     * norm N. */
    QuadIdeal O = QuadIdeal::ring_of_integers(d);
    if (N == 1) return {O};
    std::vector<QuadIdeal> out;
    for (const auto& P : prime_ideals_above(d, N))
        if (P.lattice_norm(d) == Rat(N)) out.push_back(P);
    std::sort(out.begin(), out.end());
    return out;
}

/* The wide class group, with explicit representatives of minimal norm. */
struct ClassGroup {
    Disc disc;
    std::vector<QuadIdeal> reps;  /* reps[0] = O */

    static ClassGroup compute(const Disc& d) {
        ClassGroup cg;
        cg.disc = d;
        QuadIdeal O = QuadIdeal::ring_of_integers(d);
        cg.reps.push_back(O);
        /* generators: prime ideals up to a comfortable bound */
        std::vector<QuadIdeal> gens;
        for (long p : {2L, 3L, 5L, 7L, 11L, 13L, 17L, 19L, 23L, 29L})
            for (const auto& P : prime_ideals_above(d, p))
                if (P.lattice_norm(d) == Rat(p)) gens.push_back(P);
        /* BFS closure under multiplication */
        bool grew = true;
        while (grew) {
            grew = false;
            std::vector<QuadIdeal> frontier = cg.reps;
            for (const auto& R : frontier) {
                for (const auto& G : gens) {
                    QuadIdeal P = QuadIdeal::mul(R, G);
                    if (cg.find_class(P) < 0) {
                        cg.reps.push_back(P);
                        grew = true;
                    }
                }
            }
        }
        /* replace reps by minimal-norm integral representatives */
        for (size_t i = 1; i < cg.reps.size(); ++i) {
            for (long N = 2; N <= 50; ++N) {
                bool done = false;
                for (const auto& I : ideals_of_norm(d, N)) {
                    if (wide_equal(d, I, cg.reps[i])) {
                        cg.reps[i] = I;
                        done = true;
                        break;
                    }
                }
                if (done) break;
            }
        }
        return cg;
    }

    int find_class(const QuadIdeal& I) const {
        for (size_t i = 0; i < reps.size(); ++i)
            if (wide_equal(disc, reps[i], I)) return static_cast<int>(i);
        return -1;
    }
    int class_of(const QuadIdeal& I) const {
        int k = find_class(I);
        if (k < 0) throw std::logic_error("ClassGroup: class not found");
        return k;
    }
    size_t order() const { return reps.size(); }
    int mul(int i, int j) const { return class_of(QuadIdeal::mul(reps[i], reps[j])); }
    int inv(int i) const { return class_of(reps[i].conj()); }
};

/* ------------------------------------------------------------------ */
/* Units                                                              */
/* ------------------------------------------------------------------ */

struct Units {
    QuadNum eps;        /* fundamental unit > 1 */
    int norm_sign;      /* Nm(eps) = +-1 */
    QuadNum eps_plus;   /* generator of the totally positive units: eps or eps^2 */
    QuadNum eps_sq;     /* eps^2, generator of O^{x2} (mod +-1) */

    static Units compute(const Disc& d) {
        long m = d.m;
        if (m % 4 == 1) {
            /* (u + v beta)/... integral: x = (u + v beta)/2, u = v mod 2,
             * u^2 - m v^2 = +-4. */
            for (long v = 1;; ++v) {
                for (long s : {-4L, 4L}) {
                    Int t = Int(m) * v * v + s;
                    if (t <= 0) continue;
                    Int u = isqrt(t);
                    if (u * u == t && ((u - v) % 2 == 0)) {
                        Units U;
                        U.eps = QuadNum{m, Rat(u, 2), Rat(v, 2)};
                        U.norm_sign = (s == -4) ? -1 : 1;
                        U.finish();
                        return U;
                    }
                }
                if (v > 2000000) throw std::logic_error("Units: search exhausted");
            }
        } else {
            for (long v = 1;; ++v) {
                for (long s : {-1L, 1L}) {
                    Int t = Int(m) * v * v + s;
                    if (t <= 0) continue;
                    Int u = isqrt(t);
                    if (u * u == t) {
                        Units U;
                        U.eps = QuadNum{m, Rat(u), Rat(v)};
                        U.norm_sign = (s == -1) ? -1 : 1;
                        U.finish();
                        return U;
                    }
                }
                if (v > 2000000) throw std::logic_error("Units: search exhausted");
            }
        }
    }

private:
    void finish() {
        eps_sq = eps * eps;
        eps_plus = (norm_sign == 1) ? eps : eps_sq;
    }
};

/* ------------------------------------------------------------------ */
/* Genus choice and SL(Lambda)                                        */
/* ------------------------------------------------------------------ */

enum class GenusKind { principal, nonprincipal };

struct GenusChoice {
    GenusKind kind;
    long A;                /* Nm(a) */
    QuadIdeal a;           /* the ideal defining Lambda = O (+) a */
    QuadIdeal a_inv;       /* a^{-1} */

    static GenusChoice principal(const Disc& d) {
        GenusChoice g;
        g.kind = GenusKind::principal;
        g.A = 1;
        g.a = QuadIdeal::ring_of_integers(d);
        g.a_inv = g.a;
        return g;
    }

    /* Smallest-HNF integral ideal of norm A lying in a nonprincipal narrow
     * genus; A must be coprime to D with some genus character -1. */
    static GenusChoice nonprincipal(const Disc& d, long A) {
        bool nonpr = false;
        for (long Dp : d.fund_factors) {
            long kr = kron(Dp, A);
            if (kr == -1) nonpr = true;
            if (kr == 0) throw std::invalid_argument("GenusChoice: A not coprime to D");
        }
        if (!nonpr)
            throw std::invalid_argument("GenusChoice: norm " + std::to_string(A) +
                                        " lies in the principal genus for D = " + std::to_string(d.D));
        auto cands = ideals_of_norm(d, A);
        if (cands.empty())
            throw std::invalid_argument("GenusChoice: no ideal of norm " + std::to_string(A));
        GenusChoice g;
        g.kind = GenusKind::nonprincipal;
        g.A = A;
        g.a = cands.front();  /* smallest HNF */
        g.a_inv = g.a.inverse(d);
        return g;
    }

private:
    /* Kronecker symbol, local copy to keep this header self-contained
     * (the class_numbers module re-exports the full version). */
    static long kron(long a, long n);
};

inline long kronecker_symbol(long a, long n) {
    if (a == 0 && n == 0) throw std::invalid_argument("kronecker(0,0) undefined");
    if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
    long result = 1;
    if (n < 0) {
        n = -n;
        if (a < 0) result = -result;
    }
    /* strip factors of 2 from n */
    long e2 = 0;
    while (n % 2 == 0) { n /= 2; ++e2; }
    if (e2 > 0) {
        if (a % 2 == 0) return 0;
        long am8 = ((a % 8) + 8) % 8;
        if (e2 % 2 == 1 && (am8 == 3 || am8 == 5)) result = -result;
    }
    /* now n odd positive: Jacobi with reciprocity; peel the sign of a first */
    if (a < 0) {
        if (n % 4 == 3) result = -result;
        a = -a;
    }
    a %= n;
    while (a != 0) {
        while (a % 2 == 0) {
            a /= 2;
            long nm8 = n % 8;
            if (nm8 == 3 || nm8 == 5) result = -result;
        }
        std::swap(a, n);
        if (a % 4 == 3 && n % 4 == 3) result = -result;
        a %= n;
    }
    return (n == 1) ? result : 0;
}

inline long GenusChoice::kron(long a, long n) { return kronecker_symbol(a, n); }

/* det(M) = 1, a,d in O, b in a^{-1}, c in a. */
inline bool sl_lambda_member(const Disc& d, const Mat2K& M, const GenusChoice& g) {
    if (M.det() != QuadNum::one(d.m)) return false;
    QuadIdeal O = QuadIdeal::ring_of_integers(d);
    return O.contains(M.a) && O.contains(M.d) && g.a_inv.contains(M.b) && g.a.contains(M.c);
}

}  // namespace hilb

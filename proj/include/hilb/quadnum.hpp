#pragma once

/*
 * Exact arithmetic in a real quadratic field K = Q(sqrt(D)).
 *
 * Elements are stored over the basis {1, beta} with beta = sqrt(m), where m
 * is the squarefree part of the fundamental discriminant D.  Both coordinates
 * are exact rationals (GMP), so conjugation, norms and traces are exact:
 *
 *     x = u + v*beta,   x' = u - v*beta,
 *     Nm(x) = u^2 - m*v^2,   Tr(x) = 2u.
 *
 * The ring of integers is Z[omega] with omega = (1+beta)/2 when m = 1 mod 4
 * (then D = m) and omega = beta otherwise (then D = 4m).
 */

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hilb {

using Int = mpz_class;
using Rat = mpq_class;

inline Rat make_rat(long num, long den = 1) {
    Rat r(num, den);
    r.canonicalize();
    return r;
}

/* Fundamental discriminant D > 0 together with its squarefree part m and the
 * factorization of D into prime-power fundamental discriminants D_p. */
struct Disc {
    long D = 0;
    long m = 0;                        /* beta^2 */
    std::vector<long> fund_factors;    /* D_p, one per prime p | D, product D */

    static bool is_square(long n) {
        if (n < 0) return false;
        long r = static_cast<long>(std::sqrt(static_cast<double>(n)));
        while (r * r > n) --r;
        while ((r + 1) * (r + 1) <= n) ++r;
        return r * r == n;
    }

    static long squarefree_part(long n) {
        long sf = 1;
        for (long p = 2; p * p <= n; ++p) {
            long e = 0;
            while (n % p == 0) { n /= p; ++e; }
            if (e & 1) sf *= p;
        }
        return sf * n;
    }

    static Disc make(long D) {
        if (D <= 0)
            throw std::invalid_argument("Disc: D must be positive, got " + std::to_string(D));
        long r = D % 4;
        if (r != 0 && r != 1)
            throw std::invalid_argument("Disc: D = " + std::to_string(D) + " is not 0 or 1 mod 4");
        long m = squarefree_part(D);
        bool fundamental;
        if (m % 4 == 1)
            fundamental = (D == m);
        else
            fundamental = (D == 4 * m);
        if (!fundamental || m == 1)
            throw std::invalid_argument("Disc: D = " + std::to_string(D) + " is not a fundamental discriminant");

        Disc d;
        d.D = D;
        d.m = m;
        /* Prime-power fundamental discriminants: p* = (-1)^((p-1)/2) p for odd
         * p | D; the 2-part (if any) is whatever remains, one of -4, 8, -8. */
        long two_part = D;
        long rest = m;
        while (rest % 2 == 0) rest /= 2;
        for (long p = 3; p <= rest; p += 2) {
            if (rest % p == 0) {
                rest /= p;
                long pstar = (p % 4 == 1) ? p : -p;
                d.fund_factors.push_back(pstar);
                two_part /= pstar;
            }
        }
        if (two_part != 1) d.fund_factors.push_back(two_part);
        long prod = 1;
        for (long f : d.fund_factors) prod *= f;
        if (prod != D)
            throw std::logic_error("Disc: factorization into D_p failed for D = " + std::to_string(D));
        return d;
    }

    bool operator==(const Disc& o) const { return D == o.D; }
};

/* u + v*beta, beta = sqrt(m). */
struct QuadNum {
    long m = 0;
    Rat u, v;

    QuadNum() = default;
    QuadNum(long m_, Rat u_, Rat v_) : m(m_), u(std::move(u_)), v(std::move(v_)) {
        u.canonicalize();
        v.canonicalize();
    }
    static QuadNum zero(long m) { return {m, Rat(0), Rat(0)}; }
    static QuadNum one(long m) { return {m, Rat(1), Rat(0)}; }
    static QuadNum beta(long m) { return {m, Rat(0), Rat(1)}; }
    static QuadNum rational(long m, Rat r) { return {m, std::move(r), Rat(0)}; }

    bool is_zero() const { return u == 0 && v == 0; }
    bool is_rational() const { return v == 0; }

    QuadNum conj() const { return {m, u, -v}; }
    Rat norm() const { return u * u - m * v * v; }
    Rat trace() const { return 2 * u; }

    QuadNum operator-() const { return {m, -u, -v}; }
    QuadNum operator+(const QuadNum& o) const { check(o); return {m, u + o.u, v + o.v}; }
    QuadNum operator-(const QuadNum& o) const { check(o); return {m, u - o.u, v - o.v}; }
    QuadNum operator*(const QuadNum& o) const {
        check(o);
        return {m, u * o.u + m * (v * o.v), u * o.v + v * o.u};
    }
    QuadNum operator*(const Rat& r) const { return {m, u * r, v * r}; }
    QuadNum inverse() const {
        if (is_zero()) throw std::domain_error("QuadNum: inversion of zero");
        Rat n = norm();
        return {m, u / n, -v / n};
    }
    QuadNum operator/(const QuadNum& o) const { return *this * o.inverse(); }

    bool operator==(const QuadNum& o) const { return m == o.m && u == o.u && v == o.v; }
    bool operator!=(const QuadNum& o) const { return !(*this == o); }

    /* Total order compatible with the real embedding beta -> +sqrt(m):
     * sign(u + v*sqrt(m)) determined exactly. */
    int sign() const {
        int su = sgn(u), sv = sgn(v);
        if (sv == 0) return su;
        if (su == 0) return sv;
        if (su == sv) return su;
        /* opposite signs: compare u^2 against m v^2 */
        int c = cmp(u * u, m * (v * v));
        return c == 0 ? 0 : (c > 0 ? su : sv);
    }
    bool operator<(const QuadNum& o) const { return (*this - o).sign() < 0; }
    bool operator>(const QuadNum& o) const { return (*this - o).sign() > 0; }

    bool totally_positive() const { return sign() > 0 && conj().sign() > 0; }

    double approx() const { return u.get_d() + v.get_d() * std::sqrt(static_cast<double>(m)); }
    double approx_conj() const { return u.get_d() - v.get_d() * std::sqrt(static_cast<double>(m)); }

    /* Serialized as "(u_num/u_den)+(v_num/v_den)b". */
    std::string str() const {
        auto frac = [](const Rat& r) {
            return "(" + r.get_num().get_str() + "/" + r.get_den().get_str() + ")";
        };
        return frac(u) + "+" + frac(v) + "b";
    }

    static QuadNum parse(long m, const std::string& s) {
        /* Expected shape: (a/b)+(c/d)b ; whitespace not allowed. */
        auto bad = [&]() -> QuadNum {
            throw std::invalid_argument("QuadNum: cannot parse '" + s + "'");
        };
        size_t mid = s.find(")+(");
        if (s.empty() || s.front() != '(' || s.back() != 'b' || mid == std::string::npos) return bad();
        std::string us = s.substr(1, mid - 1);
        std::string vs = s.substr(mid + 3, s.size() - mid - 5);
        if (s[s.size() - 2] != ')') return bad();
        Rat u(us), v(vs);
        u.canonicalize();
        v.canonicalize();
        return {m, u, v};
    }

private:
    void check(const QuadNum& o) const {
        if (m != o.m) throw std::invalid_argument("QuadNum: mixed fields");
    }
};

inline QuadNum operator*(const Rat& r, const QuadNum& x) { return x * r; }

/* floor of (u + v*sqrt(m)), exact. */
inline Int quad_floor(const QuadNum& x) {
    /* floor(u) is a first guess; correct by comparing against integers. */
    Int f = x.u.get_num() / x.u.get_den();  /* truncation */
    if (x.u < 0 && x.u != Rat(f)) f -= 1;   /* floor of rational part */
    /* now adjust for v*sqrt(m): x - f in [v*sqrt(m), v*sqrt(m) + 1) */
    QuadNum r = x - QuadNum::rational(x.m, Rat(f));
    while (r.sign() < 0) { f -= 1; r = r + QuadNum::one(x.m); }
    QuadNum one = QuadNum::one(x.m);
    while ((r - one).sign() >= 0) { f += 1; r = r - one; }
    return f;
}

inline Int quad_ceil(const QuadNum& x) {
    Int f = quad_floor(x);
    return (x == QuadNum::rational(x.m, Rat(f))) ? f : f + 1;
}

/* 2x2 matrix over K. */
struct Mat2K {
    QuadNum a, b, c, d;

    Mat2K(QuadNum a_, QuadNum b_, QuadNum c_, QuadNum d_)
        : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)), d(std::move(d_)) {}
    static Mat2K identity(long m) {
        return {QuadNum::one(m), QuadNum::zero(m), QuadNum::zero(m), QuadNum::one(m)};
    }

    QuadNum det() const { return a * d - b * c; }
    QuadNum trace() const { return a + d; }
    Mat2K conj() const { return {a.conj(), b.conj(), c.conj(), d.conj()}; }
    Mat2K transpose() const { return {a, c, b, d}; }
    Mat2K operator*(const Mat2K& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2K operator-() const { return {-a, -b, -c, -d}; }
    /* inverse for det = 1 matrices */
    Mat2K inv_unimodular() const { return {d, -b, -c, a}; }

    bool operator==(const Mat2K& o) const { return a == o.a && b == o.b && c == o.c && d == o.d; }
    bool operator!=(const Mat2K& o) const { return !(*this == o); }
};

}  // namespace hilb

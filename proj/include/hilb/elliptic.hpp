#pragma once

/*
 * Elliptic points of the Hilbert modular surface X_g.
 *
 * An elliptic element of SL(Lambda) has rational trace t with t^2 < 4, so
 * t in {0, +-1}: order 2 in PSL for t = 0 and order 3 for t = +-1.  For
 * order 3 the rotation factor at the fixed point in embedding j is
 * zeta_3^{+-1} with sign sgn(c^{(j)}), hence the type is 3+ exactly when
 * Nm(c) > 0 and 3- when Nm(c) < 0.
 *
 * Enumeration is a bounded search over matrices with trace 0 or 1 (the
 * other order-3 lift is -M) and entries in growing coefficient boxes.
 * Candidates are bucketed by an exact conjugacy test: the solutions g of
 * g A = B g form a 2-dimensional K-vector space (a torsor over the
 * centralizer K[A], a CM field), on which det restricts to a binary
 * quadratic form that is definite in each real embedding of K.  SL(Lambda)
 * conjugators are therefore the integral points with det = 1 on a compact
 * locus, and a finite lattice-point enumeration either produces an explicit
 * conjugator or proves that none exists.  Completeness of the search box is
 * certified against the expected per-type counts; exhaustion without a
 * match is a hard error.
 *
 * For each point tau the module L_tau of integral skew-hermitian matrices
 * B = [[a1 sqrt(D), lambda], [-lambda', a2 sqrt(D)/A]] through tau is the
 * rank-2 kernel of two K-linear conditions (real and imaginary part of the
 * curve equation at tau), intersected with the integrality lattice
 * Z x Z x a^{-1}.  phi_tau(x,y) = det(x B1 + y B2) * A is positive
 * definite.
 */

#include "surface.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>

namespace hilb {

enum class RotType { two, three_plus, three_minus };

inline std::string rot_str(RotType r) {
    switch (r) {
        case RotType::two: return "2";
        case RotType::three_plus: return "3+";
        default: return "3-";
    }
}

inline RotType rotation_type(const Disc& d, const Mat2K& M) {
    QuadNum tr = M.trace();
    if (!tr.is_rational())
        throw std::invalid_argument("rotation_type: non-elliptic (irrational trace)");
    if (tr.u == 0) return RotType::two;
    if (tr.u == 1 || tr.u == -1) {
        Rat nc = M.c.norm();
        if (nc == 0)
            throw std::invalid_argument("rotation_type: c = 0, fixed point not interior");
        return nc > 0 ? RotType::three_plus : RotType::three_minus;
    }
    throw std::invalid_argument("rotation_type: non-torsion trace " + tr.str());
}

/* Skew-hermitian matrix through an elliptic point, in (a1, a2, lambda)
 * coordinates: B = [[a1 sqrt(D), lambda], [-lambda', a2 sqrt(D)/A]]. */
struct SkewHermitian {
    long m = 0;
    Int a1, a2;
    QuadNum lambda;

    /* det(B) * A = a1 a2 D + A Nm(lambda) */
    Rat detA(const Disc& d, long A) const {
        return Rat(a1) * Rat(a2) * d.D + Rat(A) * lambda.norm();
    }
    /* B = [[a1 sqrt(D), lambda], [-lambda', a2 sqrt(D)/A]], sqrt(D) = t*beta */
    Mat2K to_matrix(const Disc& d, long A) const {
        QuadNum sqrtD{m, Rat(0), Rat(d.D == d.m ? 1 : 2)};
        return {sqrtD * Rat(a1), lambda, -lambda.conj(), sqrtD * (Rat(a2) / A)};
    }
    SkewHermitian operator+(const SkewHermitian& o) const {
        return {m, a1 + o.a1, a2 + o.a2, lambda + o.lambda};
    }
    SkewHermitian operator-() const { return {m, -a1, -a2, -lambda}; }
    bool operator==(const SkewHermitian& o) const {
        return a1 == o.a1 && a2 == o.a2 && lambda == o.lambda;
    }
    bool operator<(const SkewHermitian& o) const {
        if (a1 != o.a1) return a1 < o.a1;
        if (a2 != o.a2) return a2 < o.a2;
        if (lambda.u != o.lambda.u) return lambda.u < o.lambda.u;
        return lambda.v < o.lambda.v;
    }
    std::string str() const {
        return "[" + a1.get_str() + "," + a2.get_str() + "," + lambda.str() + "]";
    }
};

struct EllipticPoint {
    Mat2K stab = Mat2K::identity(0);
    RotType rot = RotType::two;
    int order = 2;
    /* L_tau data */
    SkewHermitian B1, B2;       /* Z-basis of L_tau */
    std::array<Int, 3> phi;     /* phi(x,y) = phi0 x^2 + phi1 xy + phi2 y^2 */
};

namespace detail {

inline Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

inline Rat mat_height(const Mat2K& M) {
    Rat h(0);
    for (const QuadNum* e : {&M.a, &M.b, &M.c, &M.d})
        h += rat_abs(e->u) + rat_abs(e->v);
    return h;
}

inline std::string mat_key(const Mat2K& M) {
    return M.a.str() + "|" + M.b.str() + "|" + M.c.str() + "|" + M.d.str();
}

/* Normalize over the finite stabilizer-generating variants fixing the same
 * point: {M, -M} (order 2) or {M, M^{-1}} (order 3, same trace). */
inline Mat2K variant_normal(const Mat2K& M) {
    Mat2K alt = M.trace().u == 0 ? -M : M.inv_unimodular();
    return mat_key(alt) < mat_key(M) ? alt : M;
}

/* Quotient out conjugation by diag(eps, eps^-1): balance |c| against |c'|
 * so that translation moves see a well-behaved height landscape. */
inline Mat2K unit_balance(const Mat2K& M, const Mat2K& U, double log_eps) {
    if (M.c.is_zero()) return M;
    double r = std::abs(M.c.approx());
    double r2 = std::abs(M.c.approx_conj());
    if (r <= 0 || r2 <= 0) return M; /* double underflow: leave unbalanced */
    long k = std::lround(std::log(r / r2) / (4 * log_eps));
    if (k == 0) return M;
    Mat2K P = k > 0 ? U : U.inv_unimodular();
    Mat2K out = M;
    for (long i = 0; i < std::labs(k); ++i) out = P * out * P.inv_unimodular();
    return out;
}

/* Reduction of the fixed point tau = (tau_1, tau_2) in H^2 of an elliptic
 * matrix toward the fundamental domain.  Floating point only guides the
 * choice of moves; the state is always an exact conjugate of the input.
 * Reduction keeps entries small (cheap exact tests, fewer duplicates); it
 * plays no role in deciding conjugacy. */
struct PointReducer {
    const Surface& surf;
    Mat2K U;                           /* diag(eps, eps^-1) */
    double log_eps;
    QuadNum w1, w2;                    /* basis of a^{-1} (translations) */
    std::vector<std::pair<QuadNum, QuadNum>> cd; /* inversion rows (c, d) */

    explicit PointReducer(const Surface& s)
        : surf(s),
          U{s.units.eps, QuadNum::zero(s.disc.m), QuadNum::zero(s.disc.m),
            s.units.eps.inverse()},
          log_eps(std::log(std::abs(s.units.eps.approx()))),
          w1(s.genus.a_inv.z1()),
          w2(s.genus.a_inv.z2()) {
        QuadNum a1 = s.genus.a.z1(), a2 = s.genus.a.z2();
        QuadNum o1 = s.O.z1(), o2 = s.O.z2();
        for (long ci = -2; ci <= 2; ++ci)
            for (long cj = -2; cj <= 2; ++cj) {
                if (ci == 0 && cj == 0) continue;
                QuadNum c = a1 * Rat(ci) + a2 * Rat(cj);
                for (long di = -2; di <= 2; ++di)
                    for (long dj = -2; dj <= 2; ++dj)
                        cd.emplace_back(c, o1 * Rat(di) + o2 * Rat(dj));
            }
    }

    Mat2K normal(const Mat2K& M) const {
        return variant_normal(unit_balance(M, U, log_eps));
    }

    static std::array<std::complex<double>, 2> fixed_point(const Mat2K& M) {
        double t = M.trace().u.get_d();
        double s = std::sqrt(4.0 - t * t);
        std::array<std::complex<double>, 2> tau;
        double c1 = M.c.approx(), c2 = M.c.approx_conj();
        tau[0] = std::complex<double>(M.a.approx() - M.d.approx(), s * (c1 > 0 ? 1 : -1)) /
                 (2 * c1);
        tau[1] = std::complex<double>(M.a.approx_conj() - M.d.approx_conj(),
                                      s * (c2 > 0 ? 1 : -1)) /
                 (2 * c2);
        return tau;
    }

    /* Complete (c, d) to [[a, b], [c, d]] in SL(Lambda); empty if the search
     * box finds no completion. */
    std::optional<Mat2K> complete(const QuadNum& c, const QuadNum& d) const {
        QuadNum o1 = surf.O.z1(), o2 = surf.O.z2();
        long m = surf.disc.m;
        for (long ai = -3; ai <= 3; ++ai)
            for (long aj = -3; aj <= 3; ++aj) {
                QuadNum a = o1 * Rat(ai) + o2 * Rat(aj);
                if (c.is_zero()) continue;
                QuadNum b = (a * d - QuadNum::one(m)) / c;
                if (surf.genus.a_inv.contains(b)) return Mat2K{a, b, c, d};
            }
        return std::nullopt;
    }

    /* Drive the fixed point toward the fundamental domain: maximize
     * y1*y2 by inversions, then center by translations and unit scaling. */
    Mat2K reduce(Mat2K M) const {
        long m = surf.disc.m;
        for (int step = 0; step < 300; ++step) {
            auto tau = fixed_point(M);
            /* unit balance on Im parts */
            double ratio = tau[0].imag() / tau[1].imag();
            long k = std::lround(std::log(ratio) / (4 * log_eps));
            if (k != 0) {
                Mat2K P = k < 0 ? U : U.inv_unimodular();
                for (long i = 0; i < std::labs(k); ++i) M = P * M * P.inv_unimodular();
                tau = fixed_point(M);
            }
            /* translation centering: x = n1 w1 + n2 w2 ~ -Re(tau) */
            double det = w1.approx() * w2.approx_conj() - w2.approx() * w1.approx_conj();
            double r1 = -tau[0].real(), r2 = -tau[1].real();
            long n1 = std::lround((r1 * w2.approx_conj() - r2 * w2.approx()) / det);
            long n2 = std::lround((w1.approx() * r2 - w1.approx_conj() * r1) / det);
            if (n1 != 0 || n2 != 0) {
                QuadNum x = w1 * Rat(n1) + w2 * Rat(n2);
                Mat2K T{QuadNum::one(m), x, QuadNum::zero(m), QuadNum::one(m)};
                M = T * M * T.inv_unimodular();
                tau = fixed_point(M);
            }
            /* inversion: pick the (c, d) most increasing y1*y2, allowing a
             * preliminary shift by a unit cell of the translation lattice */
            bool moved = false;
            for (auto [t1, t2] : std::initializer_list<std::pair<long, long>>{
                     {0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1},
                     {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}) {
                std::array<std::complex<double>, 2> ts = {
                    tau[0] + t1 * w1.approx() + t2 * w2.approx(),
                    tau[1] + t1 * w1.approx_conj() + t2 * w2.approx_conj()};
                std::vector<std::pair<double, size_t>> cands;
                for (size_t i = 0; i < cd.size(); ++i) {
                    double q =
                        std::norm(cd[i].first.approx() * ts[0] + cd[i].second.approx()) *
                        std::norm(cd[i].first.approx_conj() * ts[1] +
                                  cd[i].second.approx_conj());
                    if (q < 0.999) cands.emplace_back(q, i);
                }
                std::sort(cands.begin(), cands.end());
                for (size_t ci = 0; ci < cands.size() && ci < 8; ++ci) {
                    auto g = complete(cd[cands[ci].second].first, cd[cands[ci].second].second);
                    if (!g) continue;
                    if (t1 != 0 || t2 != 0) {
                        QuadNum x = w1 * Rat(t1) + w2 * Rat(t2);
                        Mat2K T{QuadNum::one(m), x, QuadNum::zero(m), QuadNum::one(m)};
                        M = T * M * T.inv_unimodular();
                    }
                    M = *g * M * g->inv_unimodular();
                    moved = true;
                    break;
                }
                if (moved) break;
            }
            if (!moved) return normal(M);
        }
        throw std::logic_error("PointReducer: did not converge");
    }
};

/* ------------------------------------------------------------------ */
/* Exact linear algebra helpers                                       */
/* ------------------------------------------------------------------ */

using VecR = std::vector<Rat>;
using MatR = std::vector<VecR>;

/* Row echelon form in place; returns pivot columns. */
inline std::vector<size_t> rref(MatR& A) {
    size_t rows = A.size(), cols = rows ? A[0].size() : 0;
    std::vector<size_t> piv;
    size_t prow = 0;
    for (size_t col = 0; col < cols && prow < rows; ++col) {
        size_t sel = prow;
        while (sel < rows && A[sel][col] == 0) ++sel;
        if (sel == rows) continue;
        std::swap(A[prow], A[sel]);
        Rat pv = A[prow][col];
        for (size_t j = 0; j < cols; ++j) A[prow][j] /= pv;
        for (size_t i = 0; i < rows; ++i) {
            if (i == prow || A[i][col] == 0) continue;
            Rat f = A[i][col];
            for (size_t j = 0; j < cols; ++j) A[i][j] -= f * A[prow][j];
        }
        piv.push_back(col);
        ++prow;
    }
    return piv;
}

/* Kernel basis of a rows x n rational matrix. */
inline MatR rat_kernel(MatR A, size_t n) {
    auto piv = rref(A);
    std::vector<bool> is_piv(n, false);
    for (size_t c : piv) is_piv[c] = true;
    MatR ker;
    for (size_t free = 0; free < n; ++free) {
        if (is_piv[free]) continue;
        VecR v(n, Rat(0));
        v[free] = 1;
        for (size_t r = 0; r < piv.size(); ++r) v[piv[r]] = -A[r][free];
        ker.push_back(std::move(v));
    }
    return ker;
}

inline size_t rat_rank(MatR A) { return rref(A).size(); }

/* Solve A t = b (any shape); empty if inconsistent, free variables = 0. */
inline std::optional<VecR> rat_solve(const MatR& A, const VecR& b) {
    size_t rows = A.size(), cols = rows ? A[0].size() : 0;
    MatR aug(rows, VecR(cols + 1));
    for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < cols; ++j) aug[i][j] = A[i][j];
        aug[i][cols] = b[i];
    }
    auto piv = rref(aug);
    VecR t(cols, Rat(0));
    for (size_t r = 0; r < piv.size(); ++r) {
        if (piv[r] == cols) return std::nullopt; /* pivot in the rhs column */
        t[piv[r]] = aug[r][cols];
    }
    return t;
}

/* Kernel over Z of an r x n integer matrix: column-reduce [A; I]. */
inline std::vector<std::vector<Int>> int_kernel(std::vector<std::vector<Int>> A, size_t n) {
    size_t r = A.size();
    /* augmented columns: each column j carries (A col j ; e_j) */
    std::vector<std::vector<Int>> col(n, std::vector<Int>(r + n, 0));
    for (size_t j = 0; j < n; ++j) {
        for (size_t i = 0; i < r; ++i) col[j][i] = A[i][j];
        col[j][r + j] = 1;
    }
    size_t lead = 0;
    for (size_t row = 0; row < r && lead < n; ++row) {
        /* gcd-eliminate row `row` across columns lead..n-1 */
        for (size_t j = lead + 1; j < n; ++j) {
            while (col[j][row] != 0) {
                if (col[lead][row] == 0) {
                    std::swap(col[lead], col[j]);
                    continue;
                }
                Int q = col[j][row] / col[lead][row];
                for (size_t i = 0; i < r + n; ++i) col[j][i] -= q * col[lead][i];
                if (col[j][row] != 0) std::swap(col[lead], col[j]);
            }
        }
        if (col[lead][row] != 0) ++lead;
    }
    std::vector<std::vector<Int>> ker;
    for (size_t j = lead; j < n; ++j) {
        bool zero = true;
        for (size_t i = 0; i < r; ++i)
            if (col[j][i] != 0) zero = false;
        if (!zero) throw std::logic_error("int_kernel: reduction failed");
        ker.emplace_back(col[j].begin() + r, col[j].end());
    }
    return ker;
}

/* Nearest integer to a rational (ties go up). */
inline Int round_rat(const Rat& x) {
    Rat y = x + Rat(1, 2);
    Int num = y.get_num(), den = y.get_den(), q;
    mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return q;
}

/* LLL on a positive definite rational Gram matrix; returns a unimodular T
 * with reduced Gram T G T^t.  Exact arithmetic; the dimension is tiny, so
 * Gram-Schmidt data is simply recomputed after each basis operation. */
inline std::vector<std::vector<Int>> lll_gram(const MatR& G0) {
    size_t n = G0.size();
    std::vector<std::vector<Int>> T(n, std::vector<Int>(n, 0));
    for (size_t i = 0; i < n; ++i) T[i][i] = 1;
    auto gram = [&](size_t i, size_t j) {
        Rat s(0);
        for (size_t k = 0; k < n; ++k)
            for (size_t l = 0; l < n; ++l) s += Rat(T[i][k]) * Rat(T[j][l]) * G0[k][l];
        return s;
    };
    std::vector<Rat> Bs(n);
    MatR mu(n, VecR(n, Rat(0)));
    auto gs = [&]() {
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = 0; j < i; ++j) {
                Rat s = gram(i, j);
                for (size_t l = 0; l < j; ++l) s -= mu[i][l] * mu[j][l] * Bs[l];
                mu[i][j] = s / Bs[j];
            }
            Rat s = gram(i, i);
            for (size_t l = 0; l < i; ++l) s -= mu[i][l] * mu[i][l] * Bs[l];
            Bs[i] = s;
            if (!(Bs[i] > 0)) throw std::logic_error("lll_gram: Gram not positive definite");
        }
    };
    gs();
    size_t k = 1;
    long guard = 0;
    while (k < n) {
        if (++guard > 100000) throw std::logic_error("lll_gram: no convergence");
        for (size_t j = k; j-- > 0;) {
            Int r = round_rat(mu[k][j]);
            if (r != 0) {
                for (size_t l = 0; l < n; ++l) T[k][l] -= r * T[j][l];
                gs();
            }
        }
        if (Bs[k] >= (Rat(3, 4) - mu[k][k - 1] * mu[k][k - 1]) * Bs[k - 1]) {
            ++k;
        } else {
            std::swap(T[k], T[k - 1]);
            gs();
            k = k > 1 ? k - 1 : 1;
        }
    }
    return T;
}

/* ------------------------------------------------------------------ */
/* Exact conjugacy test                                               */
/* ------------------------------------------------------------------ */

/* View a length-8 rational vector as the (u, v) components of the four
 * entries (a, b, c, d) of a 2x2 matrix over K. */
inline Mat2K vec_to_mat(long m, const VecR& v) {
    return {QuadNum{m, v[0], v[1]}, QuadNum{m, v[2], v[3]}, QuadNum{m, v[4], v[5]},
            QuadNum{m, v[6], v[7]}};
}

/* Multiplication by beta on entry components: (u, v) -> (m v, u). */
inline VecR vec_beta(long m, const VecR& v) {
    VecR w(8);
    for (int e = 0; e < 4; ++e) {
        w[2 * e] = Rat(m) * v[2 * e + 1];
        w[2 * e + 1] = v[2 * e];
    }
    return w;
}

/* Search for g in SL(Lambda) with g A g^{-1} = B up to the stabilizer
 * variants {B, -B} (order 2) or {B, B^{-1}} (order 3).  The solution space
 * of g A = B~ g is 2-dimensional over K; det restricts to a K-valued
 * quadratic form whose embeddings are definite (relative norm form of the
 * CM extension K[A]/K, scaled by det of any one solution), so integral
 * solutions with det = 1 lie on a compact locus: the Fincke-Pohst style
 * enumeration below is exhaustive and an empty result proves that A and B
 * are not conjugate in SL(Lambda). */
inline std::optional<Mat2K> conjugating_element(const Surface& surf, const Mat2K& A,
                                                const Mat2K& B) {
    long m = surf.disc.m;
    if (A.trace() != B.trace() && A.trace() != -B.trace()) return std::nullopt;
    std::vector<Mat2K> variants;
    if (B.trace().u == 0)
        variants = {B, -B};
    else
        variants = {B, B.inv_unimodular()};

    for (const Mat2K& Bt : variants) {
        if (Bt.trace() != A.trace()) continue;
        /* 8x8 system: entries of g A - Bt g = 0, unknowns = components of
         * g = [[a, b], [c, d]] in order (a_u, a_v, b_u, b_v, c_u, c_v, d_u, d_v) */
        MatR sys(8, VecR(8, Rat(0)));
        auto acc = [&](int eq, int var, const QuadNum& k, int sgn) {
            sys[2 * eq][2 * var] += Rat(sgn) * k.u;
            sys[2 * eq][2 * var + 1] += Rat(sgn) * Rat(m) * k.v;
            sys[2 * eq + 1][2 * var] += Rat(sgn) * k.v;
            sys[2 * eq + 1][2 * var + 1] += Rat(sgn) * k.u;
        };
        enum { va, vb, vc, vd };
        acc(0, va, A.a, 1); acc(0, vb, A.c, 1); acc(0, va, Bt.a, -1); acc(0, vc, Bt.b, -1);
        acc(1, va, A.b, 1); acc(1, vb, A.d, 1); acc(1, vb, Bt.a, -1); acc(1, vd, Bt.b, -1);
        acc(2, vc, A.a, 1); acc(2, vd, A.c, 1); acc(2, va, Bt.c, -1); acc(2, vc, Bt.d, -1);
        acc(3, vc, A.b, 1); acc(3, vd, A.d, 1); acc(3, vb, Bt.c, -1); acc(3, vd, Bt.d, -1);
        MatR ker = rat_kernel(sys, 8);
        if (ker.size() != 4)
            throw std::logic_error("conjugating_element: solution space dim != 4");

        /* K-basis {P, Q} of the solution space: Q-basis {P, bP, Q, bQ} */
        VecR P = ker[0], bP = vec_beta(m, P);
        size_t qi = 1;
        while (qi < 4 && rat_rank({P, bP, ker[qi]}) < 3) ++qi;
        if (qi == 4) throw std::logic_error("conjugating_element: no K-independent Q");
        VecR Q = ker[qi], bQ = vec_beta(m, Q);
        MatR G = {P, bP, Q, bQ};
        if (rat_rank(G) != 4)
            throw std::logic_error("conjugating_element: K-basis degenerate");

        /* Integrality lattice: t in Q^4 with g(t) = sum t_i G_i having
         * a, d in O, b in a^{-1}, c in a.  Coordinates of entry e w.r.t. a
         * lattice [n, a + c*beta] are linear in (u, v). */
        const QuadIdeal* target[4] = {&surf.O, &surf.genus.a_inv, &surf.genus.a, &surf.O};
        MatR W(8, VecR(4));
        for (int e = 0; e < 4; ++e) {
            const QuadIdeal& L = *target[e];
            for (int i = 0; i < 4; ++i) {
                Rat u = G[i][2 * e], v = G[i][2 * e + 1];
                W[2 * e][i] = (u - v * L.a / L.c) / L.n;
                W[2 * e + 1][i] = v / L.c;
            }
        }
        /* basis of {t : W t in Z^8} = W^{-1}(colspace(W) cap Z^8); the
         * saturation is the integer kernel of integer equations for the
         * column space */
        MatR Wt(4, VecR(8));
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 4; ++j) Wt[j][i] = W[i][j];
        MatR lk = rat_kernel(Wt, 8); /* left kernel of W, dim 4 */
        if (lk.size() != 4) throw std::logic_error("conjugating_element: W not injective");
        std::vector<std::vector<Int>> lk_int(4, std::vector<Int>(8));
        for (int r = 0; r < 4; ++r) {
            Int den = 1;
            for (int j = 0; j < 8; ++j) den = lcm(den, lk[r][j].get_den());
            for (int j = 0; j < 8; ++j) {
                Rat s = lk[r][j] * den;
                lk_int[r][j] = s.get_num();
            }
        }
        auto sat = int_kernel(lk_int, 8);
        if (sat.size() != 4) throw std::logic_error("conjugating_element: saturation rank != 4");
        MatR basis; /* rows: lattice basis vectors in t-coordinates */
        for (const auto& z : sat) {
            VecR zr(8);
            for (int i = 0; i < 8; ++i) zr[i] = Rat(z[i]);
            auto t = rat_solve(W, zr);
            if (!t) throw std::logic_error("conjugating_element: saturation not in image");
            basis.push_back(*t);
        }

        /* q(x) = det(sum x_k Gamma_k) in K; F = Tr_{K/Q} q, positive
         * definite exactly when det = 1 is attainable on this coset */
        std::array<Mat2K, 4> Gam = {Mat2K::identity(m), Mat2K::identity(m),
                                    Mat2K::identity(m), Mat2K::identity(m)};
        for (int k = 0; k < 4; ++k) {
            VecR g(8, Rat(0));
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 8; ++j) g[j] += basis[k][i] * G[i][j];
            Gam[k] = vec_to_mat(m, g);
        }
        std::array<std::array<QuadNum, 4>, 4> q;
        MatR F(4, VecR(4));
        auto build_forms = [&]() {
            for (int k = 0; k < 4; ++k) q[k][k] = Gam[k].det();
            for (int k = 0; k < 4; ++k)
                for (int l = k + 1; l < 4; ++l) {
                    Mat2K S{Gam[k].a + Gam[l].a, Gam[k].b + Gam[l].b, Gam[k].c + Gam[l].c,
                            Gam[k].d + Gam[l].d};
                    QuadNum cross = (S.det() - q[k][k] - q[l][l]) * Rat(1, 2);
                    q[k][l] = cross;
                    q[l][k] = cross;
                }
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) F[k][l] = 2 * q[k][l].u;
        };
        build_forms();

        /* embedding signs: q_j is +-definite, so unless Tr q is positive
         * definite there is no solution of det = 1 on this coset */
        {
            MatR Fw = F;
            bool posdef = true;
            for (int k = 0; k < 4 && posdef; ++k) {
                if (!(Fw[k][k] > 0)) {
                    posdef = false;
                    break;
                }
                for (int i = k + 1; i < 4; ++i)
                    for (int j = k + 1; j < 4; ++j)
                        Fw[i][j] -= Fw[k][i] * Fw[k][j] / Fw[k][k];
            }
            if (!posdef) continue;
        }

        /* LLL-reduce the Gram so the box walk below stays balanced, then
         * LDL^t for the bound recursion */
        auto T = lll_gram(F);
        {
            std::array<Mat2K, 4> Gam2 = Gam;
            for (int k = 0; k < 4; ++k) {
                VecR acc8(8, Rat(0));
                for (int j = 0; j < 4; ++j) {
                    Rat f(T[k][j]);
                    acc8[0] += f * Gam[j].a.u; acc8[1] += f * Gam[j].a.v;
                    acc8[2] += f * Gam[j].b.u; acc8[3] += f * Gam[j].b.v;
                    acc8[4] += f * Gam[j].c.u; acc8[5] += f * Gam[j].c.v;
                    acc8[6] += f * Gam[j].d.u; acc8[7] += f * Gam[j].d.v;
                }
                Gam2[k] = vec_to_mat(m, acc8);
            }
            Gam = Gam2;
            build_forms();
        }
        MatR Fw = F;
        std::array<Rat, 4> diag;
        MatR low(4, VecR(4, Rat(0)));
        for (int k = 0; k < 4; ++k) {
            diag[k] = Fw[k][k];
            if (!(diag[k] > 0)) throw std::logic_error("conjugating_element: LDL failure");
            for (int j = k + 1; j < 4; ++j) low[k][j] = Fw[k][j] / diag[k];
            for (int i = k + 1; i < 4; ++i)
                for (int j = k + 1; j < 4; ++j) Fw[i][j] -= Fw[k][i] * Fw[k][j] / diag[k];
        }

        /* walk integral t with F(t) <= 2 outward from each level's center;
         * all bounds and the final check q(t) = 1 are exact */
        std::array<Int, 4> t{};
        std::optional<Mat2K> found;
        auto emit = [&]() {
            QuadNum val = QuadNum::zero(m);
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) val = val + q[k][l] * (Rat(t[k]) * Rat(t[l]));
            if (!(val == QuadNum::one(m))) return;
            VecR acc8(8, Rat(0));
            for (int k = 0; k < 4; ++k) {
                Rat f{t[k]};
                acc8[0] += f * Gam[k].a.u; acc8[1] += f * Gam[k].a.v;
                acc8[2] += f * Gam[k].b.u; acc8[3] += f * Gam[k].b.v;
                acc8[4] += f * Gam[k].c.u; acc8[5] += f * Gam[k].c.v;
                acc8[6] += f * Gam[k].d.u; acc8[7] += f * Gam[k].d.v;
            }
            Mat2K g = vec_to_mat(m, acc8);
            if (!sl_lambda_member(surf.disc, g, surf.genus))
                throw std::logic_error("conjugating_element: enumerated g not in SL(Lambda)");
            if (!(g * A * g.inv_unimodular() == Bt))
                throw std::logic_error("conjugating_element: g does not conjugate A to B");
            found = g;
        };
        auto level = [&](auto&& self, int k, Rat budget) -> void {
            if (found) return;
            if (k < 0) {
                emit();
                return;
            }
            Rat center(0);
            for (int j = k + 1; j < 4; ++j) center += low[k][j] * Rat(t[j]);
            Rat target = -center;
            Int t0 = round_rat(target);
            for (int dir : {1, -1}) {
                Int tk = dir == 1 ? t0 : t0 - 1;
                while (!found) {
                    Rat off = Rat(tk) + center;
                    Rat used = diag[k] * off * off;
                    if (used > budget) {
                        /* stop once past the window on this side */
                        if (dir == 1 ? Rat(tk) >= target : Rat(tk) <= target) break;
                    } else {
                        t[k] = tk;
                        self(self, k - 1, budget - used);
                    }
                    tk += dir;
                }
            }
        };
        level(level, 3, Rat(2));
        if (found) return found;
    }
    return std::nullopt;
}

}  // namespace detail

struct EllipticCounts {
    size_t n2 = 0, n3p = 0, n3m = 0;
    bool operator==(const EllipticCounts& o) const {
        return n2 == o.n2 && n3p == o.n3p && n3m == o.n3m;
    }
};

/* ------------------------------------------------------------------ */
/* L_tau and phi_tau                                                  */
/* ------------------------------------------------------------------ */

/* Compute the rank-2 module L_tau and phi_tau for the fixed point of M. */
inline void compute_phi(const Surface& surf, EllipticPoint& pt) {
    const Disc& d = surf.disc;
    long m = d.m;
    const Mat2K& M = pt.stab;
    long t = pt.stab.trace().u.get_num().get_si();
    long s = 4 - t * t; /* 3 or 4 */

    /* tau_j = p_j + i rho_j sqrt(s), j = 1,2 (second embedding via conj) */
    QuadNum amd = M.a - M.d;
    QuadNum c1 = M.c, c2 = M.c.conj();
    QuadNum p1 = amd / (c1 * QuadNum::rational(m, Rat(2)));
    QuadNum p2 = amd.conj() / (c2 * QuadNum::rational(m, Rat(2)));
    QuadNum rho1 = QuadNum::rational(m, Rat(c1.sign())) / (c1 * QuadNum::rational(m, Rat(2)));
    QuadNum rho2 = QuadNum::rational(m, Rat(c2.sign())) / (c2 * QuadNum::rational(m, Rat(2)));

    /* sqrt(D) = tD * beta with tD = 1 (D odd) or 2 (D = 4m) */
    QuadNum sqrtD{m, Rat(0), Rat(d.D == m ? 1 : 2)};
    long A = surf.genus.A;

    /* unknowns y = (a1, a2, u, v), lambda = u + v beta.
     * E1: a1 sqrtD (p1 p2 - s rho1 rho2) + (u + v b) p2 - (u - v b) p1 + a2 sqrtD / A = 0
     * E2: a1 sqrtD (p1 rho2 + p2 rho1) + (u + v b) rho2 - (u - v b) rho1 = 0 */
    QuadNum beta = QuadNum::beta(m);
    QuadNum srat = QuadNum::rational(m, Rat(s));
    std::array<std::array<QuadNum, 4>, 2> E = {{
        {sqrtD * (p1 * p2 - srat * rho1 * rho2), sqrtD * QuadNum::rational(m, Rat(1, A)),
         p2 - p1, beta * (p2 + p1)},
        {sqrtD * (p1 * rho2 + p2 * rho1), QuadNum::zero(m), rho2 - rho1,
         beta * (rho2 + rho1)},
    }};

    /* 4x4 rational system: components (u, v) of each equation. */
    detail::MatR R(4, detail::VecR(4));
    for (int e = 0; e < 2; ++e)
        for (int j = 0; j < 4; ++j) {
            R[2 * e][j] = E[e][j].u;
            R[2 * e + 1][j] = E[e][j].v;
        }
    auto piv = detail::rref(R);
    if (piv.size() != 2) throw std::logic_error("compute_phi: kernel rank != 2");

    /* Integrality lattice Z x Z x a^{-1}: y = L z, z in Z^4, with
     * L = diag(1,1, [w1 w2]) where a^{-1} = Z w1 + Z w2 in (u,v) coords. */
    QuadNum w1 = surf.genus.a_inv.z1(), w2 = surf.genus.a_inv.z2();
    std::array<std::array<Rat, 4>, 4> L{};
    L[0][0] = 1;
    L[1][1] = 1;
    L[2][2] = w1.u; L[3][2] = w1.v;
    L[2][3] = w2.u; L[3][3] = w2.v;
    /* conditions: the two pivot rows of R applied to y = L z must vanish */
    std::vector<std::vector<Rat>> C(2, std::vector<Rat>(4, Rat(0)));
    for (int e = 0; e < 2; ++e)
        for (int zj = 0; zj < 4; ++zj)
            for (int yj = 0; yj < 4; ++yj) C[e][zj] += R[e][yj] * L[yj][zj];
    /* clear denominators row-wise, take integer kernel */
    std::vector<std::vector<Int>> CI(2, std::vector<Int>(4));
    for (int e = 0; e < 2; ++e) {
        Int den = 1;
        for (int j = 0; j < 4; ++j) den = lcm(den, C[e][j].get_den());
        for (int j = 0; j < 4; ++j) {
            Rat scaled = C[e][j] * den;
            CI[e][j] = scaled.get_num();
        }
    }
    auto ker = detail::int_kernel(CI, 4);
    if (ker.size() != 2) throw std::logic_error("compute_phi: integral kernel rank != 2");

    auto mk = [&](const std::vector<Int>& z) {
        SkewHermitian B;
        B.m = m;
        std::array<Rat, 4> y{};
        for (int yj = 0; yj < 4; ++yj)
            for (int zj = 0; zj < 4; ++zj) y[yj] += L[yj][zj] * Rat(z[zj]);
        if (y[0].get_den() != 1 || y[1].get_den() != 1)
            throw std::logic_error("compute_phi: non-integral a1/a2");
        B.a1 = y[0].get_num();
        B.a2 = y[1].get_num();
        B.lambda = QuadNum{m, y[2], y[3]};
        return B;
    };
    pt.B1 = mk(ker[0]);
    pt.B2 = mk(ker[1]);

    auto phi_of = [&](const SkewHermitian& B) { return B.detA(d, A); };
    Rat f0 = phi_of(pt.B1), f2 = phi_of(pt.B2);
    Rat f1 = phi_of(pt.B1 + pt.B2) - f0 - f2;
    if (f0.get_den() != 1 || f1.get_den() != 1 || f2.get_den() != 1)
        throw std::logic_error("compute_phi: non-integral form");
    pt.phi = {f0.get_num(), f1.get_num(), f2.get_num()};
    /* positive definite */
    if (!(f0 > 0 && 4 * f0 * f2 - f1 * f1 > 0))
        throw std::logic_error("compute_phi: form not positive definite");
}

/* ------------------------------------------------------------------ */
/* Enumeration                                                        */
/* ------------------------------------------------------------------ */

class EllipticFinder {
public:
    explicit EllipticFinder(const Surface& surf) : surf_(surf), R_(surf_) {}

    /* Enumerate the elliptic points, certified against the expected per-type
     * counts.  Boxes grow until every class has appeared; classes are never
     * over-counted (conjugacy is decided exactly), so exhaustion without a
     * count match is a hard error. */
    std::vector<EllipticPoint> enumerate(const EllipticCounts& expected) {
        long m = surf_.disc.m;
        QuadNum o1 = surf_.O.z1(), o2 = surf_.O.z2();
        QuadNum g1 = surf_.genus.a.z1(), g2 = surf_.genus.a.z2();
        long prev = 0;
        EllipticCounts got;
        for (long box : {3L, 5L, 7L, 9L, 11L, 13L, 15L}) {
            for (long t : {0L, 1L}) {
                QuadNum trq = QuadNum::rational(m, Rat(t));
                for (long ci = -box; ci <= box; ++ci)
                    for (long cj = -box; cj <= box; ++cj) {
                        if (ci == 0 && cj == 0) continue;
                        QuadNum c = g1 * Rat(ci) + g2 * Rat(cj);
                        for (long ai = -box; ai <= box; ++ai)
                            for (long aj = -box; aj <= box; ++aj) {
                                if (std::max({std::labs(ci), std::labs(cj), std::labs(ai),
                                              std::labs(aj)}) <= prev)
                                    continue;
                                QuadNum a = o1 * Rat(ai) + o2 * Rat(aj);
                                QuadNum dd = trq - a;
                                QuadNum b = (a * dd - QuadNum::one(m)) / c;
                                if (!surf_.genus.a_inv.contains(b)) continue;
                                classify(R_.reduce({a, b, c, dd}));
                            }
                    }
            }
            prev = box;
            got = counts();
            if (got == expected) return finalize();
        }
        throw std::runtime_error(
            "enumerate_elliptic: incomplete enumeration for D = " +
            std::to_string(surf_.disc.D) + " (found " + std::to_string(got.n2) + "/" +
            std::to_string(got.n3p) + "/" + std::to_string(got.n3m) + ", expected " +
            std::to_string(expected.n2) + "/" + std::to_string(expected.n3p) + "/" +
            std::to_string(expected.n3m) + ")");
    }

    /* Index (into the enumerate() result) of the class of an arbitrary
     * elliptic matrix; throws if it matches none. */
    size_t match(const Mat2K& M) {
        Mat2K N = M.trace().u < 0 ? -M : M; /* trace -1 lift -> trace 1 */
        size_t cls = classify(R_.reduce(N));
        auto it = out_index_.find(cls);
        if (it == out_index_.end())
            throw std::runtime_error("EllipticFinder::match: no conjugate found");
        return it->second;
    }

private:
    /* Class index of a reduced matrix, creating a new class if it is proven
     * non-conjugate to every existing representative. */
    size_t classify(const Mat2K& N) {
        std::string key = detail::mat_key(N);
        if (auto it = key_class_.find(key); it != key_class_.end()) return it->second;
        RotType rot = rotation_type(surf_.disc, N);
        for (size_t i = 0; i < reps_.size(); ++i) {
            if (rots_[i] != rot) continue;
            if (detail::conjugating_element(surf_, N, reps_[i])) {
                key_class_[key] = i;
                return i;
            }
        }
        reps_.push_back(N);
        rots_.push_back(rot);
        key_class_[key] = reps_.size() - 1;
        return reps_.size() - 1;
    }

    EllipticCounts counts() const {
        EllipticCounts got;
        for (RotType r : rots_) {
            switch (r) {
                case RotType::two: ++got.n2; break;
                case RotType::three_plus: ++got.n3p; break;
                default: ++got.n3m; break;
            }
        }
        return got;
    }

    std::vector<EllipticPoint> finalize() {
        std::vector<std::pair<size_t, EllipticPoint>> tmp;
        for (size_t i = 0; i < reps_.size(); ++i) {
            EllipticPoint pt;
            pt.stab = reps_[i];
            pt.rot = rots_[i];
            pt.order = (pt.rot == RotType::two) ? 2 : 3;
            tmp.emplace_back(i, pt);
        }
        std::sort(tmp.begin(), tmp.end(), [&](const auto& x, const auto& y) {
            if (x.second.rot != y.second.rot)
                return static_cast<int>(x.second.rot) < static_cast<int>(y.second.rot);
            return detail::mat_key(x.second.stab) < detail::mat_key(y.second.stab);
        });
        std::vector<EllipticPoint> out;
        out_index_.clear();
        for (auto& [i, pt] : tmp) {
            compute_phi(surf_, pt);
            out_index_[i] = out.size();
            out.push_back(pt);
        }
        return out;
    }

    Surface surf_;
    detail::PointReducer R_;
    std::vector<Mat2K> reps_;
    std::vector<RotType> rots_;
    std::map<std::string, size_t> key_class_;
    std::map<size_t, size_t> out_index_;
};

inline std::vector<EllipticPoint> enumerate_elliptic(const Surface& surf,
                                                     const EllipticCounts& expected) {
    return EllipticFinder(surf).enumerate(expected);
}

}  // namespace hilb

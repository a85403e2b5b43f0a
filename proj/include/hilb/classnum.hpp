#pragma once

/*
 * Weighted class numbers h'(-n), Hurwitz sums H(n), and the twisted sums
 * H_D^o(n) used by the transversal-intersection formula:
 *
 *     h'(-n) = 0 for n = 1,2 mod 4; 1/3 at n = 3; 1/2 at n = 4;
 *              otherwise the form class number of discriminant -n.
 *     H(n)   = sum_{d^2 | n} h'(-n/d^2)
 *     H_D^o(n) = sum_{s^2 < 4n, s^2 = 4n mod D} H((4n - s^2)/D)
 */

#include "ideal.hpp"   /* kronecker_symbol */

#include <cstdlib>
#include <mutex>
#include <numeric>
#include <unordered_map>

namespace hilb {

/* Class number of primitive positive definite forms of discriminant -n, by
 * counting reduced forms (a,b,c): b^2 - 4ac = -n, |b| <= a <= c, b >= 0 if
 * a = c or |b| = a. */
inline long form_class_number(long n) {
    long count = 0;
    for (long a = 1; 3 * a * a <= n; ++a) {
        for (long b = -a; b <= a; ++b) {
            long num = b * b + n;
            if (num % (4 * a) != 0) continue;
            long c = num / (4 * a);
            if (c < a) continue;
            if ((a == c || b == -a) && b < 0) continue;  /* canonical sign */
            if (std::gcd(std::gcd(a, std::abs(b)), c) != 1) continue;
            ++count;
        }
    }
    return count;
}

inline Rat weighted_h(long n) {
    if (n <= 0) throw std::invalid_argument("weighted_h: n must be positive");
    long r = n % 4;
    if (r == 1 || r == 2) return Rat(0);
    if (n == 3) return Rat(1, 3);
    if (n == 4) return Rat(1, 2);
    static std::unordered_map<long, long> memo;
    static std::mutex mx;
    {
        std::lock_guard<std::mutex> lk(mx);
        auto it = memo.find(n);
        if (it != memo.end()) return Rat(it->second);
    }
    long h = form_class_number(n);
    {
        std::lock_guard<std::mutex> lk(mx);
        memo.emplace(n, h);
    }
    return Rat(h);
}

inline Rat hurwitz_H(long n) {
    if (n <= 0) throw std::invalid_argument("hurwitz_H: n must be positive");
    Rat total(0);
    for (long d = 1; d * d <= n; ++d)
        if (n % (d * d) == 0) total += weighted_h(n / (d * d));
    return total;
}

inline Rat hdo(const Disc& D, long n) {
    if (n <= 0) throw std::invalid_argument("hdo: n must be positive");
    Rat total(0);
    for (long s = 0; s * s < 4 * n; ++s) {
        long diff = 4 * n - s * s;
        if (diff % D.D != 0) continue;
        /* s^2 = 4n mod D and s^2 < 4n */
        Rat term = hurwitz_H(diff / D.D);
        total += term;
        if (s > 0) total += term;  /* -s */
    }
    return total;
}

inline long kronecker(long a, long n) { return kronecker_symbol(a, n); }

}  // namespace hilb

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hilb/classnum.hpp"

using namespace hilb;

/* Independent oracle: count classes of (possibly imprimitive) positive
 * definite forms of discriminant -n, weighting forms proportional to
 * x^2 + y^2 by 1/2 and to x^2 + xy + y^2 by 1/3.  This equals H(n). */
static Rat hurwitz_oracle(long n) {
    if (n % 4 == 1 || n % 4 == 2) return Rat(0);
    Rat total(0);
    for (long a = 1; 3 * a * a <= n; ++a) {
        for (long b = -a; b <= a; ++b) {
            long num = b * b + n;
            if (num % (4 * a) != 0) continue;
            long c = num / (4 * a);
            if (c < a) continue;
            if ((a == c || b == -a) && b < 0) continue;
            long g = std::gcd(std::gcd(a, std::abs(b)), c);
            long ra = a / g, rb = b / g, rc = c / g;
            if (ra == rc && rb == 0) total += Rat(1, 2);        /* a(x^2+y^2)   */
            else if (ra == rb && rb == rc) total += Rat(1, 3);  /* a(x^2+xy+y^2)*/
            else total += 1;
        }
    }
    return total;
}

TEST_CASE("weighted_h special values and vanishing") {
    CHECK(weighted_h(3) == Rat(1, 3));
    CHECK(weighted_h(4) == Rat(1, 2));
    CHECK(weighted_h(23) == Rat(3));
    CHECK(weighted_h(1) == Rat(0));
    CHECK(weighted_h(2) == Rat(0));
    CHECK(weighted_h(5) == Rat(0));
    CHECK_THROWS(weighted_h(0));
    CHECK_THROWS(weighted_h(-3));
    for (long n = 1; n <= 200; ++n) {
        Rat h = weighted_h(n);
        if (n % 4 == 1 || n % 4 == 2) {
            CHECK(h == Rat(0));
        } else {
            CHECK(h > 0);
            CHECK(Rat(Rat(6) * h).get_den() == 1);
        }
    }
}

TEST_CASE("hurwitz_H against brute-force weighted counting, n <= 500") {
    CHECK(hurwitz_H(3) == Rat(1, 3));
    CHECK(hurwitz_H(4) == Rat(1, 2));
    CHECK(hurwitz_H(12) == Rat(4, 3));
    for (long n = 1; n <= 500; ++n)
        CHECK(hurwitz_H(n) == hurwitz_oracle(n));
    CHECK_THROWS(hurwitz_H(0));
}

TEST_CASE("hdo examples") {
    auto d29 = Disc::make(29);
    CHECK(hdo(d29, 1) == Rat(0));  /* s^2 < 4 and s^2 = 4 mod 29: empty */
    auto d21 = Disc::make(21);
    /* oracle: direct loop */
    Rat expect(0);
    for (long s = -18; s <= 18; ++s) {
        long diff = 84 - s * s;
        if (diff > 0 && diff % 21 == 0) expect += hurwitz_H(diff / 21);
    }
    CHECK(hdo(d21, 21) == expect);
    CHECK(hdo(d21, 21) > 0);
    CHECK_THROWS(hdo(d21, 0));
}

TEST_CASE("kronecker symbol") {
    CHECK(kronecker(5, 19) == 1);
    CHECK(kronecker(1, 1) == 1);
    CHECK(kronecker(-11, 1) == 1);
    CHECK(kronecker(5, 2) == -1);
    CHECK(kronecker(2, 7) == 1);
    CHECK(kronecker(2, 3) == -1);
    CHECK(kronecker(-7, 29) == 1);   /* 29 = 1 mod 7 (QR), 29 = 1 mod 4 */
    CHECK(kronecker(6, 3) == 0);
    CHECK_THROWS(kronecker(0, 0));

    /* Legendre oracle via Euler's criterion, odd primes <= 1000 */
    auto is_prime = [](long p) {
        if (p < 2) return false;
        for (long q = 2; q * q <= p; ++q)
            if (p % q == 0) return false;
        return true;
    };
    auto powmod = [](long b, long e, long mod) {
        long r = 1;
        b %= mod;
        if (b < 0) b += mod;
        while (e) {
            if (e & 1) r = r * b % mod;
            b = b * b % mod;
            e >>= 1;
        }
        return r;
    };
    for (long p = 3; p <= 1000; p += 2) {
        if (!is_prime(p)) continue;
        for (long a : {-10L, -7L, -3L, -1L, 2L, 3L, 5L, 10L, 17L, 30L}) {
            long e = powmod(a, (p - 1) / 2, p);
            long leg = (e == 0) ? 0 : (e == 1 ? 1 : -1);
            CHECK(kronecker(a, p) == leg);
        }
    }

    /* complete multiplicativity spot checks */
    for (long a = -20; a <= 20; ++a)
        for (long b = -20; b <= 20; ++b)
            for (long n : {15L, 21L, 35L, 9L})
                CHECK(kronecker(a * b, n) == kronecker(a, n) * kronecker(b, n));
    for (long a : {-7L, -3L, 2L, 5L, 11L})
        for (long n1 = 1; n1 <= 15; ++n1)
            for (long n2 = 1; n2 <= 15; ++n2)
                CHECK(kronecker(a, n1 * n2) == kronecker(a, n1) * kronecker(a, n2));
}

#include "pgt/arith.hpp"

#include <cassert>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pgt::arith {

Factorization factorize(int64_t n) {
    if (n < 1) throw std::invalid_argument("factorize: n must be >= 1");
    Factorization f;
    f.n = n;
    for (int64_t p = 2; p * p <= n; p += (p == 2) ? 1 : 2) {
        if (n % p != 0) continue;
        int e = 0;
        while (n % p == 0) { n /= p; ++e; }
        f.factors.emplace_back(p, e);
    }
    if (n > 1) f.factors.emplace_back(n, 1);
    return f;
}

int mobius(int64_t n) {
    Factorization f = factorize(n);
    for (const auto& [p, e] : f.factors)
        if (e > 1) return 0;
    return (f.factors.size() % 2 == 0) ? 1 : -1;
}

int kronecker(int64_t a, int64_t n) {
    if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
    if (a % 2 == 0 && n % 2 == 0) return 0;
    int k = 1;
    // strip the even part of n; (a/2) depends on a mod 8
    int v2 = 0;
    while (n % 2 == 0) { n /= 2; ++v2; }
    if (v2 % 2 == 1) {
        int64_t am8 = ((a % 8) + 8) % 8;
        if (am8 == 3 || am8 == 5) k = -k;
    }
    if (n < 0) {
        n = -n;
        if (a < 0) k = -k;
    }
    // Jacobi symbol (a/n) with n odd positive
    a %= n;
    if (a < 0) a += n;
    while (a != 0) {
        while (a % 2 == 0) {
            a /= 2;
            int64_t nm8 = n % 8;
            if (nm8 == 3 || nm8 == 5) k = -k;
        }
        std::swap(a, n);
        if (a % 4 == 3 && n % 4 == 3) k = -k;
        a %= n;
    }
    return (n == 1) ? k : 0;
}

int valuation(int64_t p, int64_t n) {
    if (p < 2) throw std::invalid_argument("valuation: p must be prime");
    if (n == 0) throw std::invalid_argument("valuation: n must be nonzero");
    if (n < 0) n = -n;
    int k = 0;
    while (n % p == 0) { n /= p; ++k; }
    return k;
}

std::pair<int64_t, int64_t> squarefree_decompose(int64_t q) {
    Factorization f = factorize(q);
    int64_t b = 1, c = 1;
    for (const auto& [p, e] : f.factors) {
        if (e % 2 == 1) b *= p;
        for (int i = 0; i < e / 2; ++i) c *= p;
    }
    return {b, c};
}

double kloosterman(int64_t m, int64_t n, int64_t c) {
    if (c < 1) throw std::invalid_argument("kloosterman: c must be >= 1");
    m = ((m % c) + c) % c;
    n = ((n % c) + c) % c;
    double re = 0.0, im = 0.0;
    const double w = 2.0 * std::numbers::pi / static_cast<double>(c);
    for (int64_t x = 0; x < c; ++x) {
        if (std::gcd(x, c) != 1) continue;
        int64_t xinv = mod_inverse(x, c);
        int64_t num = (mulmod(m, x, c) + mulmod(n, xinv, c)) % c;
        re += std::cos(w * static_cast<double>(num));
        im += std::sin(w * static_cast<double>(num));
    }
    if (std::abs(im) >= 1e-9)
        throw std::logic_error("kloosterman: imaginary part failed to cancel");
    return re;
}

int64_t mod_inverse(int64_t x, int64_t c) {
    if (c < 1) throw std::invalid_argument("mod_inverse: c must be >= 1");
    if (c == 1) return 0;
    x = ((x % c) + c) % c;
    // extended Euclid on (x, c)
    int64_t r0 = x, r1 = c, s0 = 1, s1 = 0;
    while (r1 != 0) {
        int64_t q = r0 / r1;
        r0 -= q * r1; std::swap(r0, r1);
        s0 -= q * s1; std::swap(s0, s1);
    }
    if (r0 != 1)
        throw std::domain_error("mod_inverse: arguments are not coprime");
    return ((s0 % c) + c) % c;
}

int64_t isqrt(int64_t n) {
    if (n < 0) throw std::invalid_argument("isqrt: negative input");
    auto r = static_cast<int64_t>(std::sqrt(static_cast<long double>(n)));
    while (r > 0 && r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

bool is_perfect_square(int64_t n) {
    if (n < 0) return false;
    int64_t r = isqrt(n);
    return r * r == n;
}

bool is_prime(int64_t n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (int64_t p = 3; p * p <= n; p += 2)
        if (n % p == 0) return false;
    return true;
}

std::vector<int64_t> primes_up_to(int64_t n) {
    std::vector<int64_t> primes;
    if (n < 2) return primes;
    std::vector<bool> composite(static_cast<size_t>(n) + 1, false);
    for (int64_t i = 2; i <= n; ++i) {
        if (composite[static_cast<size_t>(i)]) continue;
        primes.push_back(i);
        for (int64_t j = i * i; j <= n; j += i) composite[static_cast<size_t>(j)] = true;
    }
    return primes;
}

int64_t powmod(int64_t a, int64_t e, int64_t m) {
    a = ((a % m) + m) % m;
    int64_t r = 1 % m;
    while (e > 0) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

int64_t sqrt_mod_prime(int64_t a, int64_t p) {
    a = ((a % p) + p) % p;
    if (a == 0) return 0;
    if (p == 2) return a;
    assert(powmod(a, (p - 1) / 2, p) == 1);
    if (p % 4 == 3) return powmod(a, (p + 1) / 4, p);
    // Tonelli-Shanks: p - 1 = q * 2^s with q odd
    int64_t q = p - 1;
    int s = 0;
    while (q % 2 == 0) { q /= 2; ++s; }
    int64_t z = 2;
    while (powmod(z, (p - 1) / 2, p) != p - 1) ++z;
    int64_t m = s;
    int64_t c = powmod(z, q, p);
    int64_t t = powmod(a, q, p);
    int64_t r = powmod(a, (q + 1) / 2, p);
    while (t != 1) {
        int64_t i = 0, tt = t;
        while (tt != 1) { tt = mulmod(tt, tt, p); ++i; }
        int64_t b = powmod(c, int64_t(1) << (m - i - 1), p);
        m = i;
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        r = mulmod(r, b, p);
    }
    return r;
}

std::vector<int32_t> smallest_prime_factor_table(int64_t n) {
    std::vector<int32_t> spf(static_cast<size_t>(n) + 1, 0);
    for (int64_t i = 2; i <= n; ++i) {
        if (spf[static_cast<size_t>(i)] != 0) continue;
        for (int64_t j = i; j <= n; j += i)
            if (spf[static_cast<size_t>(j)] == 0) spf[static_cast<size_t>(j)] = static_cast<int32_t>(i);
    }
    return spf;
}

}  // namespace pgt::arith

#pragma once

// Exact integer and character primitives shared by every other module:
// factorization, Moebius, Kronecker symbols, p-adic valuations, squarefree
// decomposition, Kloosterman sums and modular inverses.

#include <cstdint>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace pgt::arith {

using Rational = mpq_class;

struct Factorization {
    int64_t n = 1;
    // (prime, exponent) pairs, primes strictly increasing, exponents >= 1.
    std::vector<std::pair<int64_t, int>> factors;
};

// Complete prime factorization by trial division; n >= 1.
Factorization factorize(int64_t n);

// Moebius function mu(n) in {-1, 0, 1}; n >= 1.
int mobius(int64_t n);

// Full Kronecker symbol (D/n), defined for all integers n (including n <= 0).
// For odd prime n and D coprime to n this is the Legendre symbol.
int kronecker(int64_t D, int64_t n);

// Largest k with p^k | n; p prime, n != 0.  Sign of n is ignored.
int valuation(int64_t p, int64_t n);

// Unique decomposition q = b*c^2 with b squarefree; q >= 1.  Returns (b, c).
std::pair<int64_t, int64_t> squarefree_decompose(int64_t q);

// Kloosterman sum S(m, n; c) = sum over units x mod c of e((m x + n x~)/c),
// evaluated by direct complex summation.  The imaginary part cancels; it is
// asserted to be below 1e-9 and the real part is returned.
double kloosterman(int64_t m, int64_t n, int64_t c);

// Inverse of x mod c, in [0, c).  Throws std::domain_error if gcd(x, c) != 1.
int64_t mod_inverse(int64_t x, int64_t c);

// ---- shared helpers ------------------------------------------------------

// floor(sqrt(n)) for n >= 0, exact.
int64_t isqrt(int64_t n);

bool is_perfect_square(int64_t n);

// Deterministic primality test (trial division; desk-scale inputs).
bool is_prime(int64_t n);

// All primes <= n, ascending.
std::vector<int64_t> primes_up_to(int64_t n);

// floor division for possibly negative numerators.
inline int64_t floordiv(int64_t a, int64_t b) {
    int64_t q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

inline int64_t mulmod(int64_t a, int64_t b, int64_t m) {
    return static_cast<int64_t>(static_cast<__int128>(a) * b % m);
}

int64_t powmod(int64_t a, int64_t e, int64_t m);

// A square root of a mod p (odd prime, (a/p) = 1), via Tonelli-Shanks.
int64_t sqrt_mod_prime(int64_t a, int64_t p);

// Smallest-prime-factor table for [0, n]; spf[0] = spf[1] = 0.
std::vector<int32_t> smallest_prime_factor_table(int64_t n);

}  // namespace pgt::arith

#pragma once

// The L-series L(s, delta) attached to a positive discriminant delta:
// integer coefficients lambda_q(delta) by two independent routes (Euler
// product and exponential sums), the value at s = 1, the variant with the
// Euler factor at one prime removed, and an exponentially smoothed partial
// sum used as a diagnostic.

#include <cstdint>
#include <stdexcept>

#include "pgt/quadratic.hpp"

namespace pgt::zagier {

// Raised when the floating-point exponential-sum route fails to land on an
// integer within tolerance (numerical breakdown, q too large for doubles).
class RoundingError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Local data at one prime: v = v_p(l) and chi = chi_D(p) for delta = D l^2.
struct LocalFactorSpec {
    int64_t prime = 2;
    int v = 0;
    int chi = 0;
};

// Coefficient of p^{-m s} in the local factor at spec.prime: p^j at index
// 2j for j < v, and p^v chi^i at index 2v + i for i >= 0.
int64_t lambda_local(const LocalFactorSpec& spec, int m);

// lambda_q(delta) as the product of local coefficients over p^e || q.
int64_t lambda_q_euler(int64_t q, const quadratic::Discriminant& delta);

// The series for one discriminant, with coefficient access by index.
// q -> lambda_q(delta) is multiplicative and integer-valued, lambda_1 = 1.
struct ZagierSeries {
    quadratic::Discriminant delta;

    int64_t coefficient(int64_t q) const { return lambda_q_euler(q, delta); }
};

// The same integer for delta = t^2 - 4, via
//   lambda_q = sum over q1^2 q2 = q of (1/q2) sum_k e(k t / q2) S(k^2, 1; q2),
// evaluated in doubles and rounded; throws RoundingError beyond 1e-5.
int64_t lambda_q_expsum(int64_t q, int64_t t);

// L(1, chi_D) for the primitive real character of fundamental D > 1, by the
// finite log-sin formula (O(D) terms).
double l1_fundamental(int64_t D);

// L(1, chi_delta) for the induced (possibly imprimitive) character.
double l1_chi_delta(const quadratic::Discriminant& delta);

// L(1, delta) = sum over u | l of L(1, chi_{delta/u^2}) / u.
double l1_zagier(const quadratic::Discriminant& delta);

// The local Euler factor of L(s, delta) at p, evaluated at real s.
double euler_factor_at_p(const quadratic::Discriminant& delta, int64_t p, double s);

// L^p(1, delta): the value with the Euler factor at p removed.
double lp1_zagier(const quadratic::Discriminant& delta, int64_t p);

// Smoothed partial sum over q coprime to p of lambda_q(delta)/q * e^{-q/V},
// truncated once e^{-q/V} < 1e-12, summed in ascending q.  A diagnostic
// quantity (used by verify-prop22 and tests), not a production value.
double lambda_v_p(const quadratic::Discriminant& delta, int64_t p, double V);

}  // namespace pgt::zagier

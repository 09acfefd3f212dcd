#pragma once

// Counting functions over closed-geodesic norms on the modular surface:
// psi(x), the restriction psi_ap(x; p, a) to traces in a residue class, the
// independent L-series route psi_ap_zagier, the Euler-factor-removed variant
// psi_star, the valuation pieces psi_piece, and the predicted main-term
// densities.

#include <cstdint>
#include <vector>

#include "pgt/arith.hpp"
#include "pgt/quadratic.hpp"

namespace pgt::geodesics {

// Norms <= x correspond exactly to traces 3 <= t <= X = sqrt(x) + 1/sqrt(x).
struct TraceWindow {
    double x = 0.0;
    double X = 0.0;
    int64_t t_min = 3;
    int64_t t_max = 2;  // < 3 means the window is empty

    bool empty() const { return t_max < t_min; }
};

TraceWindow trace_window(double x);

// ((t + sqrt(t^2 - 4)) / 2)^2, the norm of a class of trace t >= 3.
double norm_of_trace(int64_t t);

struct DensityPrediction {
    int64_t p = 0;
    int64_t a = 0;
    int symbol = 0;               // Legendre symbol of a^2 - 4 mod p
    arith::Rational density = 0;  // 1/(p-1), 1/(p+1) or p/(p^2-1)
};

// Exact main-term density of the residue class a mod p; p an odd prime.
DensityPrediction predicted_density(int64_t p, int64_t a);

enum class Parity { odd, even };

// Coefficient of x in the valuation piece k = 2n-1 (odd) or k = 2n (even):
// p^{1-2n} - p^{1-3n}, resp. p^{-2n} - p^{-3n}/(p+1), as an exact rational.
arith::Rational predicted_piece_coefficient(int64_t p, int n, Parity parity);

// Evaluates the counting functions.  Per-trace weights are tabulated once
// and reused across queries; class records go through the attached store.
// Sums are accumulated error-free in 128-bit fixed point, so results do not
// depend on the worker count (workers only parallelize table building).
class GeodesicCounter {
  public:
    explicit GeodesicCounter(quadratic::ClassRecordStore& store, int workers = 1);

    // 2 sum over traces t <= X of sum over d u^2 = t^2-4 of h(d) log eps_d.
    double psi(double x);

    // psi restricted to traces t == a (mod p).
    double psi_ap(double x, int64_t p, int64_t a);

    // The same quantity via per-trace values 2 sqrt(t^2-4) L(1, t^2-4);
    // needs O(sqrt(x)) L-evaluations of size O(x), capped at x <= 1e7.
    double psi_ap_zagier(double x, int64_t p, int64_t a);

    // 2 sum over t == r (mod p^n) of sqrt(t^2-4) L^p(1, t^2-4); same cap.
    double psi_star(double x, int64_t p, int n, int64_t r);

    // Valuation piece: traces with v_p(t - a~) = k for a~ in {2, -2},
    // a == a~ (mod p).  Same per-trace weights as psi_ap, regrouped.
    double psi_piece(double x, int64_t p, int64_t a, int k);

    int workers() const { return workers_; }
    void set_workers(int workers);

    quadratic::ClassRecordStore& store() { return store_; }

  private:
    void ensure_discriminants(int64_t t_max);
    void ensure_record_weights(int64_t t_max);
    void ensure_zagier_weights(int64_t t_max);

    quadratic::ClassRecordStore& store_;
    int workers_;
    std::vector<quadratic::Discriminant> disc_;  // index by trace
    std::vector<double> w_rec_;                  // 2 sum h(d) log eps_d
    std::vector<double> w_zag_;                  // 2 sqrt(t^2-4) L(1, t^2-4)
    int64_t disc_tmax_ = 2;
    int64_t rec_tmax_ = 2;
    int64_t zag_tmax_ = 2;
};

}  // namespace pgt::geodesics

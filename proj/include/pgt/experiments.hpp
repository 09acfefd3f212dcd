#pragma once

// Empirical verification harness: density convergence tables, residue-class
// census, main-term checks for the coefficient sums and the smoothed
// difference, error-exponent regression, CSV emission.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "pgt/geodesics.hpp"

namespace pgt::experiments {

// One (x, a) cell of a density run.  Aggregate rows over a whole symbol
// class use a = -3 / -2 / -1 for the classes +1 / -1 / 0 (the symbol column
// carries the class), so rows still sort by (x asc, a asc).
struct CountReport {
    double x = 0.0;
    int64_t p = 0;
    int64_t a = 0;
    int symbol = 0;
    double psi_value = 0.0;
    double predicted = 0.0;
    double abs_dev = 0.0;
    double rel_dev = 0.0;
    std::optional<double> fitted_exponent;

    bool is_aggregate() const { return a < 0; }
};

constexpr int64_t kAggregatePlus = -3;
constexpr int64_t kAggregateMinus = -2;
constexpr int64_t kAggregateZero = -1;

struct ResidueClassCensus {
    int64_t p = 0;
    int64_t count_plus = 0;
    int64_t count_minus = 0;
    int64_t count_zero = 0;
};

// Exact counts of residues a mod p by the Legendre symbol of a^2 - 4.
ResidueClassCensus census(int64_t p);

// One CountReport per (x, a), plus the three per-class aggregate rows per x
// (densities (p-3)/(2(p-1)), (p-1)/(2(p+1)), 2p/(p^2-1)).  x_values must be
// ascending.  Progress lines go to *progress when non-null.
std::vector<CountReport> density_table(const std::vector<double>& x_values, int64_t p,
                                       geodesics::GeodesicCounter& counter, std::ostream* progress = nullptr);

struct Prop21Result {
    double lhs = 0.0;        // sum of lambda_q(t^2-4) over 3 <= t <= X, t == r (mod p^n)
    double main_term = 0.0;  // (X/p^n) mu(b)/b with q = b c^2, b squarefree
    double deviation = 0.0;
};

Prop21Result prop21_check(int64_t p, int n, int64_t r, int64_t q, double X);

struct Prop22Report {
    double x = 0.0, u = 0.0;
    int64_t p = 0;
    int n = 1;
    int64_t r = 0;
    double V = 0.0;
    double direct_diff = 0.0;    // psi_star(x+u) - psi_star(x)
    double smoothed_diff = 0.0;  // 2 sum of t * lambda_v_p(t^2-4, p, V)
    double target = 0.0;         // u / p^n
};

// Computes the psi_star increment over [x, x+u] both directly and through
// the smoothed sum with V = u x^{theta - 1/2} (or the given V), against the
// expected u/p^n.  Requires sqrt(x) <= u <= x.
Prop22Report prop22_check(double x, double u, int64_t p, int n, int64_t r, std::optional<double> V, double theta,
                          geodesics::GeodesicCounter& counter);

struct ExponentFit {
    double slope = 0.0;
    double residual = 0.0;  // rms residual of the least-squares line
    int points = 0;
};

// Least-squares slope of log|psi - predicted| against log x over rows with
// the same (p, a); rows with zero deviation are skipped.  Returns nullopt
// when fewer than two usable points remain.  Diagnostic only.
std::optional<ExponentFit> error_exponent_fit(std::span<const CountReport> reports);

// CSV with header "x,p,a,symbol,psi,predicted,abs_dev,rel_dev", floats at 12
// significant digits, rows ordered by (x asc, a asc).
void emit_csv(std::span<const CountReport> reports, const std::filesystem::path& path);

// gnuplot-style "log x  log |dev|" pairs for the non-aggregate rows, grouped
// into blank-line-separated blocks per residue.
void emit_logdev(std::span<const CountReport> reports, const std::filesystem::path& path);

}  // namespace pgt::experiments

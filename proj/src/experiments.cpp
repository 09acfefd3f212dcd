#include "pgt/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "pgt/zagier.hpp"

namespace pgt::experiments {

namespace {

void require_odd_prime(const char* who, int64_t p) {
    if (p < 3 || p % 2 == 0 || !arith::is_prime(p))
        throw std::invalid_argument(std::string(who) + ": p must be an odd prime, got " + std::to_string(p));
}

std::string fmt12(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

ResidueClassCensus census(int64_t p) {
    require_odd_prime("census", p);
    ResidueClassCensus out;
    out.p = p;
    for (int64_t a = 0; a < p; ++a) {
        switch (arith::kronecker(a * a - 4, p)) {
            case 1: ++out.count_plus; break;
            case -1: ++out.count_minus; break;
            default: ++out.count_zero; break;
        }
    }
    return out;
}

std::vector<CountReport> density_table(const std::vector<double>& x_values, int64_t p,
                                       geodesics::GeodesicCounter& counter, std::ostream* progress) {
    require_odd_prime("density_table", p);
    if (x_values.empty()) throw std::invalid_argument("density_table: x_values must be nonempty");
    if (!std::is_sorted(x_values.begin(), x_values.end()))
        throw std::invalid_argument("density_table: x_values must be ascending");

    std::vector<CountReport> reports;
    reports.reserve(x_values.size() * static_cast<std::size_t>(p + 3));
    for (double x : x_values) {
        double agg_psi[3] = {0.0, 0.0, 0.0};  // indexed by symbol class +1 / -1 / 0
        for (int64_t a = 0; a < p; ++a) {
            geodesics::DensityPrediction pred = geodesics::predicted_density(p, a);
            CountReport row;
            row.x = x;
            row.p = p;
            row.a = a;
            row.symbol = pred.symbol;
            row.psi_value = counter.psi_ap(x, p, a);
            row.predicted = pred.density.get_d() * x;
            row.abs_dev = std::abs(row.psi_value - row.predicted);
            row.rel_dev = row.predicted > 0.0 ? row.abs_dev / row.predicted : 0.0;
            reports.push_back(row);
            int cls = pred.symbol == 1 ? 0 : (pred.symbol == -1 ? 1 : 2);
            agg_psi[cls] += row.psi_value;
        }
        const struct {
            int64_t a;
            int symbol;
            arith::Rational density;
        } classes[3] = {
            {kAggregatePlus, 1, arith::Rational(p - 3, 2 * (p - 1))},
            {kAggregateMinus, -1, arith::Rational(p - 1, 2 * (p + 1))},
            {kAggregateZero, 0, arith::Rational(2 * p, p * p - 1)},
        };
        for (const auto& cls : classes) {
            CountReport row;
            row.x = x;
            row.p = p;
            row.a = cls.a;
            row.symbol = cls.symbol;
            row.psi_value = agg_psi[cls.symbol == 1 ? 0 : (cls.symbol == -1 ? 1 : 2)];
            arith::Rational density = cls.density;
            density.canonicalize();
            row.predicted = density.get_d() * x;
            row.abs_dev = std::abs(row.psi_value - row.predicted);
            row.rel_dev = row.predicted > 0.0 ? row.abs_dev / row.predicted : 0.0;
            reports.push_back(row);
        }
        if (progress)
            (*progress) << "density_table: p=" << p << " x=" << fmt12(x) << " done\n";
    }
    std::sort(reports.begin(), reports.end(), [](const CountReport& lhs, const CountReport& rhs) {
        return lhs.x != rhs.x ? lhs.x < rhs.x : lhs.a < rhs.a;
    });
    return reports;
}

Prop21Result prop21_check(int64_t p, int n, int64_t r, int64_t q, double X) {
    require_odd_prime("prop21_check", p);
    if (n < 1) throw std::invalid_argument("prop21_check: n must be >= 1");
    if (q < 1 || q % p == 0) throw std::invalid_argument("prop21_check: q must be >= 1 and coprime to p");
    int64_t pn = 1;
    for (int i = 0; i < n; ++i) pn *= p;
    if (r < 0 || r >= pn) throw std::invalid_argument("prop21_check: residue out of range");
    auto t_max = static_cast<int64_t>(std::floor(X));
    int64_t t0 = r < 3 ? r + pn * ((3 - r + pn - 1) / pn) : r;  // first t >= 3 with t == r (mod pn)
    int64_t lhs = 0;
    for (int64_t t = t0; t <= t_max; t += pn)
        lhs += zagier::lambda_q_euler(q, quadratic::discriminant_for_trace(t));
    auto [b, c] = arith::squarefree_decompose(q);
    Prop21Result out;
    out.lhs = static_cast<double>(lhs);
    out.main_term = X / static_cast<double>(pn) * static_cast<double>(arith::mobius(b)) / static_cast<double>(b);
    out.deviation = out.lhs - out.main_term;
    return out;
}

Prop22Report prop22_check(double x, double u, int64_t p, int n, int64_t r, std::optional<double> V, double theta,
                          geodesics::GeodesicCounter& counter) {
    require_odd_prime("prop22_check", p);
    if (n < 1) throw std::invalid_argument("prop22_check: n must be >= 1");
    if (!(u >= std::sqrt(x) && u <= x))
        throw std::invalid_argument("prop22_check: need sqrt(x) <= u <= x");
    int64_t pn = 1;
    for (int i = 0; i < n; ++i) pn *= p;
    if (r < 0 || r >= pn) throw std::invalid_argument("prop22_check: residue out of range");

    Prop22Report rep;
    rep.x = x;
    rep.u = u;
    rep.p = p;
    rep.n = n;
    rep.r = r;
    rep.V = V ? *V : u * std::pow(x, theta - 0.5);
    rep.target = u / static_cast<double>(pn);
    rep.direct_diff = counter.psi_star(x + u, p, n, r) - counter.psi_star(x, p, n, r);

    geodesics::TraceWindow lo = geodesics::trace_window(x);
    geodesics::TraceWindow hi = geodesics::trace_window(x + u);
    double smoothed = 0.0;
    for (int64_t t = lo.t_max + 1; t <= hi.t_max; ++t) {
        if (t % pn != r) continue;
        quadratic::Discriminant disc = quadratic::discriminant_for_trace(t);
        smoothed += static_cast<double>(t) * zagier::lambda_v_p(disc, p, rep.V);
    }
    rep.smoothed_diff = 2.0 * smoothed;
    return rep;
}

std::optional<ExponentFit> error_exponent_fit(std::span<const CountReport> reports) {
    if (reports.size() < 4)
        throw std::invalid_argument("error_exponent_fit: need at least 4 reports");
    std::vector<double> xs;
    for (const CountReport& rep : reports) {
        if (rep.p != reports.front().p || rep.a != reports.front().a)
            throw std::invalid_argument("error_exponent_fit: reports must share (p, a)");
        xs.push_back(rep.x);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    if (xs.size() < 4 || xs.back() < 100.0 * xs.front())
        throw std::invalid_argument("error_exponent_fit: need >= 4 distinct x spanning >= 2 decades");

    std::vector<std::pair<double, double>> pts;
    for (const CountReport& rep : reports)
        if (rep.abs_dev > 0.0) pts.emplace_back(std::log(rep.x), std::log(rep.abs_dev));
    if (pts.size() < 2) return std::nullopt;

    double n = static_cast<double>(pts.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [lx, ly] : pts) {
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) return std::nullopt;
    ExponentFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.points = static_cast<int>(pts.size());
    double intercept = (sy - fit.slope * sx) / n;
    double ss = 0.0;
    for (auto [lx, ly] : pts) {
        double resid = ly - (fit.slope * lx + intercept);
        ss += resid * resid;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

void emit_csv(std::span<const CountReport> reports, const std::filesystem::path& path) {
    std::vector<CountReport> ordered(reports.begin(), reports.end());
    std::sort(ordered.begin(), ordered.end(), [](const CountReport& lhs, const CountReport& rhs) {
        return lhs.x != rhs.x ? lhs.x < rhs.x : lhs.a < rhs.a;
    });
    std::ofstream out(path, std::ios::trunc);
    if (!out.is_open()) throw std::runtime_error("emit_csv: cannot open " + path.string());
    out << "x,p,a,symbol,psi,predicted,abs_dev,rel_dev\n";
    for (const CountReport& rep : ordered) {
        out << fmt12(rep.x) << ',' << rep.p << ',' << rep.a << ',' << rep.symbol << ',' << fmt12(rep.psi_value)
            << ',' << fmt12(rep.predicted) << ',' << fmt12(rep.abs_dev) << ',' << fmt12(rep.rel_dev) << '\n';
    }
    if (!out) throw std::runtime_error("emit_csv: write failed for " + path.string());
}

void emit_logdev(std::span<const CountReport> reports, const std::filesystem::path& path) {
    std::vector<CountReport> ordered;
    for (const CountReport& rep : reports)
        if (!rep.is_aggregate() && rep.abs_dev > 0.0) ordered.push_back(rep);
    std::sort(ordered.begin(), ordered.end(), [](const CountReport& lhs, const CountReport& rhs) {
        return lhs.a != rhs.a ? lhs.a < rhs.a : lhs.x < rhs.x;
    });
    std::ofstream out(path, std::ios::trunc);
    if (!out.is_open()) throw std::runtime_error("emit_logdev: cannot open " + path.string());
    int64_t last_a = -1;
    bool first = true;
    for (const CountReport& rep : ordered) {
        if (!first && rep.a != last_a) out << '\n';  // blank line between residue blocks
        out << fmt12(std::log(rep.x)) << ' ' << fmt12(std::log(rep.abs_dev)) << '\n';
        last_a = rep.a;
        first = false;
    }
    if (!out) throw std::runtime_error("emit_logdev: write failed for " + path.string());
}

}  // namespace pgt::experiments

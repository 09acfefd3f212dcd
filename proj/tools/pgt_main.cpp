// pgt: counting closed geodesics on the modular surface by the residue class
// of their trace, with density verification and arithmetic cross-checks.
//
// Exit codes: 0 success, 1 computation error, 2 usage error, 3 strict-mode
// acceptance breach.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pgt/arith.hpp"
#include "pgt/experiments.hpp"
#include "pgt/geodesics.hpp"
#include "pgt/quadratic.hpp"
#include "pgt/zagier.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitComputation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitStrictBreach = 3;

std::string fmt12(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// --cache flag if given, else the PGT_CACHE_PATH environment variable.
std::optional<std::filesystem::path> cache_path(const std::string& flag) {
    if (!flag.empty()) return std::filesystem::path(flag);
    if (const char* env = std::getenv("PGT_CACHE_PATH"); env && *env) return std::filesystem::path(env);
    return std::nullopt;
}

pgt::quadratic::ClassRecordStore make_store(const std::string& cache_flag) {
    if (auto path = cache_path(cache_flag)) return pgt::quadratic::ClassRecordStore(*path);
    return pgt::quadratic::ClassRecordStore();
}

int check_odd_prime(int64_t p) {
    if (p == 2) {
        std::cerr << "error: p = 2 is not supported; the main term splits by residue class only for odd primes p >= 3\n";
        return kExitUsage;
    }
    if (p < 3 || !pgt::arith::is_prime(p)) {
        std::cerr << "error: p must be an odd prime >= 3, got " << p << "\n";
        return kExitUsage;
    }
    return kExitOk;
}

std::vector<double> parse_x_list(const std::string& text) {
    std::vector<double> xs;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (item.empty()) throw CLI::ValidationError("--x-list", "empty entry in x list");
        std::size_t used = 0;
        double v = std::stod(item, &used);
        if (used != item.size()) throw CLI::ValidationError("--x-list", "bad number: " + item);
        xs.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return xs;
}

struct CommonOpts {
    std::string cache;
    int workers = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--cache", opts.cache, "class-record cache file (default: $PGT_CACHE_PATH, else in-memory)");
    cmd->add_option("--workers", opts.workers, "worker threads for table building")->check(CLI::PositiveNumber);
}

int cmd_count(double x, int64_t p, int64_t a, bool have_p, bool have_a, const CommonOpts& opts) {
    if (have_p != have_a) {
        std::cerr << "error: --p and --a must be given together\n";
        return kExitUsage;
    }
    auto store = make_store(opts.cache);
    pgt::geodesics::GeodesicCounter counter(store, opts.workers);
    if (!have_p) {
        double psi = counter.psi(x);
        std::cout << "x=" << fmt12(x) << " psi=" << fmt12(psi) << " predicted=" << fmt12(x)
                  << " rel_dev=" << fmt12(x > 0 ? std::abs(psi - x) / x : 0.0) << "\n";
        return kExitOk;
    }
    if (int rc = check_odd_prime(p); rc != kExitOk) return rc;
    if (a < 0 || a >= p) {
        std::cerr << "error: --a must lie in [0, p)\n";
        return kExitUsage;
    }
    auto pred = pgt::geodesics::predicted_density(p, a);
    double psi = counter.psi_ap(x, p, a);
    double predicted = pred.density.get_d() * x;
    double abs_dev = std::abs(psi - predicted);
    std::cout << "x=" << fmt12(x) << " p=" << p << " a=" << a << " symbol=" << pred.symbol << " psi=" << fmt12(psi)
              << " predicted=" << fmt12(predicted) << " abs_dev=" << fmt12(abs_dev)
              << " rel_dev=" << fmt12(predicted > 0 ? abs_dev / predicted : 0.0) << "\n";
    return kExitOk;
}

int cmd_verify_theorem(const std::string& x_list, int64_t p, const std::string& out, const std::string& logdev_out,
                       bool strict, double max_rel_dev, const CommonOpts& opts) {
    if (int rc = check_odd_prime(p); rc != kExitOk) return rc;
    std::vector<double> xs = parse_x_list(x_list);
    if (xs.size() < 2) {
        std::cerr << "error: --x-list needs at least 2 entries\n";
        return kExitUsage;
    }
    auto store = make_store(opts.cache);
    pgt::geodesics::GeodesicCounter counter(store, opts.workers);
    auto reports = pgt::experiments::density_table(xs, p, counter);

    // per-residue error-exponent fits when the x grid allows them
    for (int64_t a = 0; a < p; ++a) {
        std::vector<pgt::experiments::CountReport> series;
        for (const auto& rep : reports)
            if (rep.a == a) series.push_back(rep);
        if (xs.size() >= 4 && xs.back() >= 100.0 * xs.front()) {
            auto fit = pgt::experiments::error_exponent_fit(series);
            if (fit) {
                std::cout << "fit p=" << p << " a=" << a << " slope=" << fmt12(fit->slope)
                          << " residual=" << fmt12(fit->residual) << " points=" << fit->points << "\n";
                for (auto& rep : reports)
                    if (rep.a == a && rep.x == xs.back()) rep.fitted_exponent = fit->slope;
            } else {
                std::cout << "fit p=" << p << " a=" << a << " undefined (all deviations zero)\n";
            }
        }
    }
    for (const auto& rep : reports) {
        if (rep.x != xs.back()) continue;
        std::cout << (rep.is_aggregate() ? "aggregate" : "class") << " x=" << fmt12(rep.x) << " a=" << rep.a
                  << " symbol=" << rep.symbol << " psi=" << fmt12(rep.psi_value)
                  << " predicted=" << fmt12(rep.predicted) << " rel_dev=" << fmt12(rep.rel_dev) << "\n";
    }
    if (!out.empty()) pgt::experiments::emit_csv(reports, out);
    if (!logdev_out.empty()) pgt::experiments::emit_logdev(reports, logdev_out);

    if (strict) {
        bool breach = false;
        for (const auto& rep : reports)
            if (rep.x == xs.back() && rep.predicted > 0 && rep.rel_dev > max_rel_dev) breach = true;
        if (breach) {
            std::cout << "strict: relative deviation above " << fmt12(max_rel_dev) << " at x=" << fmt12(xs.back())
                      << "\n";
            return kExitStrictBreach;
        }
        std::cout << "strict: all relative deviations within " << fmt12(max_rel_dev) << "\n";
    }
    return kExitOk;
}

int cmd_prop21(int64_t p, int n, int64_t r, int64_t q, double X) {
    if (int rc = check_odd_prime(p); rc != kExitOk) return rc;
    auto res = pgt::experiments::prop21_check(p, n, r, q, X);
    std::cout << "prop21 p=" << p << " n=" << n << " r=" << r << " q=" << q << " X=" << fmt12(X)
              << " lhs=" << fmt12(res.lhs) << " main=" << fmt12(res.main_term)
              << " deviation=" << fmt12(res.deviation) << "\n";
    return kExitOk;
}

int cmd_prop22(double x, double u, int64_t p, int n, int64_t r, double V, bool have_V, double theta,
               const CommonOpts& opts) {
    if (int rc = check_odd_prime(p); rc != kExitOk) return rc;
    auto store = make_store(opts.cache);
    pgt::geodesics::GeodesicCounter counter(store, opts.workers);
    auto rep = pgt::experiments::prop22_check(x, u, p, n, r, have_V ? std::optional<double>(V) : std::nullopt,
                                              theta, counter);
    std::cout << "prop22 x=" << fmt12(x) << " u=" << fmt12(u) << " p=" << p << " n=" << n << " r=" << r
              << " V=" << fmt12(rep.V) << " direct=" << fmt12(rep.direct_diff)
              << " smoothed=" << fmt12(rep.smoothed_diff) << " target=" << fmt12(rep.target)
              << " direct_dev=" << fmt12(rep.direct_diff - rep.target)
              << " smoothed_dev=" << fmt12(rep.smoothed_diff - rep.target) << "\n";
    return kExitOk;
}

int cmd_lambda_check(int64_t t_max, int64_t q_max) {
    if (t_max < 3 || q_max < 1) {
        std::cerr << "error: need --t-max >= 3 and --q-max >= 1\n";
        return kExitUsage;
    }
    int64_t checked = 0, mismatches = 0;
    for (int64_t t = 3; t <= t_max; ++t) {
        auto disc = pgt::quadratic::discriminant_for_trace(t);
        for (int64_t q = 1; q <= q_max; ++q) {
            ++checked;
            if (pgt::zagier::lambda_q_euler(q, disc) != pgt::zagier::lambda_q_expsum(q, t)) {
                ++mismatches;
                std::cout << "mismatch t=" << t << " q=" << q << "\n";
            }
        }
    }
    std::cout << "lambda-check t<=" << t_max << " q<=" << q_max << ": " << checked << " pairs, " << mismatches
              << " mismatches\n";
    return mismatches == 0 ? kExitOk : kExitComputation;
}

int cmd_classdata(double x, const CommonOpts& opts) {
    if (!cache_path(opts.cache)) {
        std::cerr << "error: classdata needs --cache (or $PGT_CACHE_PATH)\n";
        return kExitUsage;
    }
    auto store = make_store(opts.cache);
    auto win = pgt::geodesics::trace_window(x);
    std::vector<int64_t> needed;
    for (int64_t t = win.t_min; t <= win.t_max; ++t)
        for (const auto& [d, u] : pgt::quadratic::pell_decompositions(t)) needed.push_back(d);
    store.ensure(needed, opts.workers);
    std::cout << "classdata x=" << fmt12(x) << " traces<=" << win.t_max << ": cache holds " << store.size()
              << " records (" << store.computed_count() << " computed this run)\n";
    return kExitOk;
}

int cmd_census(int64_t p, int64_t p_max) {
    auto print_one = [](int64_t prime) {
        auto c = pgt::experiments::census(prime);
        std::cout << "census p=" << prime << " plus=" << c.count_plus << " minus=" << c.count_minus
                  << " zero=" << c.count_zero << "\n";
    };
    if (p_max > 0) {
        for (int64_t prime = 3; prime <= p_max; ++prime)
            if (pgt::arith::is_prime(prime)) print_one(prime);
        return kExitOk;
    }
    if (int rc = check_odd_prime(p); rc != kExitOk) return rc;
    print_one(p);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"prime geodesic counts on the modular surface, by trace residue class"};
    app.require_subcommand(1);

    // count
    auto* count = app.add_subcommand("count", "evaluate psi(x) or psi(x; p, a) against its main term");
    double count_x = 0;
    int64_t count_p = 0, count_a = 0;
    CommonOpts count_opts;
    count->add_option("--x", count_x, "norm bound x")->required();
    auto* count_p_opt = count->add_option("--p", count_p, "odd prime modulus");
    auto* count_a_opt = count->add_option("--a", count_a, "trace residue mod p");
    add_common(count, count_opts);

    // verify-theorem
    auto* vt = app.add_subcommand("verify-theorem", "density table, aggregates and error-exponent fits");
    std::string vt_xlist, vt_out, vt_logdev;
    int64_t vt_p = 0;
    bool vt_strict = false;
    double vt_max_rel = 0.10;
    CommonOpts vt_opts;
    vt->add_option("--p", vt_p, "odd prime modulus")->required();
    vt->add_option("--x-list", vt_xlist, "comma-separated ascending x values")->required();
    vt->add_option("--out", vt_out, "CSV output path");
    vt->add_option("--logdev-out", vt_logdev, "two-column 'log x  log |dev|' output path");
    vt->add_flag("--strict", vt_strict, "exit 3 when a final-x relative deviation exceeds --max-rel-dev");
    vt->add_option("--max-rel-dev", vt_max_rel, "strict-mode threshold (default 0.10)");
    add_common(vt, vt_opts);

    // verify-prop21 (alias prop21)
    auto* p21 = app.add_subcommand("verify-prop21", "coefficient-sum main term over a residue class");
    p21->alias("prop21");
    int64_t p21_p = 0, p21_r = 0, p21_q = 0;
    int p21_n = 1;
    double p21_X = 0;
    p21->add_option("--p", p21_p)->required();
    p21->add_option("--n", p21_n);
    p21->add_option("--r", p21_r)->required();
    p21->add_option("--q", p21_q)->required();
    p21->add_option("--X", p21_X)->required();

    // verify-prop22
    auto* p22 = app.add_subcommand("verify-prop22", "smoothed vs direct psi_star increment");
    double p22_x = 0, p22_u = 0, p22_V = 0, p22_theta = 1.0 / 6.0;
    int64_t p22_p = 0, p22_r = 0;
    int p22_n = 1;
    CommonOpts p22_opts;
    p22->add_option("--x", p22_x)->required();
    p22->add_option("--u", p22_u)->required();
    p22->add_option("--p", p22_p)->required();
    p22->add_option("--n", p22_n);
    p22->add_option("--r", p22_r)->required();
    auto* p22_V_opt = p22->add_option("--V", p22_V, "smoothing scale (default u x^{theta-1/2})");
    p22->add_option("--theta", p22_theta, "subconvexity exponent used for the default V")
        ->check(CLI::Range(0.0, 0.5));
    add_common(p22, p22_opts);

    // lambda-check
    auto* lc = app.add_subcommand("lambda-check", "Euler-product vs exponential-sum coefficients");
    int64_t lc_tmax = 0, lc_qmax = 0;
    lc->add_option("--t-max", lc_tmax)->required();
    lc->add_option("--q-max", lc_qmax)->required();

    // classdata
    auto* cd = app.add_subcommand("classdata", "prebuild class records for all traces with norm <= x");
    double cd_x = 0;
    CommonOpts cd_opts;
    cd->add_option("--x", cd_x)->required();
    add_common(cd, cd_opts);

    // census
    auto* cen = app.add_subcommand("census", "residue counts by Legendre symbol of a^2-4");
    int64_t cen_p = 0, cen_pmax = 0;
    cen->add_option("--p", cen_p, "single odd prime");
    cen->add_option("--p-max", cen_pmax, "sweep all odd primes up to this bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (count->parsed())
            return cmd_count(count_x, count_p, count_a, count_p_opt->count() > 0, count_a_opt->count() > 0,
                             count_opts);
        if (vt->parsed())
            return cmd_verify_theorem(vt_xlist, vt_p, vt_out, vt_logdev, vt_strict, vt_max_rel, vt_opts);
        if (p21->parsed()) return cmd_prop21(p21_p, p21_n, p21_r, p21_q, p21_X);
        if (p22->parsed())
            return cmd_prop22(p22_x, p22_u, p22_p, p22_n, p22_r, p22_V, p22_V_opt->count() > 0, p22_theta,
                              p22_opts);
        if (lc->parsed()) return cmd_lambda_check(lc_tmax, lc_qmax);
        if (cd->parsed()) return cmd_classdata(cd_x, cd_opts);
        if (cen->parsed()) return cmd_census(cen_p, cen_pmax);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitComputation;
    }
    return kExitUsage;
}

#include "pgt/geodesics.hpp"

#include <atomic>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

#include "pgt/zagier.hpp"

namespace pgt::geodesics {

namespace {

long double norm_of_trace_ld(int64_t t) {
    long double td = static_cast<long double>(t);
    long double lam = (td + std::sqrt(td * td - 4.0L)) / 2.0L;
    return lam * lam;
}

void require_odd_prime(const char* who, int64_t p) {
    if (p == 2)
        throw std::invalid_argument(std::string(who) + ": p = 2 has a different main-term structure and is not supported; p must be an odd prime");
    if (p < 3 || !arith::is_prime(p))
        throw std::invalid_argument(std::string(who) + ": p must be an odd prime, got " + std::to_string(p));
}

void require_residue(const char* who, int64_t a, int64_t modulus) {
    if (a < 0 || a >= modulus)
        throw std::invalid_argument(std::string(who) + ": residue must lie in [0, modulus)");
}

// Exact fixed-point accumulator (scale 2^-64) for per-trace weights.  Every
// weight here is a double in [2^-11, 2^63), so the conversion is lossless
// and the sum is an exact integer; only the final value() rounds.
class ExactSum {
  public:
    void add(double w) {
        if (w == 0.0) return;
        int e = 0;
        double m = std::frexp(w, &e);
        auto m53 = static_cast<int64_t>(std::llround(std::ldexp(m, 53)));
        int shift = e - 53 + 64;
        if (shift < 0)
            throw std::logic_error("ExactSum: weight below representable range");
        acc_ += static_cast<__int128>(m53) << shift;
    }

    double value() const { return std::ldexp(static_cast<double>(acc_), -64); }

  private:
    __int128 acc_ = 0;
};

constexpr double kZagierRouteCap = 1e7;

int64_t pow_int(int64_t p, int n) {
    int64_t r = 1;
    for (int i = 0; i < n; ++i) {
        if (r > (int64_t(1) << 62) / p)
            throw std::invalid_argument("modulus p^n does not fit in 64 bits");
        r *= p;
    }
    return r;
}

}  // namespace

TraceWindow trace_window(double x) {
    if (!(x >= 1.0)) throw std::invalid_argument("trace_window: x must be >= 1");
    long double sx = std::sqrt(static_cast<long double>(x));
    long double X = sx + 1.0L / sx;
    auto t = static_cast<int64_t>(std::floor(X));
    // Boundary inclusion (ties N = x count) is decided against the same
    // double-rounded norms that norm_of_trace publishes, so the window and
    // the norm comparison can never disagree.
    while (static_cast<double>(norm_of_trace_ld(t + 1)) <= x) ++t;
    while (t >= 3 && static_cast<double>(norm_of_trace_ld(t)) > x) --t;
    TraceWindow win;
    win.x = x;
    win.X = static_cast<double>(X);
    win.t_max = (t < 3) ? 2 : t;
    return win;
}

double norm_of_trace(int64_t t) {
    if (t < 3) throw std::invalid_argument("norm_of_trace: t must be >= 3");
    return static_cast<double>(norm_of_trace_ld(t));
}

DensityPrediction predicted_density(int64_t p, int64_t a) {
    require_odd_prime("predicted_density", p);
    require_residue("predicted_density", a, p);
    DensityPrediction out;
    out.p = p;
    out.a = a;
    out.symbol = arith::kronecker(a * a - 4, p);
    if (out.symbol == 1)
        out.density = arith::Rational(1, p - 1);
    else if (out.symbol == -1)
        out.density = arith::Rational(1, p + 1);
    else
        out.density = arith::Rational(p, p * p - 1);
    out.density.canonicalize();
    return out;
}

arith::Rational predicted_piece_coefficient(int64_t p, int n, Parity parity) {
    require_odd_prime("predicted_piece_coefficient", p);
    if (n < 1) throw std::invalid_argument("predicted_piece_coefficient: n must be >= 1");
    auto ppow = [&](int e) {
        mpz_class z;
        mpz_ui_pow_ui(z.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(e));
        return z;
    };
    arith::Rational r;
    if (parity == Parity::odd) {
        // p^{1-2n} - p^{1-3n}
        r = arith::Rational(1, ppow(2 * n - 1)) - arith::Rational(1, ppow(3 * n - 1));
    } else {
        // p^{-2n} - p^{-3n} / (p + 1)
        r = arith::Rational(1, ppow(2 * n)) - arith::Rational(1, ppow(3 * n) * (p + 1));
    }
    r.canonicalize();
    return r;
}

GeodesicCounter::GeodesicCounter(quadratic::ClassRecordStore& store, int workers) : store_(store), workers_(1) {
    set_workers(workers);
}

void GeodesicCounter::set_workers(int workers) {
    if (workers < 1) throw std::invalid_argument("GeodesicCounter: workers must be >= 1");
    workers_ = workers;
}

void GeodesicCounter::ensure_discriminants(int64_t t_max) {
    if (t_max <= disc_tmax_) return;
    disc_.resize(static_cast<std::size_t>(t_max) + 1);
    for (int64_t t = disc_tmax_ + 1; t <= t_max; ++t)
        if (t >= 3) disc_[static_cast<std::size_t>(t)] = quadratic::discriminant_for_trace(t);
    disc_tmax_ = t_max;
}

void GeodesicCounter::ensure_record_weights(int64_t t_max) {
    if (t_max <= rec_tmax_) return;
    ensure_discriminants(t_max);
    std::vector<int64_t> needed;
    needed.reserve(static_cast<std::size_t>(t_max - rec_tmax_) * 2);
    std::vector<std::vector<std::pair<int64_t, int64_t>>> decomps(static_cast<std::size_t>(t_max - rec_tmax_));
    for (int64_t t = rec_tmax_ + 1; t <= t_max; ++t) {
        if (t < 3) continue;
        auto& dec = decomps[static_cast<std::size_t>(t - rec_tmax_ - 1)];
        dec = quadratic::pell_decompositions(t);
        for (const auto& [d, u] : dec) needed.push_back(d);
    }
    store_.ensure(needed, workers_);
    w_rec_.resize(static_cast<std::size_t>(t_max) + 1, 0.0);
    for (int64_t t = rec_tmax_ + 1; t <= t_max; ++t) {
        if (t < 3) continue;
        double w = 0.0;
        for (const auto& [d, u] : decomps[static_cast<std::size_t>(t - rec_tmax_ - 1)]) {
            const quadratic::ClassRecord& rec = store_.get(d);
            w += static_cast<double>(rec.h) * rec.regulator;
        }
        w_rec_[static_cast<std::size_t>(t)] = 2.0 * w;
    }
    rec_tmax_ = t_max;
}

void GeodesicCounter::ensure_zagier_weights(int64_t t_max) {
    if (t_max <= zag_tmax_) return;
    ensure_discriminants(t_max);
    w_zag_.resize(static_cast<std::size_t>(t_max) + 1, 0.0);
    const int64_t t_lo = std::max<int64_t>(3, zag_tmax_ + 1);
    auto fill = [&](int64_t t) {
        const auto& disc = disc_[static_cast<std::size_t>(t)];
        double delta = static_cast<double>(t) * static_cast<double>(t) - 4.0;
        w_zag_[static_cast<std::size_t>(t)] = 2.0 * std::sqrt(delta) * zagier::l1_zagier(disc);
    };
    if (workers_ == 1 || t_max - t_lo < 32) {
        for (int64_t t = t_lo; t <= t_max; ++t) fill(t);
    } else {
        std::atomic<int64_t> next{t_lo};
        auto run = [&] {
            for (;;) {
                int64_t t = next.fetch_add(1);
                if (t > t_max) break;
                fill(t);
            }
        };
        std::vector<std::thread> pool;
        for (int i = 0; i < workers_; ++i) pool.emplace_back(run);
        for (auto& th : pool) th.join();
    }
    zag_tmax_ = t_max;
}

double GeodesicCounter::psi(double x) {
    TraceWindow win = trace_window(x);
    if (win.empty()) return 0.0;
    ensure_record_weights(win.t_max);
    ExactSum sum;
    for (int64_t t = win.t_min; t <= win.t_max; ++t) sum.add(w_rec_[static_cast<std::size_t>(t)]);
    return sum.value();
}

double GeodesicCounter::psi_ap(double x, int64_t p, int64_t a) {
    require_odd_prime("psi_ap", p);
    require_residue("psi_ap", a, p);
    TraceWindow win = trace_window(x);
    if (win.empty()) return 0.0;
    ensure_record_weights(win.t_max);
    ExactSum sum;
    for (int64_t t = win.t_min; t <= win.t_max; ++t)
        if (t % p == a) sum.add(w_rec_[static_cast<std::size_t>(t)]);
    return sum.value();
}

double GeodesicCounter::psi_ap_zagier(double x, int64_t p, int64_t a) {
    require_odd_prime("psi_ap_zagier", p);
    require_residue("psi_ap_zagier", a, p);
    if (x > kZagierRouteCap)
        throw std::invalid_argument("psi_ap_zagier: capped at x <= 1e7; use the class-record route");
    TraceWindow win = trace_window(x);
    if (win.empty()) return 0.0;
    ensure_zagier_weights(win.t_max);
    ExactSum sum;
    for (int64_t t = win.t_min; t <= win.t_max; ++t)
        if (t % p == a) sum.add(w_zag_[static_cast<std::size_t>(t)]);
    return sum.value();
}

double GeodesicCounter::psi_star(double x, int64_t p, int n, int64_t r) {
    require_odd_prime("psi_star", p);
    if (n < 1) throw std::invalid_argument("psi_star: n must be >= 1");
    int64_t pn = pow_int(p, n);
    require_residue("psi_star", r, pn);
    if (x > kZagierRouteCap)
        throw std::invalid_argument("psi_star: capped at x <= 1e7");
    TraceWindow win = trace_window(x);
    if (win.empty()) return 0.0;
    ensure_zagier_weights(win.t_max);
    ExactSum sum;
    for (int64_t t = win.t_min; t <= win.t_max; ++t) {
        if (t % pn != r) continue;
        double factor = zagier::euler_factor_at_p(disc_[static_cast<std::size_t>(t)], p, 1.0);
        sum.add(w_zag_[static_cast<std::size_t>(t)] / factor);
    }
    return sum.value();
}

double GeodesicCounter::psi_piece(double x, int64_t p, int64_t a, int k) {
    require_odd_prime("psi_piece", p);
    require_residue("psi_piece", a, p);
    if (k < 1) throw std::invalid_argument("psi_piece: k must be >= 1");
    int64_t rep;  // the representative in {2, -2} with a == rep (mod p)
    if (a == 2 % p)
        rep = 2;
    else if (a == (((-2) % p) + p) % p)
        rep = -2;
    else
        throw std::invalid_argument("psi_piece: residue must be congruent to 2 or -2 mod p");
    TraceWindow win = trace_window(x);
    if (win.empty()) return 0.0;
    ensure_record_weights(win.t_max);
    ExactSum sum;
    for (int64_t t = win.t_min; t <= win.t_max; ++t) {
        if ((t - rep) % p != 0) continue;
        if (arith::valuation(p, t - rep) != k) continue;
        sum.add(w_rec_[static_cast<std::size_t>(t)]);
    }
    return sum.value();
}

}  // namespace pgt::geodesics

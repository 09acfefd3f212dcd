#include "pgt/zagier.hpp"

#include <cassert>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "pgt/arith.hpp"

namespace pgt::zagier {

namespace {

int64_t ipow(int64_t base, int exp) {
    int64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        assert(r <= (int64_t(1) << 62) / base);
        r *= base;
    }
    return r;
}

int chi_pow(int chi, int i) {
    if (i == 0) return 1;
    if (chi == 0) return 0;
    return (chi == 1 || i % 2 == 0) ? 1 : -1;
}

void require_odd_prime(const char* who, int64_t p) {
    if (p < 3 || !arith::is_prime(p))
        throw std::invalid_argument(std::string(who) + ": p must be an odd prime, got " + std::to_string(p));
}

}  // namespace

int64_t lambda_local(const LocalFactorSpec& spec, int m) {
    if (m < 0) throw std::invalid_argument("lambda_local: m must be >= 0");
    int64_t out = 0;
    if (m % 2 == 0 && m / 2 < spec.v) out += ipow(spec.prime, m / 2);
    if (m >= 2 * spec.v) out += ipow(spec.prime, spec.v) * chi_pow(spec.chi, m - 2 * spec.v);
    return out;
}

int64_t lambda_q_euler(int64_t q, const quadratic::Discriminant& delta) {
    if (q < 1) throw std::invalid_argument("lambda_q_euler: q must be >= 1");
    int64_t lambda = 1;
    for (const auto& [p, e] : arith::factorize(q).factors) {
        LocalFactorSpec spec{p, arith::valuation(p, delta.l), arith::kronecker(delta.D, p)};
        lambda *= lambda_local(spec, e);
        if (lambda == 0) break;
    }
    return lambda;
}

// ---- exponential-sum route -------------------------------------------------

namespace {

// Per-modulus tables: S(k^2, 1; c) for k mod c, and cos(2 pi j / c).  The
// sum over k pairs k with c-k, so only the cosine part survives.
class ExpsumTables {
  public:
    double inner(int64_t t, int64_t c) {
        std::lock_guard<std::mutex> lock(mu_);
        ensure(c);
        const auto& skk = skk_[static_cast<std::size_t>(c)];
        const auto& cosj = cos_[static_cast<std::size_t>(c)];
        double s = 0.0;
        for (int64_t k = 0; k < c; ++k) s += cosj[static_cast<std::size_t>(k * t % c)] * skk[static_cast<std::size_t>(k)];
        return s / static_cast<double>(c);
    }

  private:
    void ensure(int64_t c) {
        if (static_cast<std::size_t>(c) >= skk_.size()) {
            skk_.resize(static_cast<std::size_t>(c) + 1);
            cos_.resize(static_cast<std::size_t>(c) + 1);
        }
        auto& skk = skk_[static_cast<std::size_t>(c)];
        if (!skk.empty()) return;
        skk.resize(static_cast<std::size_t>(c));
        for (int64_t k = 0; k < c; ++k) skk[static_cast<std::size_t>(k)] = arith::kloosterman(k * k % c, 1, c);
        auto& cosj = cos_[static_cast<std::size_t>(c)];
        cosj.resize(static_cast<std::size_t>(c));
        for (int64_t j = 0; j < c; ++j)
            cosj[static_cast<std::size_t>(j)] = std::cos(2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(c));
    }

    std::mutex mu_;
    std::vector<std::vector<double>> skk_;
    std::vector<std::vector<double>> cos_;
};

ExpsumTables& expsum_tables() {
    static ExpsumTables tables;
    return tables;
}

}  // namespace

int64_t lambda_q_expsum(int64_t q, int64_t t) {
    if (q < 1) throw std::invalid_argument("lambda_q_expsum: q must be >= 1");
    if (t < 3) throw std::invalid_argument("lambda_q_expsum: t must be >= 3");
    if (q > 20000)
        throw RoundingError("lambda_q_expsum: q=" + std::to_string(q) +
                            " is beyond the double-precision exponential-sum route");
    double acc = 0.0;
    for (int64_t q1 = 1; q1 * q1 <= q; ++q1) {
        if (q % (q1 * q1) != 0) continue;
        acc += expsum_tables().inner(t, q / (q1 * q1));
    }
    double rounded = std::nearbyint(acc);
    if (std::abs(acc - rounded) > 1e-5)
        throw RoundingError("lambda_q_expsum: sum " + std::to_string(acc) + " for q=" + std::to_string(q) +
                            ", t=" + std::to_string(t) + " is not near an integer");
    return static_cast<int64_t>(rounded);
}

// ---- special values at s = 1 -----------------------------------------------

double l1_fundamental(int64_t D) {
    if (!quadratic::is_fundamental_discriminant(D))
        throw std::invalid_argument("l1_fundamental: not a fundamental discriminant > 1: " + std::to_string(D));
    // L(1, chi_D) = -(1/sqrt(D)) sum_{0<a<D} chi_D(a) log sin(pi a / D)
    double sum = 0.0, comp = 0.0;
    for (int64_t a = 1; a < D; ++a) {
        int chi = arith::kronecker(D, a);
        if (chi == 0) continue;
        double term = chi * std::log(std::sin(std::numbers::pi * static_cast<double>(a) / static_cast<double>(D)));
        double y = term - comp;
        double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    return -sum / std::sqrt(static_cast<double>(D));
}

double l1_chi_delta(const quadratic::Discriminant& delta) {
    double value = l1_fundamental(delta.D);
    for (const auto& [p, e] : arith::factorize(delta.l).factors)
        value *= 1.0 - static_cast<double>(arith::kronecker(delta.D, p)) / static_cast<double>(p);
    return value;
}

double l1_zagier(const quadratic::Discriminant& delta) {
    double base = l1_fundamental(delta.D);
    auto lfac = arith::factorize(delta.l).factors;
    // divisors u of l, each with the matching imprimitivity product over l/u
    std::vector<int64_t> divisors{1};
    for (const auto& [p, e] : lfac) {
        std::size_t n = divisors.size();
        int64_t pk = 1;
        for (int k = 1; k <= e; ++k) {
            pk *= p;
            for (std::size_t i = 0; i < n; ++i) divisors.push_back(divisors[i] * pk);
        }
    }
    double sum = 0.0;
    for (int64_t u : divisors) {
        int64_t m = delta.l / u;
        double corr = 1.0;
        for (const auto& [p, e] : lfac)
            if (m % p == 0) corr *= 1.0 - static_cast<double>(arith::kronecker(delta.D, p)) / static_cast<double>(p);
        sum += base * corr / static_cast<double>(u);
    }
    return sum;
}

double euler_factor_at_p(const quadratic::Discriminant& delta, int64_t p, double s) {
    require_odd_prime("euler_factor_at_p", p);
    int v = arith::valuation(p, delta.l);
    int chi = arith::kronecker(delta.D, p);
    double pd = static_cast<double>(p);
    double sum = 0.0;
    for (int m = 0; m < v; ++m) sum += std::pow(pd, m * (1.0 - 2.0 * s));
    double denom = 1.0 - chi * std::pow(pd, -s);
    if (std::abs(denom) < 1e-12)
        throw std::domain_error("euler_factor_at_p: local factor has a pole at this s");
    return sum + std::pow(pd, v * (1.0 - 2.0 * s)) / denom;
}

double lp1_zagier(const quadratic::Discriminant& delta, int64_t p) {
    return l1_zagier(delta) / euler_factor_at_p(delta, p, 1.0);
}

double lambda_v_p(const quadratic::Discriminant& delta, int64_t p, double V) {
    require_odd_prime("lambda_v_p", p);
    if (!(V >= 1.0)) throw std::invalid_argument("lambda_v_p: V must be >= 1");
    // e^{-q/V} < 1e-12  <=>  q > V ln 1e12
    auto q_max = static_cast<int64_t>(std::floor(V * std::log(1e12))) + 1;
    auto spf = arith::smallest_prime_factor_table(q_max);
    // multiplicative fill of lambda_q over [1, q_max]
    std::vector<int64_t> lam(static_cast<std::size_t>(q_max) + 1, 0);
    lam[1] = 1;
    for (int64_t q = 2; q <= q_max; ++q) {
        int64_t pp = spf[static_cast<std::size_t>(q)];
        int64_t rest = q;
        int e = 0;
        while (rest % pp == 0) { rest /= pp; ++e; }
        LocalFactorSpec spec{pp, arith::valuation(pp, delta.l), arith::kronecker(delta.D, pp)};
        lam[static_cast<std::size_t>(q)] = lam[static_cast<std::size_t>(rest)] * lambda_local(spec, e);
    }
    double sum = 0.0;
    for (int64_t q = 1; q <= q_max; ++q) {
        if (q % p == 0) continue;
        sum += static_cast<double>(lam[static_cast<std::size_t>(q)]) / static_cast<double>(q) *
               std::exp(-static_cast<double>(q) / V);
    }
    return sum;
}

}  // namespace pgt::zagier

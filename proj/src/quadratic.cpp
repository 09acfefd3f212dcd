#include "pgt/quadratic.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>

#include "pgt/arith.hpp"

namespace pgt::quadratic {

using arith::floordiv;
using arith::isqrt;

bool is_discriminant(int64_t d) {
    if (d <= 0) return false;
    int64_t r = d % 4;
    if (r != 0 && r != 1) return false;
    return !arith::is_perfect_square(d);
}

bool is_fundamental_discriminant(int64_t d) {
    if (d <= 1) return false;
    auto squarefree = [](int64_t n) {
        for (const auto& [p, e] : arith::factorize(n).factors)
            if (e > 1) return false;
        return true;
    };
    if (d % 4 == 1) return squarefree(d);
    if (d % 4 != 0) return false;
    int64_t m = d / 4;
    return (m % 4 == 2 || m % 4 == 3) && squarefree(m);
}

namespace {

Discriminant from_factorization(int64_t delta, const std::vector<std::pair<int64_t, int>>& factors) {
    int64_t m = 1, f = 1;
    for (const auto& [p, e] : factors) {
        if (e % 2 == 1) m *= p;
        for (int i = 0; i < e / 2; ++i) f *= p;
    }
    Discriminant out;
    out.delta = delta;
    if (m % 4 == 1) {
        out.D = m;
        out.l = f;
    } else {
        // m squarefree and == 2 or 3 mod 4; delta == 0 mod 4 forces f even
        assert(f % 2 == 0);
        out.D = 4 * m;
        out.l = f / 2;
    }
    return out;
}

}  // namespace

Discriminant decompose_discriminant(int64_t delta) {
    if (delta <= 0 || (delta % 4 != 0 && delta % 4 != 1))
        throw std::invalid_argument("decompose_discriminant: not a discriminant: " + std::to_string(delta));
    if (arith::is_perfect_square(delta))
        throw std::invalid_argument("decompose_discriminant: perfect square: " + std::to_string(delta));
    return from_factorization(delta, arith::factorize(delta).factors);
}

Discriminant discriminant_for_trace(int64_t t) {
    if (t < 3) throw std::invalid_argument("discriminant_for_trace: t must be >= 3");
    // t^2 - 4 = (t-2)(t+2); factor the halves and merge
    auto lo = arith::factorize(t - 2);
    auto hi = arith::factorize(t + 2);
    std::vector<std::pair<int64_t, int>> merged;
    std::size_t i = 0, j = 0;
    while (i < lo.factors.size() || j < hi.factors.size()) {
        if (j == hi.factors.size() || (i < lo.factors.size() && lo.factors[i].first < hi.factors[j].first)) {
            merged.push_back(lo.factors[i++]);
        } else if (i == lo.factors.size() || hi.factors[j].first < lo.factors[i].first) {
            merged.push_back(hi.factors[j++]);
        } else {
            merged.emplace_back(lo.factors[i].first, lo.factors[i].second + hi.factors[j].second);
            ++i; ++j;
        }
    }
    return from_factorization(t * t - 4, merged);
}

std::vector<std::pair<int64_t, int64_t>> pell_decompositions(int64_t t) {
    Discriminant disc = discriminant_for_trace(t);
    // t >= 3 makes t^2 - 4 a non-square, so the decomposition exists
    std::vector<int64_t> divisors{1};
    for (const auto& [p, e] : arith::factorize(disc.l).factors) {
        std::size_t n = divisors.size();
        int64_t pk = 1;
        for (int k = 1; k <= e; ++k) {
            pk *= p;
            for (std::size_t idx = 0; idx < n; ++idx) divisors.push_back(divisors[idx] * pk);
        }
    }
    std::sort(divisors.begin(), divisors.end());
    std::vector<std::pair<int64_t, int64_t>> out;
    out.reserve(divisors.size());
    for (int64_t u : divisors) {
        int64_t lu = disc.l / u;
        out.emplace_back(disc.D * lu * lu, u);
    }
    return out;
}

// ---- continued fraction of (b0 + sqrt(d))/2 -------------------------------
//
// With b0 the largest integer below sqrt(d) of the right parity, the
// quadratic irrational xi0 = (b0 + sqrt(d))/2 is reduced, so its continued
// fraction is purely periodic.  The product of the complete quotients over
// one period is the fundamental unit eps0 of the order of discriminant d,
// of norm (-1)^period.

namespace {

struct CfCursor {
    int64_t d = 0, s = 0;   // s = isqrt(d)
    int64_t P = 0, Q = 0;   // current complete quotient (P + sqrt(d))/Q
    int64_t P0 = 0, Q0 = 0;

    explicit CfCursor(int64_t disc) : d(disc), s(isqrt(disc)) {
        int64_t b0 = s;
        if ((b0 & 1) != (d & 1)) --b0;
        P = P0 = b0;
        Q = Q0 = 2;
    }

    // partial quotient of the current state
    int64_t digit() const { return (P + s) / Q; }

    void advance() {
        int64_t a = digit();
        int64_t Pn = a * Q - P;
        int64_t Qn = (d - Pn * Pn) / Q;
        assert((d - Pn * Pn) % Q == 0);
        P = Pn;
        Q = Qn;
        assert(Q > 0 && P > 0 && P <= s);
    }

    bool at_start() const { return P == P0 && Q == Q0; }
};

void validate_discriminant(const char* who, int64_t d) {
    if (!is_discriminant(d))
        throw std::invalid_argument(std::string(who) + ": not a (non-square) discriminant: " + std::to_string(d));
}

}  // namespace

PellSolution pell_fundamental(int64_t d) {
    validate_discriminant("pell_fundamental", d);
    CfCursor cf(d);
    // continuant denominators q_{i}: q_{-2} = 1, q_{-1} = 0
    mpz_class q_prev = 1, q_cur = 0;
    do {
        mpz_class q_next = cf.digit() * q_cur + q_prev;
        q_prev = q_cur;
        q_cur = q_next;
        cf.advance();
    } while (!cf.at_start());
    // eps0 = q_{l-1} * xi0 + q_{l-2} = (x0 + y0 sqrt(d)) / 2
    mpz_class x0 = q_cur * cf.P0 + 2 * q_prev;
    mpz_class y0 = q_cur;
    mpz_class norm = x0 * x0 - d * y0 * y0;
    if (norm != 4 && norm != -4)
        throw std::logic_error("pell_fundamental: continued fraction did not produce a unit");
    PellSolution sol;
    sol.d = d;
    if (norm == -4) {
        sol.t = (x0 * x0 + d * y0 * y0) / 2;
        sol.u = x0 * y0;
    } else {
        sol.t = x0;
        sol.u = y0;
    }
    if (sol.t * sol.t - d * sol.u * sol.u != 4)
        throw std::logic_error("pell_fundamental: solution check failed");
    return sol;
}

double regulator(int64_t d) {
    validate_discriminant("regulator", d);
    CfCursor cf(d);
    const double sqrt_d = std::sqrt(static_cast<double>(d));
    double log_sum = 0.0, comp = 0.0;  // Kahan
    int64_t period = 0;
    do {
        double term = std::log((static_cast<double>(cf.P) + sqrt_d) / static_cast<double>(cf.Q));
        double y = term - comp;
        double t = log_sum + y;
        comp = (t - log_sum) - y;
        log_sum = t;
        ++period;
        cf.advance();
    } while (!cf.at_start());
    return (period % 2 == 1) ? 2.0 * log_sum : log_sum;
}

// ---- reduced forms and their cycles ---------------------------------------
//
// A primitive form (a, b, c) with b^2 - 4ac = d > 0 is reduced exactly when
// 0 < b < sqrt(d) and (sqrt(d) - b)/2 < |a| < (sqrt(d) + b)/2; the same
// window then holds for |c|.  The reduction operator rho permutes the
// reduced forms and its orbits are the cycles; h(d) = number of orbits.
//
// Enumeration: for each admissible b the products |a||c| = (d - b^2)/4 are
// read off a factor table for the whole b-grid, filled by sieving with the
// square roots of d modulo each small prime (one Tonelli-Shanks per prime,
// then stride-striking), so no per-b trial division happens.

namespace {

struct Form {
    int64_t a, b, c;
    bool operator==(const Form&) const = default;
};

uint64_t form_key(int64_t a, int64_t b) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(static_cast<int32_t>(a))) << 32) |
           static_cast<uint32_t>(static_cast<int32_t>(b));
}

Form rho(const Form& f, int64_t d, int64_t s) {
    int64_t m = 2 * std::abs(f.c);
    int64_t t = ((-f.b) % m + m) % m;
    int64_t bp = t + m * floordiv(s - t, m);
    assert((bp * bp - d) % (4 * f.c) == 0);
    return Form{f.c, bp, (bp * bp - d) / (4 * f.c)};
}

class FormScanner {
  public:
    int64_t count_cycles(int64_t d) {
        const int64_t s = isqrt(d);
        const int64_t b_first = (d % 2 == 0) ? 2 : 1;
        const std::size_t slots = static_cast<std::size_t>((s - b_first) / 2 + 1);

        rem_.assign(slots, 0);
        fac_.assign(slots, {});
        for (std::size_t i = 0; i < slots; ++i) {
            int64_t b = b_first + 2 * static_cast<int64_t>(i);
            rem_[i] = static_cast<uint64_t>((d - b * b) / 4);
        }
        sieve_factors(d, b_first, slots);

        // collect reduced primitive forms, keyed by (a, b)
        forms_.clear();
        index_.clear();
        divisors_.clear();
        for (std::size_t i = 0; i < slots; ++i) {
            int64_t b = b_first + 2 * static_cast<int64_t>(i);
            int64_t N = (d - b * b) / 4;
            if (N == 0) continue;  // cannot happen: d is non-square
            collect_divisors(i);
            for (int64_t alpha : divisors_) {
                if (alpha * alpha > N) continue;
                if ((2 * alpha + b) * (2 * alpha + b) <= d) continue;
                int64_t gamma = N / alpha;
                if (std::gcd(std::gcd(alpha, b), gamma) != 1) continue;
                push_form(alpha, b, -gamma);
                push_form(-alpha, b, gamma);
                if (alpha != gamma) {
                    push_form(gamma, b, -alpha);
                    push_form(-gamma, b, alpha);
                }
            }
        }

        // walk rho-orbits
        visited_.assign(forms_.size(), false);
        int64_t cycles = 0;
        for (std::size_t start = 0; start < forms_.size(); ++start) {
            if (visited_[start]) continue;
            ++cycles;
            Form cur = forms_[start];
            do {
                auto it = index_.find(form_key(cur.a, cur.b));
                if (it == index_.end())
                    throw std::logic_error("class_number: rho left the enumerated form set");
                if (visited_[it->second]) break;
                visited_[it->second] = true;
                cur = rho(cur, d, s);
            } while (!(cur == forms_[start]));
        }
        return cycles;
    }

  private:
    void push_form(int64_t a, int64_t b, int64_t c) {
        index_.emplace(form_key(a, b), forms_.size());
        forms_.push_back(Form{a, b, c});
    }

    void ensure_primes(int64_t bound) {
        if (bound <= prime_bound_) return;
        prime_bound_ = std::max<int64_t>(2 * bound, 64);
        primes_ = arith::primes_up_to(prime_bound_);
    }

    void sieve_factors(int64_t d, int64_t b_first, std::size_t slots) {
        // p = 2 by direct stripping, odd p by striking root classes
        for (std::size_t i = 0; i < slots; ++i) {
            int e = 0;
            while (rem_[i] % 2 == 0) { rem_[i] /= 2; ++e; }
            if (e > 0) fac_[i].push_back({2, e});
        }
        int64_t p_limit = 1;
        for (std::size_t i = 0; i < slots; ++i)
            p_limit = std::max(p_limit, isqrt(static_cast<int64_t>(rem_[i])));
        ensure_primes(p_limit);
        for (int64_t p : primes_) {
            if (p > p_limit) break;
            if (p == 2) continue;
            int64_t dm = ((d % p) + p) % p;
            int64_t roots[2];
            int nroots = 0;
            if (dm == 0) {
                roots[nroots++] = 0;
            } else {
                if (arith::kronecker(dm, p) != 1) continue;
                int64_t r = arith::sqrt_mod_prime(dm, p);
                roots[nroots++] = r;
                roots[nroots++] = p - r;
            }
            const int64_t inv2 = (p + 1) / 2;  // 2^{-1} mod p
            for (int k = 0; k < nroots; ++k) {
                int64_t i0 = ((roots[k] - b_first) % p + p) % p * inv2 % p;
                for (std::size_t i = static_cast<std::size_t>(i0); i < slots; i += static_cast<std::size_t>(p)) {
                    int e = 0;
                    while (rem_[i] % static_cast<uint64_t>(p) == 0) { rem_[i] /= static_cast<uint64_t>(p); ++e; }
                    if (e > 0) fac_[i].push_back({p, e});
                }
            }
        }
        for (std::size_t i = 0; i < slots; ++i)
            if (rem_[i] > 1) fac_[i].push_back({static_cast<int64_t>(rem_[i]), 1});  // prime leftover
    }

    void collect_divisors(std::size_t i) {
        divisors_.assign(1, 1);
        for (const auto& [p, e] : fac_[i]) {
            std::size_t n = divisors_.size();
            int64_t pk = 1;
            for (int k = 1; k <= e; ++k) {
                pk *= p;
                for (std::size_t idx = 0; idx < n; ++idx) divisors_.push_back(divisors_[idx] * pk);
            }
        }
    }

    struct PrimePower {
        int64_t first;
        int second;
    };

    std::vector<int64_t> primes_;
    int64_t prime_bound_ = 0;
    std::vector<uint64_t> rem_;
    std::vector<std::vector<PrimePower>> fac_;
    std::vector<int64_t> divisors_;
    std::vector<Form> forms_;
    std::unordered_map<uint64_t, std::size_t> index_;
    std::vector<bool> visited_;
};

}  // namespace

int64_t class_number(int64_t d) {
    validate_discriminant("class_number", d);
    thread_local FormScanner scanner;
    return scanner.count_cycles(d);
}

// ---- record store ----------------------------------------------------------

namespace {

std::string format_regulator(double r) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", r);
    return buf;
}

}  // namespace

ClassRecord compute_class_record(int64_t d) {
    ClassRecord rec;
    rec.d = d;
    rec.h = class_number(d);
    rec.regulator = std::strtod(format_regulator(regulator(d)).c_str(), nullptr);
    return rec;
}

ClassRecordStore::ClassRecordStore(std::filesystem::path cache_file) : path_(std::move(cache_file)) {
    std::ifstream in(path_);
    if (!in.is_open()) return;  // fresh cache; created on first append
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto bad = [&](const std::string& why) {
            throw CacheFormatError("class-record cache " + path_.string() + ":" + std::to_string(lineno) + ": " + why);
        };
        std::size_t c1 = line.find(',');
        std::size_t c2 = (c1 == std::string::npos) ? std::string::npos : line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos)
            bad("expected 3 comma-separated fields");
        ClassRecord rec;
        try {
            std::size_t used = 0;
            rec.d = std::stoll(line.substr(0, c1), &used);
            if (used != c1) bad("malformed discriminant field");
            std::string hs = line.substr(c1 + 1, c2 - c1 - 1);
            rec.h = std::stoll(hs, &used);
            if (used != hs.size()) bad("malformed class-number field");
            std::string rs = line.substr(c2 + 1);
            rec.regulator = std::stod(rs, &used);
            if (used != rs.size()) bad("malformed regulator field");
        } catch (const CacheFormatError&) {
            throw;
        } catch (const std::exception&) {
            bad("unparsable numeric field");
        }
        if (!is_discriminant(rec.d) || rec.h < 1 || !(rec.regulator > 0.0))
            bad("record values out of range");
        if (!records_.emplace(rec.d, rec).second)
            bad("duplicate record for d=" + std::to_string(rec.d));
    }
}

void ClassRecordStore::append_line(const ClassRecord& rec) {
    if (path_.empty()) return;
    if (!out_.is_open()) {
        out_.open(path_, std::ios::app);
        if (!out_.is_open())
            throw CacheFormatError("class-record cache " + path_.string() + ": cannot open for append");
    }
    out_ << rec.d << ',' << rec.h << ',' << format_regulator(rec.regulator) << '\n';
    out_.flush();
    if (!out_)
        throw CacheFormatError("class-record cache " + path_.string() + ": write failed");
}

const ClassRecord& ClassRecordStore::get(int64_t d) {
    auto it = records_.find(d);
    if (it != records_.end()) return it->second;
    ClassRecord rec = compute_class_record(d);
    ++computed_;
    append_line(rec);
    return records_.emplace(d, rec).first->second;
}

void ClassRecordStore::ensure(std::span<const int64_t> ds, int workers) {
    std::vector<int64_t> missing;
    missing.reserve(ds.size());
    for (int64_t d : ds)
        if (!records_.count(d)) missing.push_back(d);
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    if (missing.empty()) return;

    std::vector<ClassRecord> fresh(missing.size());
    workers = std::max(1, workers);
    if (workers == 1 || missing.size() < 4) {
        for (std::size_t i = 0; i < missing.size(); ++i) fresh[i] = compute_class_record(missing[i]);
    } else {
        std::atomic<std::size_t> next{0};
        auto run = [&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= missing.size()) break;
                fresh[i] = compute_class_record(missing[i]);
            }
        };
        std::vector<std::thread> pool;
        int n = std::min<int>(workers, static_cast<int>(missing.size()));
        pool.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pool.emplace_back(run);
        for (auto& th : pool) th.join();
    }
    // single writer, ascending d, so the cache file is deterministic
    for (const ClassRecord& rec : fresh) {
        records_.emplace(rec.d, rec);
        append_line(rec);
    }
    computed_ += fresh.size();
}

}  // namespace pgt::quadratic

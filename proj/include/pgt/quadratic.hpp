#pragma once

// Discriminant decomposition, Pell fundamental solutions, class numbers and
// regulators of indefinite binary quadratic forms, plus the persistent
// per-discriminant record cache.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace pgt::quadratic {

// delta = D * l^2 with D > 0 fundamental.
struct Discriminant {
    int64_t delta = 0;
    int64_t D = 0;
    int64_t l = 1;
};

// Fundamental solution of t^2 - d u^2 = 4 (minimal u > 0), exact.
struct PellSolution {
    int64_t d = 0;
    mpz_class t;
    mpz_class u;
};

struct ClassRecord {
    int64_t d = 0;
    int64_t h = 0;
    double regulator = 0.0;
};

// Raised for malformed cache files; arithmetic failures use the standard
// std::invalid_argument / std::domain_error family instead.
class CacheFormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// True when d is positive, congruent to 0 or 1 mod 4, and not a square.
bool is_discriminant(int64_t d);

bool is_fundamental_discriminant(int64_t d);

// Unique (D, l) with delta = D l^2, D fundamental.  Throws on invalid input.
Discriminant decompose_discriminant(int64_t delta);

// decompose_discriminant(t^2 - 4) computed from the factorizations of the
// two halves t - 2 and t + 2; t >= 3.
Discriminant discriminant_for_trace(int64_t t);

// All (d, u) with d u^2 = t^2 - 4 and d a discriminant; u ascending.
std::vector<std::pair<int64_t, int64_t>> pell_decompositions(int64_t t);

PellSolution pell_fundamental(int64_t d);

// log eps_d with eps_d = (t_d + u_d sqrt(d))/2, via the continued-fraction
// period of the order of discriminant d (no big integers materialized).
double regulator(int64_t d);

// Number of cycles of reduced primitive forms of discriminant d.
int64_t class_number(int64_t d);

// Memoized (d, h, regulator) store with an optional append-only text cache
// file, one "d,h,regulator" line per record.  Reads are safe from many
// threads once records exist; computing is funneled through ensure()/get().
class ClassRecordStore {
  public:
    ClassRecordStore() = default;
    explicit ClassRecordStore(std::filesystem::path cache_file);

    // Lookup, computing and persisting on a miss.  Not safe to call
    // concurrently with other mutating calls; use ensure() to prefill.
    const ClassRecord& get(int64_t d);

    // Compute (in parallel) every missing record among ds, then append the
    // new lines to the cache file in ascending d order.
    void ensure(std::span<const int64_t> ds, int workers = 1);

    bool contains(int64_t d) const { return records_.count(d) != 0; }
    std::size_t size() const { return records_.size(); }

    // Number of records computed (as opposed to served from memory/disk).
    std::uint64_t computed_count() const { return computed_.load(); }

  private:
    void append_line(const ClassRecord& rec);

    std::unordered_map<int64_t, ClassRecord> records_;
    std::filesystem::path path_;
    std::ofstream out_;
    std::atomic<std::uint64_t> computed_{0};
};

// Computes a record without touching any store.  The regulator is normalized
// through its 15-significant-digit cache text form, so runs that compute a
// record and runs that re-read it from disk serve identical doubles.
ClassRecord compute_class_record(int64_t d);

}  // namespace pgt::quadratic

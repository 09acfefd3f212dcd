#include <doctest.h>

#include <cmath>

#include "pgt/geodesics.hpp"
#include "pgt/quadratic.hpp"
#include "pgt/zagier.hpp"

using namespace pgt;
using geodesics::GeodesicCounter;
using geodesics::Parity;

TEST_CASE("norm_of_trace") {
    CHECK(geodesics::norm_of_trace(3) == doctest::Approx((7.0 + 3.0 * std::sqrt(5.0)) / 2.0).epsilon(1e-12));
    double n4 = 2.0 + std::sqrt(3.0);
    CHECK(geodesics::norm_of_trace(4) == doctest::Approx(n4 * n4).epsilon(1e-12));
    for (int64_t t = 3; t < 200; ++t) CHECK(geodesics::norm_of_trace(t) < geodesics::norm_of_trace(t + 1));
    CHECK_THROWS_AS(geodesics::norm_of_trace(2), std::invalid_argument);
}

TEST_CASE("trace_window matches the norm comparison for t <= 1000") {
    for (int64_t t = 3; t <= 1000; t += (t < 30 ? 1 : 13)) {
        double norm = geodesics::norm_of_trace(t);
        // just below the norm: t is excluded; at and just above: included
        CHECK(geodesics::trace_window(std::nextafter(norm, 0.0)).t_max == t - 1);
        CHECK(geodesics::trace_window(norm).t_max == t);  // ties count
        CHECK(geodesics::trace_window(std::nextafter(norm, 1e18)).t_max == t);
    }
    CHECK(geodesics::trace_window(5.0).empty());
    CHECK(geodesics::trace_window(6.8).empty());
    CHECK_FALSE(geodesics::trace_window(6.9).empty());
}

TEST_CASE("psi at small x") {
    quadratic::ClassRecordStore store;
    GeodesicCounter counter(store);
    CHECK(counter.psi(5.0) == 0.0);
    CHECK(counter.psi(10.0) == doctest::Approx(2.0 * quadratic::regulator(5)).epsilon(1e-12));
    // next contribution enters at norm(4) = (2+sqrt(3))^2 ~ 13.93, with
    // weight 2 h(12) log eps_12 and h(12) = 2
    CHECK(counter.psi(13.9) == doctest::Approx(2.0 * quadratic::regulator(5)).epsilon(1e-12));
    CHECK(counter.psi(14.0) ==
          doctest::Approx(2.0 * (quadratic::regulator(5) + 2.0 * quadratic::regulator(12))).epsilon(1e-12));
}

TEST_CASE("psi approaches its main term x") {
    quadratic::ClassRecordStore store;
    GeodesicCounter counter(store, 2);
    double x = 1e6;
    double psi = counter.psi(x);
    CHECK(std::abs(psi - x) < 3.0 * std::pow(x, 0.75));
}

TEST_CASE("psi_ap examples and the residue partition") {
    quadratic::ClassRecordStore store;
    GeodesicCounter counter(store);
    CHECK(counter.psi_ap(10.0, 5, 3) == doctest::Approx(2.0 * quadratic::regulator(5)).epsilon(1e-12));
    CHECK(counter.psi_ap(10.0, 5, 1) == 0.0);
    for (double x : {100.0, 5000.0, 20000.0}) {
        for (int64_t p : {3LL, 5LL, 7LL}) {
            double total = 0.0;
            for (int64_t a = 0; a < p; ++a) total += counter.psi_ap(x, p, a);
            // class sums are exact internally; only the final roundings differ
            CHECK(total == doctest::Approx(counter.psi(x)).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(counter.psi_ap(10.0, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(counter.psi_ap(10.0, 9, 1), std::invalid_argument);
    CHECK_THROWS_AS(counter.psi_ap(10.0, 5, 5), std::invalid_argument);
}

TEST_CASE("psi_ap agrees with the L-series route") {
    quadratic::ClassRecordStore store;
    GeodesicCounter counter(store, 2);
    CHECK(counter.psi_ap_zagier(10.0, 5, 3) == doctest::Approx(2.0 * std::sqrt(5.0) * zagier::l1_fundamental(5)).epsilon(1e-9));
    CHECK(counter.psi_ap_zagier(5.0, 5, 3) == 0.0);
    for (int64_t p : {3LL, 5LL})
        for (int64_t a = 0; a < p; ++a) {
            double rec = counter.psi_ap(2000.0, p, a);
            double zag = counter.psi_ap_zagier(2000.0, p, a);
            if (rec == 0.0)
                CHECK(zag == 0.0);
            else
                CHECK(std::abs(rec - zag) <= 1e-6 * rec);
        }
    CHECK_THROWS_AS(counter.psi_ap_zagier(2e7, 3, 1), std::invalid_argument);  // route cap
}

TEST_CASE("psi_star example and scaling") {
    quadratic::ClassRecordStore store;
    GeodesicCounter counter(store);
    double expect = 2.0 * std::sqrt(5.0) * zagier::lp1_zagier(quadratic::decompose_discriminant(5), 3);
    CHECK(counter.psi_star(10.0, 3, 1, 0) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(counter.psi_star(5.0, 3, 1, 0) == 0.0);
    // psi_star(x; p^n, r) ~ x / p^n
    double x = 2e5;
    for (int64_t r : {0LL, 1LL, 2LL}) {
        double v = counter.psi_star(x, 3, 1, r);
        CHECK(std::abs(v - x / 3.0) < 0.05 * x);
    }
}

TEST_CASE("psi_piece partitions psi_ap over the valuation") {
    quadratic::ClassRecordStore store;
    GeodesicCounter counter(store, 2);
    double x = 1e4;
    for (int64_t p : {3LL, 5LL}) {
        for (int64_t rep : {2LL, -2LL}) {
            int64_t a = ((rep % p) + p) % p;
            double whole = counter.psi_ap(x, p, a);
            double parts = 0.0;
            int64_t t_max = geodesics::trace_window(x).t_max;
            for (int k = 1; (int64_t)std::pow((double)p, k) <= t_max + 2; ++k)
                parts += counter.psi_piece(x, p, a, k);
            CHECK(parts == doctest::Approx(whole).epsilon(1e-12));
        }
    }
    // vacuous piece: p^k beyond the window
    CHECK(counter.psi_piece(100.0, 3, 2, 12) == 0.0);
    CHECK_THROWS_AS(counter.psi_piece(100.0, 7, 3, 1), std::invalid_argument);  // 3 != +-2 mod 7
}

TEST_CASE("psi_piece main-term coefficient at desk scale") {
    quadratic::ClassRecordStore store;
    GeodesicCounter counter(store, 2);
    double x = 1e6;
    double piece = counter.psi_piece(x, 3, 2, 1);
    CHECK(std::abs(piece / x - 2.0 / 9.0) < 0.08);  // Eq-level coefficient 2/9 at n=1
}

TEST_CASE("predicted_density examples") {
    auto d51 = geodesics::predicted_density(5, 1);
    CHECK(d51.symbol == -1);
    CHECK(d51.density == arith::Rational(1, 6));
    auto d52 = geodesics::predicted_density(5, 2);
    CHECK(d52.symbol == 0);
    CHECK(d52.density == arith::Rational(5, 24));
    auto d74 = geodesics::predicted_density(7, 4);
    CHECK(d74.symbol == -1);
    CHECK(d74.density == arith::Rational(1, 8));
    CHECK_THROWS_AS(geodesics::predicted_density(2, 1), std::invalid_argument);
    CHECK_THROWS_AS(geodesics::predicted_density(9, 1), std::invalid_argument);
}

TEST_CASE("densities over a full residue system sum to 1") {
    for (int64_t p = 3; p <= 97; ++p) {
        if (!arith::is_prime(p)) continue;
        arith::Rational sum = 0;
        for (int64_t a = 0; a < p; ++a) sum += geodesics::predicted_density(p, a).density;
        CHECK(sum == arith::Rational(1));
    }
}

TEST_CASE("predicted_piece_coefficient examples and telescoping") {
    CHECK(geodesics::predicted_piece_coefficient(3, 1, Parity::odd) == arith::Rational(2, 9));
    CHECK(geodesics::predicted_piece_coefficient(3, 1, Parity::even) == arith::Rational(11, 108));
    for (int64_t p : {3LL, 5LL, 7LL}) {
        arith::Rational partial = 0;
        arith::Rational cp(p, p * p - 1);
        cp.canonicalize();
        for (int n = 1; n <= 40; ++n) {
            partial += geodesics::predicted_piece_coefficient(p, n, Parity::odd);
            partial += geodesics::predicted_piece_coefficient(p, n, Parity::even);
            arith::Rational tail = cp - partial;
            mpz_class p2n;
            mpz_ui_pow_ui(p2n.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(2 * n));
            CHECK(tail > 0);
            CHECK(tail <= arith::Rational(2, p2n));
        }
    }
}

TEST_CASE("worker count does not change any result") {
    quadratic::ClassRecordStore store1, store2;
    GeodesicCounter one(store1, 1), many(store2, 4);
    CHECK(one.psi(30000.0) == many.psi(30000.0));
    CHECK(one.psi_ap(30000.0, 5, 2) == many.psi_ap(30000.0, 5, 2));
    CHECK(one.psi_ap_zagier(30000.0, 7, 3) == many.psi_ap_zagier(30000.0, 7, 3));
    CHECK(one.psi_star(20000.0, 3, 2, 4) == many.psi_star(20000.0, 3, 2, 4));
}

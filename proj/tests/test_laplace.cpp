#include "doctest.h"

#include "laplace.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>
#include <vector>

using namespace qpt;

TEST_SUITE("laplace") {

TEST_CASE("profile pins the closed-form maximizer") {
    // In the k/N -> 0 limit at q = 1/4 the maximizer is
    // (1 + sqrt(1/4))^{-1} = 2/3.
    LaplaceProfile limit = profile(1, 1000000, 0.25);
    CHECK(std::abs(limit.x0 - 2.0 / 3.0) < 1e-6);
    CHECK(std::abs(limit.fpp_x0 - (-4.5)) < 1e-5);

    for (double q : {0.1, 0.3, 0.6, 0.9}) {
        for (long k : {2L, 10L, 100L}) {
            for (long m : {1L, 3L}) {
                LaplaceProfile p = profile(k, m * k, q);
                CHECK(p.x0 > 0.0);
                CHECK(p.x0 < 1.0);
                CHECK(p.stationarity_residual < 1e-10);
                CHECK(p.fpp_x0 < 0.0);
                // The curvature closed form, recomputed.
                const double s = std::sqrt(q) * std::exp(0.5 / double(m));
                CHECK(p.fpp_x0 ==
                      doctest::Approx(-(1.0 + s) * (1.0 + s) / s).epsilon(1e-12));
                CHECK(p.f(p.x0) == doctest::Approx(p.f_x0).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("closed-form maximizer beats brute force") {
    const std::vector<std::tuple<long, long, double>> pts{
        {20, 60, 0.3}, {50, 50, 0.8}, {7, 35, 0.15}};
    for (auto [k, N, q] : pts) {
        LaplaceProfile p = profile(k, N, q);
        CHECK(profile_argmax_gap(p) < 1e-5);
    }
}

TEST_CASE("two-term sum collapses to the explicit value") {
    // k = 2 keeps a single term i = 1:
    // S = 4 exp(2 (log(1/q)/2 + 2 H(1/2) + 1/N)) with H(1/2) = log 2.
    for (double q : {0.1, 0.5, 0.9}) {
        for (long N : {2L, 10L, 100L}) {
            const double f_half =
                0.5 * std::log(1.0 / q) + 2.0 * std::log(2.0) + 1.0 / double(N);
            const double want = std::log(4.0) + 2.0 * f_half;
            CHECK(sum_S(2, N, q) == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("log-scale sum is reorder stable and reproducible") {
    const long k = 137, N = 274;
    const double q = 0.35;
    const double got = sum_S(k, N, q);
    CHECK(std::isfinite(got));
    CHECK(sum_S(k, N, q) == got);  // bitwise reproducible

    // Reverse-order oracle with plain (uncompensated) accumulation.
    LaplaceProfile p = profile(k, N, q);
    double shift = -1e308;
    std::vector<double> terms;
    for (long i = k - 1; i >= 1; --i) {
        terms.push_back(std::log(p.g(double(i) / double(k))) +
                        double(k) * p.f(double(i) / double(k)));
        shift = std::max(shift, terms.back());
    }
    double s = 0.0;
    for (double t : terms) s += std::exp(t - shift);
    CHECK(std::abs(shift + std::log(s) - got) < 1e-10);

    // Magnitudes reach exp(thousands); the log-scale value stays finite.
    CHECK(std::isfinite(sum_S(200, 200, 0.1)));
    CHECK(sum_S(200, 200, 0.1) > 500.0);
}

TEST_CASE("laplace prediction holds across the grid") {
    std::vector<long> ks;
    for (long k = 10; k <= 200; k += 10) ks.push_back(k);
    LaplaceReport rep =
        bound_check_S(ks, {1.0, 2.0, 3.0, 5.0}, {0.1, 0.3, 0.6, 0.9});
    CHECK(rep.rows.size() == 320);
    // Ratio within [1/50, 50] and flat in k (slope within 0.1): the
    // q^{-1/4} k^{1/2} e^{k f(x0)} shape is exactly right.
    CHECK(rep.ratio_log_min > std::log(1.0 / 50.0));
    CHECK(rep.ratio_log_max < std::log(50.0));
    CHECK(rep.max_abs_slope < 0.1);
    CHECK(rep.curvature_negative);
    CHECK(rep.max_stationarity < 1e-10);
    CHECK(rep.slopes.size() == 16);  // one per (q, multiplier) series
    for (const LaplaceCheckRow& row : rep.rows) {
        CHECK(row.log_ratio == doctest::Approx(row.log_S - row.log_ref));
        CHECK(row.k <= row.N);
        CHECK(row.q >= 1.0 / (double(row.k) * double(row.k)));
    }

    // Out-of-window points are skipped, not clamped: k < 2, q < k^{-2}
    // and N < k all drop out, leaving nothing here.
    LaplaceReport empty = bound_check_S({1, 3}, {0.5, 1.0}, {1e-4});
    CHECK(empty.rows.empty());
}

TEST_CASE("theta sum carries its truncation certificate") {
    double tail = -1.0;
    const double t1 = theta_sum(1.0, &tail);
    CHECK(t1 == doctest::Approx(1.772637).epsilon(1e-5));
    CHECK(tail >= 0.0);
    CHECK(tail < 1e-12 * t1);

    // gamma -> 0: the sum is a Riemann approximation of the Gaussian
    // integral, so sum * sqrt(gamma) -> sqrt(pi).
    CHECK(theta_sum(1e-6) * std::sqrt(1e-6) ==
          doctest::Approx(std::sqrt(M_PI)).epsilon(1e-3));

    ThetaReport rep = theta_sum_check({1e-6, 1e-4, 1e-2, 0.5, 1.0, 2.0}, 2.0);
    CHECK(rep.rows.size() == 6);
    CHECK(rep.all_ge_one);
    CHECK(rep.c_hat >= 1.0);
    CHECK(rep.c_hat < 3.0);
    for (const ThetaRow& row : rep.rows) CHECK(row.sum >= 1.0);
}

TEST_CASE("parameter windows are enforced") {
    CHECK_THROWS_AS((void)profile(0, 10, 0.5), std::invalid_argument);
    CHECK_THROWS_AS((void)profile(5, 0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS((void)profile(5, 10, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)sum_S(1, 10, 0.5), std::invalid_argument);
    CHECK_THROWS_AS((void)theta_sum(0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)theta_sum(-1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)theta_sum_check({3.0}, 2.0), std::invalid_argument);
    CHECK_THROWS_AS((void)theta_sum_check({1.0}, 0.0), std::invalid_argument);
}

}  // TEST_SUITE("laplace")

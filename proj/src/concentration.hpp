// Concentration toolkit for sums of independent variables with
// stretched-exponential tails P(X_i >= t) <= C_1 exp(-rho_i t^{3/2}) and
// decaying scales rho_i^{-1}.  Three ingredients:
//
//   * sigma sums: sigma_2 = sum rho_i^{-2} and sigma_{2/3} = sum rho_i^{-2/3},
//     the two scale aggregates the tail bound is phrased in, with certified
//     truncation for infinite power-geometric families rho_i = a i^p r^i;
//   * the moment-generating-function bound  E[e^{lambda X}] <=
//     exp(C C_1 (lambda rho^{-2/3} + lambda^3 rho^{-2})), checked against
//     certified quadrature of the exact test law with survival
//     min(1, C_1 e^{-rho t^{3/2}}) (the law that saturates the hypothesis);
//   * the sum tail  P(sum_i X_i >= t + C C_1 sigma_{2/3}) <=
//     exp(-c sigma_2^{-1/2} t^{3/2}), probed by inverse-CDF simulation with
//     Wilson intervals and a slope fit of log(-log P) against log t.
//
// The slope diagnostic defaults to a zero shift: for a single rate the test
// law's tail is exactly exp(-rho t^{3/2}) from t = 0, giving slope exactly
// 3/2, whereas any mean shift provably drags the measurable-window slope
// toward 1.  Theorem-shaped rows instead use shift_c = mean_prefactor()
// (= Gamma(5/3), the exact mean E[X] = Gamma(5/3) rho^{-2/3} at C_1 = 1).

#pragma once

#include "rng.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace qpt {

// Gamma(5/3): E[X] for survival exp(-rho t^{3/2}) is this times rho^{-2/3}.
double mean_prefactor();

// ---------------------------------------------------------------------------
// Sigma sums.

struct SigmaSums {
    double sigma2 = 0.0;
    double sigma23 = 0.0;
    double tail2 = 0.0;        // certified truncation remainders (absolute)
    double tail23 = 0.0;
    bool   sigma23_finite = true;
};

// Finite family, exact compensated sums; rates must be positive.
SigmaSums sigma_sums(const std::vector<double>& rates);

// Infinite family rho_i = a i^p r^i, i >= 1, with a > 0, p >= 0, r >= 1.
// Sums until the remainder certificate (geometric-ratio bound for r > 1,
// integral test for r = 1) drops below rel_tol of the accumulated value.
// For r = 1 the sum sigma_s converges only when p s > 1; a divergent
// sigma_{2/3} is reported as infinity with sigma23_finite = false.
SigmaSums sigma_sums_power_geometric(double a, double p, double r,
                                     double rel_tol = 1e-12);

struct TailFamily {
    std::vector<double> rates;
    double c1 = 1.0;
    double sigma2 = 0.0;
    double sigma23 = 0.0;
};

// Validates positivity and fills in the sigma sums.
TailFamily tail_family(std::vector<double> rates, double c1 = 1.0);

// ---------------------------------------------------------------------------
// Exact test law: survival min(1, c1 e^{-rho t^{3/2}}) on [0, infinity).

// Inverse-CDF sample; for c1 < 1 the law has an atom of mass 1 - c1 at 0.
double stretched_exponential_sample(RngStream& rng, double rho, double c1 = 1.0);

// E[e^{lambda X}] by certified quadrature of the survival identity
// E[e^{lambda X}] = 1 + lambda int_0^inf e^{lambda x} P(X > x) dx.
// Requires lambda >= 0; the peak exponent is factored out so nothing
// overflows below exp(700).
double mgf_stretched(double c1, double rho, double lambda);

struct MgfRow {
    double rho = 0.0;
    double lambda = 0.0;
    double log_mgf = 0.0;
    double arg = 0.0;    // c1 (lambda rho^{-2/3} + lambda^3 rho^{-2})
    double c_hat = 0.0;  // log_mgf / arg
};

struct MgfReport {
    std::vector<MgfRow> rows;
    double c_hat_max = 0.0;
    // Largest c_hat per rho, in grid order; the bound's content is that one
    // constant works for every rho, i.e. these stay within a fixed factor.
    std::vector<std::pair<double, double>> per_rho_max;
    bool uniform_within_factor2 = true;
};

// Requires positive rho and lambda grids.
MgfReport mgf_bound_check(double c1, const std::vector<double>& rho_grid,
                          const std::vector<double>& lambda_grid);

// ---------------------------------------------------------------------------
// Sum tail.

struct SumTailRow {
    double t = 0.0;
    double p_hat = 0.0;
    double lo = 0.0, hi = 0.0;  // 99% Wilson interval
    double minus_log_p = 0.0;   // 0 when p_hat hits 0 or 1
};

struct SumTailReport {
    std::vector<SumTailRow> rows;
    double shift = 0.0;        // shift_c * c1 * sigma23
    double sample_mean = 0.0;  // of the simulated sums
    // Fit of log(-log p_hat) on log t over rows with p_hat inside the
    // window; the tail exponent 3/2 is the prediction.
    double slope = 0.0;
    long   fit_points = 0;
    // min over the window of (-log p_hat) / (sigma2^{-1/2} t^{3/2}), the
    // binding fitted constant of the tail bound.
    double c_hat_min = 0.0;
    bool   monotone = true;    // p_hat nonincreasing in t
};

// Simulates sum_i X_i on one RngStream per sample (stream id = sample
// index), estimates P(sum >= t + shift) over t_grid.
SumTailReport sum_tail_check(const TailFamily& family,
                             const std::vector<double>& t_grid, long samples,
                             std::uint64_t seed, double shift_c = 0.0,
                             double window_lo = 1e-4, double window_hi = 1e-1);

}  // namespace qpt

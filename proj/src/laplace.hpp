// Laplace-method reference quantities for the factorial-moment sum
//
//     S = sum_{i=1}^{k-1} g(i/k) exp(k f(i/k)),
//     f(x) = x log(1/q) + 2 H(x) + (k/N)(1 - x),   g(x) = 1 / (x (1-x)),
//
// with H the binary entropy.  The concave profile f peaks at the closed-form
// point x0 = (1 + sqrt(q) e^{k/2N})^{-1}, where it takes the value
// log[(1 + sqrt(q) e^{k/2N})^2 / q]; Laplace's method then predicts
//
//     S = Theta( q^{-1/4} k^{1/2} [ (1 + sqrt(q) e^{k/2N})^2 / q ]^k )
//
// uniformly over q >= k^{-2} and k <= N.  The module evaluates S exactly in
// log scale (magnitudes reach exp(thousands)), exposes the profile with its
// stationarity/concavity certificates, sweeps the predicted ratio over
// parameter grids, and bounds the Jacobi-theta sum sum_{i in Z} e^{-gamma i^2}
// that caps the discretized Gaussian peak.
//
// Everything here is plain double arithmetic in log scale with fixed-order
// compensated summation: values are reproducible bit for bit and no
// intermediate can overflow.

#pragma once

#include <utility>
#include <vector>

namespace qpt {

// ---------------------------------------------------------------------------
// Profile.

struct LaplaceProfile {
    long   k = 0;
    long   N = 0;
    double q = 0.0;

    double x0 = 0.0;      // (1 + sqrt(q) e^{k/2N})^{-1}, the maximizer of f
    double f_x0 = 0.0;    // f(x0) = log[(1 + sqrt(q) e^{k/2N})^2 / q]
    double fpp_x0 = 0.0;  // f''(x0) = -(1 + sqrt(q) e^{k/2N})^2 / (sqrt(q) e^{k/2N})
    double stationarity_residual = 0.0;  // |f'(x0)|, pure roundoff

    double f(double x) const;  // x in (0, 1)
    double g(double x) const;
    double f_prime(double x) const;
};

// Requires k >= 1, N >= 1, 0 < q < 1.
LaplaceProfile profile(long k, long N, double q);

// |x0 - argmax of f over the grid {h, 2h, ...}|; the closed form must win
// against brute force to within one grid step plus curvature slack.
double profile_argmax_gap(const LaplaceProfile& p, double step = 1e-6);

// ---------------------------------------------------------------------------
// The sum.

// log S, evaluated term by term in log scale (max-shifted, compensated,
// fixed ascending order).  Requires k >= 2 so the sum is nonempty.
double sum_S(long k, long N, double q);

// ---------------------------------------------------------------------------
// Ratio sweep against the Laplace prediction.

struct LaplaceCheckRow {
    double q = 0.0;
    long   k = 0;
    long   N = 0;
    double log_S = 0.0;
    double log_ref = 0.0;    // log of q^{-1/4} k^{1/2} e^{k f(x0)}
    double log_ratio = 0.0;  // log_S - log_ref
};

struct LaplaceReport {
    std::vector<LaplaceCheckRow> rows;
    double ratio_log_min = 0.0;   // envelope of log_ratio over the grid
    double ratio_log_max = 0.0;
    // Per (q, N/k multiplier) series: slope of log_ratio against log k.
    // Flat slopes are the content of the prediction (the k-dependence
    // q^{-1/4} k^{1/2} e^{k f(x0)} is exactly right).
    struct Slope {
        double q = 0.0;
        double n_over_k = 0.0;
        double slope = 0.0;
    };
    std::vector<Slope> slopes;
    double max_abs_slope = 0.0;
    double max_stationarity = 0.0;  // worst |f'(x0)| seen
    bool   curvature_negative = true;  // f''(x0) < 0 everywhere
};

// Sweeps (q, k, N = round(m k)) over the grids, keeping the window the
// prediction is stated for: q >= k^{-2} and k <= N.  Multipliers m < 1 are
// therefore skipped.
LaplaceReport bound_check_S(const std::vector<long>& k_grid,
                            const std::vector<double>& n_over_k,
                            const std::vector<double>& q_grid);

// ---------------------------------------------------------------------------
// Theta sum.

// sum_{i in Z} e^{-gamma i^2} with a certified geometric truncation bound;
// requires gamma > 0.  The certificate (absolute) lands in *tail_bound when
// given and is kept below 1e-12 of the returned value.
double theta_sum(double gamma, double* tail_bound = nullptr);

struct ThetaRow {
    double gamma = 0.0;
    double sum = 0.0;
    double scaled = 0.0;  // sum * sqrt(gamma), the quantity with a limit
};

struct ThetaReport {
    std::vector<ThetaRow> rows;
    double c_hat = 0.0;       // fitted C: max of scaled and 1/scaled over rows
    bool   all_ge_one = true; // the i = 0 term alone forces sum >= 1
};

// Checks C^{-1} gamma^{-1/2} <= sum <= C gamma^{-1/2} on the grid, which
// must lie in (0, M]; reports the fitted C.
ThetaReport theta_sum_check(const std::vector<double>& gamma_grid, double M);

}  // namespace qpt

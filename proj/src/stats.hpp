// Statistical test helpers used by the experiment battery: Kolmogorov-Smirnov
// (one- and two-sample), chi-square with automatic bin pooling, Wilson score
// intervals, and least-squares lines. KS p-values use the asymptotic
// Kolmogorov series with the Stephens small-sample correction; for discrete
// data both are conservative (the true rejection rate is lower), which is the
// safe direction for equality-in-law checks.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace qpt {

// Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2); survival function of the
// Kolmogorov distribution.
double kolmogorov_Q(double x);

struct KsResult {
    double statistic = 0.0;  // sup-norm distance D
    double p_value = 1.0;
    double n_effective = 0.0;
};

// One-sample: data vs a cdf evaluated at each data point. `data` need not be
// sorted. For a discrete model cdf the statistic needs the left limit F(x-)
// at the atoms; pass it explicitly (e.g. x -> cdf(x-1) for integer support),
// otherwise F is treated as continuous and ties only make the test
// conservative.
KsResult ks_one_sample(std::vector<double> data,
                       const std::function<double(double)>& cdf,
                       const std::function<double(double)>& cdf_left = nullptr);

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct Chi2Result {
    double statistic = 0.0;
    long dof = 0;
    double p_value = 1.0;
    long pooled_bins = 0;  // bins after pooling low-expectation cells
};

// observed[i] counts against probabilities p[i] (need not sum to 1; the
// remainder becomes an overflow cell). Adjacent cells are pooled until every
// expected count is >= min_expected.
Chi2Result chi2_gof(const std::vector<long>& observed, const std::vector<double>& p,
                    long n_total, double min_expected = 5.0);

// Two independent count vectors over the same cells (homogeneity test).
Chi2Result chi2_two_sample(const std::vector<long>& a, const std::vector<long>& b,
                           double min_expected = 5.0);

struct Interval {
    double lo = 0.0, hi = 1.0;
};

// Wilson score interval for a binomial proportion at confidence z (e.g.
// z = 2.5758 for 99%).
Interval wilson_interval(long successes, long n, double z);

struct LineFit {
    double slope = 0.0, intercept = 0.0;
    double max_residual = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Compensated (Kahan) accumulation; the fixed-order reductions that make
// reports deterministic all run through this.
class KahanSum {
  public:
    void add(double v) {
        const double y = v - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

  private:
    double s_ = 0.0, c_ = 0.0;
};

}  // namespace qpt

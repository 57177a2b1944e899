#include "concentration.hpp"

#include "prec.hpp"
#include "stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace qpt {

namespace {

// Adaptive Simpson with Richardson control; f must be smooth on [a, b].
double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole, double tol,
                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Remainder of sum_{i>I} (a i^p r^i)^{-s}: geometric-ratio bound when
// r > 1 (term ratios are at most r^{-s}), integral test at r = 1.
double power_geo_remainder(double a, double p, double r, double s, long I) {
    const double ps = p * s;
    if (r > 1.0) {
        const double next =
            std::pow(a * std::pow(double(I + 1), p), -s) *
            std::pow(r, -s * double(I + 1));
        return next / (1.0 - std::pow(r, -s));
    }
    return std::pow(a, -s) * std::pow(double(I), 1.0 - ps) / (ps - 1.0);
}

double sigma_power_geometric(double a, double p, double r, double s,
                             double rel_tol, bool* finite) {
    *finite = (r > 1.0) || (p * s > 1.0);
    if (!*finite) return std::numeric_limits<double>::infinity();
    KahanSum acc;
    for (long i = 1; i <= 50000000; ++i) {
        acc.add(std::pow(a * std::pow(double(i), p), -s) *
                (r > 1.0 ? std::pow(r, -s * double(i)) : 1.0));
        if (i >= 8 && power_geo_remainder(a, p, r, s, i) <= rel_tol * acc.value())
            return acc.value();
    }
    throw PrecisionError("sigma_sums_power_geometric: no convergence within cap");
}

}  // namespace

double mean_prefactor() { return 0.9027452929509336; }  // Gamma(5/3)

SigmaSums sigma_sums(const std::vector<double>& rates) {
    if (rates.empty()) throw std::invalid_argument("sigma_sums: empty family");
    SigmaSums s;
    KahanSum s2, s23;
    for (double r : rates) {
        if (!(r > 0.0)) throw std::invalid_argument("sigma_sums: rates > 0");
        s2.add(1.0 / (r * r));
        s23.add(std::pow(r, -2.0 / 3.0));
    }
    s.sigma2 = s2.value();
    s.sigma23 = s23.value();
    return s;
}

SigmaSums sigma_sums_power_geometric(double a, double p, double r,
                                     double rel_tol) {
    if (!(a > 0.0) || !(p >= 0.0) || !(r >= 1.0))
        throw std::invalid_argument(
            "sigma_sums_power_geometric: need a > 0, p >= 0, r >= 1");
    if (!(rel_tol > 0.0 && rel_tol <= 1e-6))
        throw std::invalid_argument(
            "sigma_sums_power_geometric: rel_tol in (0, 1e-6]");
    SigmaSums s;
    bool fin2 = false, fin23 = false;
    s.sigma2 = sigma_power_geometric(a, p, r, 2.0, rel_tol, &fin2);
    if (!fin2)
        throw std::invalid_argument(
            "sigma_sums_power_geometric: sigma_2 diverges (p <= 1/2, r = 1)");
    s.tail2 = rel_tol * s.sigma2;
    s.sigma23 = sigma_power_geometric(a, p, r, 2.0 / 3.0, rel_tol, &fin23);
    s.sigma23_finite = fin23;
    s.tail23 = fin23 ? rel_tol * s.sigma23 : 0.0;
    return s;
}

TailFamily tail_family(std::vector<double> rates, double c1) {
    if (!(c1 > 0.0)) throw std::invalid_argument("tail_family: c1 > 0");
    TailFamily fam;
    const SigmaSums s = sigma_sums(rates);  // validates positivity
    fam.rates = std::move(rates);
    fam.c1 = c1;
    fam.sigma2 = s.sigma2;
    fam.sigma23 = s.sigma23;
    return fam;
}

double stretched_exponential_sample(RngStream& rng, double rho, double c1) {
    const double u = rng.u01_pos();
    const double z = std::log(c1 / u);
    if (z <= 0.0) return 0.0;  // the atom at 0 when c1 < 1
    return std::pow(z / rho, 2.0 / 3.0);
}

double mgf_stretched(double c1, double rho, double lambda) {
    if (!(c1 > 0.0) || !(rho > 0.0))
        throw std::invalid_argument("mgf_stretched: c1, rho > 0");
    if (!(lambda >= 0.0)) throw std::invalid_argument("mgf_stretched: lambda >= 0");
    if (lambda == 0.0) return 1.0;

    // Survival is 1 up to x0 (empty for c1 <= 1), then c1 e^{-rho x^{3/2}}.
    const double x0 =
        c1 > 1.0 ? std::pow(std::log(c1) / rho, 2.0 / 3.0) : 0.0;

    // Cut T: phi(x) = rho x^{3/2} - lambda x at least 45 with slope at
    // least max(1, lambda), so the dropped tail of lambda c1 int e^{-phi}
    // is below c1 e^{-45}.
    double T = std::max({x0 + 1.0, std::pow((lambda + 1.0) / (1.5 * rho), 2),
                         std::pow(2.0 * lambda / (1.5 * rho), 2)});
    for (int it = 0; it < 64; ++it)
        T = std::max(T, std::pow((45.0 + lambda * T) / rho, 2.0 / 3.0));

    // Factor the peak out of the exponent so the integrand lives in [0, 1].
    const double xstar =
        std::min(std::max(std::pow(2.0 * lambda / (3.0 * rho), 2), x0), T);
    const double peak = lambda * xstar - rho * std::pow(xstar, 1.5);
    if (peak + lambda * x0 > 690.0)
        throw std::overflow_error("mgf_stretched: value beyond exp(690)");
    auto h = [&](double x) {
        return std::exp(lambda * x - rho * std::pow(x, 1.5) - peak);
    };
    const double body =
        adaptive_simpson(h, x0, T, 1e-13 * std::max(1.0, T - x0));
    const double head = c1 > 1.0 ? std::expm1(lambda * x0) : 0.0;
    return 1.0 + head + lambda * c1 * std::exp(peak) * body;
}

MgfReport mgf_bound_check(double c1, const std::vector<double>& rho_grid,
                          const std::vector<double>& lambda_grid) {
    MgfReport rep;
    double per_rho_min_of_max = std::numeric_limits<double>::infinity();
    for (double rho : rho_grid) {
        double rho_max = 0.0;
        for (double lambda : lambda_grid) {
            if (!(lambda > 0.0))
                throw std::invalid_argument("mgf_bound_check: lambda > 0");
            MgfRow row;
            row.rho = rho;
            row.lambda = lambda;
            row.log_mgf = std::log(mgf_stretched(c1, rho, lambda));
            row.arg = c1 * (lambda * std::pow(rho, -2.0 / 3.0) +
                            std::pow(lambda, 3) / (rho * rho));
            row.c_hat = row.log_mgf / row.arg;
            rho_max = std::max(rho_max, row.c_hat);
            rep.c_hat_max = std::max(rep.c_hat_max, row.c_hat);
            rep.rows.push_back(row);
        }
        rep.per_rho_max.emplace_back(rho, rho_max);
        per_rho_min_of_max = std::min(per_rho_min_of_max, rho_max);
    }
    rep.uniform_within_factor2 =
        rep.c_hat_max <= 2.0 * per_rho_min_of_max;
    return rep;
}

SumTailReport sum_tail_check(const TailFamily& family,
                             const std::vector<double>& t_grid, long samples,
                             std::uint64_t seed, double shift_c,
                             double window_lo, double window_hi) {
    if (family.rates.empty())
        throw std::invalid_argument("sum_tail_check: empty family");
    if (samples < 1) throw std::invalid_argument("sum_tail_check: samples >= 1");
    SumTailReport rep;
    rep.shift = shift_c * family.c1 * family.sigma23;

    std::vector<double> sums(static_cast<std::size_t>(samples));
    KahanSum mean_acc;
    for (long j = 0; j < samples; ++j) {
        RngStream rng(seed, static_cast<std::uint64_t>(j));
        KahanSum s;
        for (double rho : family.rates)
            s.add(stretched_exponential_sample(rng, rho, family.c1));
        sums[std::size_t(j)] = s.value();
        mean_acc.add(s.value());
    }
    rep.sample_mean = mean_acc.value() / double(samples);

    std::vector<double> xs, ys;
    double prev_p = 2.0;
    rep.c_hat_min = std::numeric_limits<double>::infinity();
    for (double t : t_grid) {
        SumTailRow row;
        row.t = t;
        long cnt = 0;
        for (double v : sums) cnt += (v >= t + rep.shift);
        row.p_hat = double(cnt) / double(samples);
        const Interval iv = wilson_interval(cnt, samples, 2.5758);
        row.lo = iv.lo;
        row.hi = iv.hi;
        if (row.p_hat > 0.0 && row.p_hat < 1.0)
            row.minus_log_p = -std::log(row.p_hat);
        if (row.p_hat > prev_p + 1e-15) rep.monotone = false;
        prev_p = row.p_hat;
        if (t > 0.0 && row.p_hat >= window_lo && row.p_hat <= window_hi) {
            xs.push_back(std::log(t));
            ys.push_back(std::log(row.minus_log_p));
            rep.c_hat_min =
                std::min(rep.c_hat_min, row.minus_log_p * std::sqrt(family.sigma2) /
                                            std::pow(t, 1.5));
        }
        rep.rows.push_back(row);
    }
    rep.fit_points = long(xs.size());
    if (rep.fit_points >= 2) rep.slope = fit_line(xs, ys).slope;
    return rep;
}

}  // namespace qpt

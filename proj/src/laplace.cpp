#include "laplace.hpp"

#include "stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace qpt {

namespace {

double entropy(double x) { return -x * std::log(x) - (1.0 - x) * std::log(1.0 - x); }

}  // namespace

double LaplaceProfile::f(double x) const {
    return x * std::log(1.0 / q) + 2.0 * entropy(x) +
           (double(k) / double(N)) * (1.0 - x);
}

double LaplaceProfile::g(double x) const { return 1.0 / (x * (1.0 - x)); }

double LaplaceProfile::f_prime(double x) const {
    // H'(x) = log((1-x)/x).
    return std::log(1.0 / q) + 2.0 * std::log((1.0 - x) / x) - double(k) / double(N);
}

LaplaceProfile profile(long k, long N, double q) {
    if (k < 1 || N < 1) throw std::invalid_argument("profile: k, N >= 1");
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("profile: 0 < q < 1");
    LaplaceProfile p;
    p.k = k;
    p.N = N;
    p.q = q;
    const double s = std::sqrt(q) * std::exp(0.5 * double(k) / double(N));
    p.x0 = 1.0 / (1.0 + s);
    p.f_x0 = std::log((1.0 + s) * (1.0 + s) / q);
    p.fpp_x0 = -(1.0 + s) * (1.0 + s) / s;
    p.stationarity_residual = std::abs(p.f_prime(p.x0));
    return p;
}

double profile_argmax_gap(const LaplaceProfile& p, double step) {
    if (!(step > 0.0 && step < 0.5))
        throw std::invalid_argument("profile_argmax_gap: 0 < step < 1/2");
    double best_x = step, best_f = p.f(step);
    for (double x = 2.0 * step; x < 1.0 - 0.5 * step; x += step) {
        const double v = p.f(x);
        if (v > best_f) {
            best_f = v;
            best_x = x;
        }
    }
    return std::abs(best_x - p.x0);
}

double sum_S(long k, long N, double q) {
    if (k < 2) throw std::invalid_argument("sum_S: k >= 2");
    const LaplaceProfile p = profile(k, N, q);
    // Max-shifted log-sum-exp over i = 1..k-1, ascending, compensated.
    std::vector<double> t(std::size_t(k - 1));
    double shift = -1e308;
    for (long i = 1; i < k; ++i) {
        const double x = double(i) / double(k);
        const double ti = std::log(p.g(x)) + double(k) * p.f(x);
        t[std::size_t(i - 1)] = ti;
        shift = std::max(shift, ti);
    }
    KahanSum acc;
    for (double ti : t) acc.add(std::exp(ti - shift));
    return shift + std::log(acc.value());
}

LaplaceReport bound_check_S(const std::vector<long>& k_grid,
                            const std::vector<double>& n_over_k,
                            const std::vector<double>& q_grid) {
    LaplaceReport rep;
    rep.ratio_log_min = 1e308;
    rep.ratio_log_max = -1e308;
    // Collect log_ratio per (q, multiplier) series to fit slopes in k.
    std::map<std::pair<double, double>, std::pair<std::vector<double>,
                                                  std::vector<double>>>
        series;
    for (double q : q_grid) {
        for (long k : k_grid) {
            if (k < 2 || q < 1.0 / (double(k) * double(k))) continue;
            for (double m : n_over_k) {
                const long N = std::lround(m * double(k));
                if (N < k) continue;  // the prediction window is k <= N
                const LaplaceProfile p = profile(k, N, q);
                LaplaceCheckRow row;
                row.q = q;
                row.k = k;
                row.N = N;
                row.log_S = sum_S(k, N, q);
                row.log_ref = -0.25 * std::log(q) + 0.5 * std::log(double(k)) +
                              double(k) * p.f_x0;
                row.log_ratio = row.log_S - row.log_ref;
                rep.ratio_log_min = std::min(rep.ratio_log_min, row.log_ratio);
                rep.ratio_log_max = std::max(rep.ratio_log_max, row.log_ratio);
                rep.max_stationarity =
                    std::max(rep.max_stationarity, p.stationarity_residual);
                if (p.fpp_x0 >= 0.0) rep.curvature_negative = false;
                auto& [xs, ys] = series[{q, m}];
                xs.push_back(std::log(double(k)));
                ys.push_back(row.log_ratio);
                rep.rows.push_back(row);
            }
        }
    }
    for (auto& [key, xy] : series) {
        if (xy.first.size() < 2) continue;
        const LineFit fit = fit_line(xy.first, xy.second);
        rep.slopes.push_back({key.first, key.second, fit.slope});
        rep.max_abs_slope = std::max(rep.max_abs_slope, std::abs(fit.slope));
    }
    return rep;
}

double theta_sum(double gamma, double* tail_bound) {
    // The floor keeps the certified cut finite: below it the term ratio
    // rounds to 1 in double precision.
    if (!(gamma >= 1e-12)) throw std::invalid_argument("theta_sum: gamma >= 1e-12");
    // 1 + 2 sum_{i>=1} e^{-gamma i^2}.  Successive term ratios
    // e^{-gamma(2i+1)} decrease, so the tail from i on is at most
    // t_i / (1 - r_i); cut once that certificate is negligible.
    KahanSum acc;
    acc.add(1.0);
    double tail = 0.0;
    for (long i = 1;; ++i) {
        const double term = std::exp(-gamma * double(i) * double(i));
        const double r = std::exp(-gamma * double(2 * i + 1));
        if (2.0 * term / (1.0 - r) <= 1e-13 * acc.value()) {
            tail = 2.0 * term / (1.0 - r);
            break;
        }
        acc.add(2.0 * term);
    }
    if (tail_bound) *tail_bound = tail;
    return acc.value();
}

ThetaReport theta_sum_check(const std::vector<double>& gamma_grid, double M) {
    if (!(M > 0.0)) throw std::invalid_argument("theta_sum_check: M > 0");
    ThetaReport rep;
    for (double gamma : gamma_grid) {
        if (!(gamma > 0.0 && gamma <= M))
            throw std::invalid_argument("theta_sum_check: grid outside (0, M]");
        ThetaRow row;
        row.gamma = gamma;
        row.sum = theta_sum(gamma);
        row.scaled = row.sum * std::sqrt(gamma);
        if (row.sum < 1.0) rep.all_ge_one = false;
        rep.c_hat = std::max({rep.c_hat, row.scaled, 1.0 / row.scaled});
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace qpt

#include "stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace qpt {

double kolmogorov_Q(double x) {
    if (x <= 0.0) return 1.0;
    if (x > 10.0) return 0.0;
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * double(k) * double(k) * x * x);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-18) break;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

namespace {

// Stephens' finite-n adjustment: p ~ Q((sqrt(n) + 0.12 + 0.11/sqrt(n)) D).
double ks_p(double d, double n_eff) {
    const double rn = std::sqrt(n_eff);
    return kolmogorov_Q((rn + 0.12 + 0.11 / rn) * d);
}

}  // namespace

KsResult ks_one_sample(std::vector<double> data,
                       const std::function<double(double)>& cdf,
                       const std::function<double(double)>& cdf_left) {
    if (data.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
    std::sort(data.begin(), data.end());
    const double n = double(data.size());
    double d = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        // with ties, the empirical cdf jumps past the whole tie block
        std::size_t j = i;
        while (j + 1 < data.size() && data[j + 1] == data[i]) ++j;
        const double f = cdf(data[i]);
        const double fl = cdf_left ? cdf_left(data[i]) : f;
        const double lo = double(i) / n;        // empirical cdf just below
        const double hi = double(j + 1) / n;    // empirical cdf at the value
        d = std::max(d, std::max(std::abs(fl - lo), std::abs(hi - f)));
        i = j;
    }
    return {d, ks_p(d, n), n};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = double(a.size()), nb = double(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(double(i) / na - double(j) / nb));
    }
    const double n_eff = na * nb / (na + nb);
    return {d, ks_p(d, n_eff), n_eff};
}

namespace {

Chi2Result chi2_from_cells(const std::vector<double>& observed,
                           const std::vector<double>& expected, long fitted_params,
                           double min_expected) {
    // pool adjacent cells until each expected count reaches min_expected
    std::vector<double> obs_p, exp_p;
    double o_acc = 0.0, e_acc = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        o_acc += observed[i];
        e_acc += expected[i];
        if (e_acc >= min_expected) {
            obs_p.push_back(o_acc);
            exp_p.push_back(e_acc);
            o_acc = e_acc = 0.0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0.0) {
        if (!exp_p.empty()) {
            obs_p.back() += o_acc;
            exp_p.back() += e_acc;
        } else {
            obs_p.push_back(o_acc);
            exp_p.push_back(e_acc);
        }
    }
    Chi2Result r;
    r.pooled_bins = long(exp_p.size());
    r.dof = r.pooled_bins - 1 - fitted_params;
    if (r.dof < 1) {
        // degenerate after pooling: no evidence against the null
        r.dof = 0;
        r.statistic = 0.0;
        r.p_value = 1.0;
        return r;
    }
    double stat = 0.0;
    for (std::size_t i = 0; i < exp_p.size(); ++i) {
        const double diff = obs_p[i] - exp_p[i];
        stat += diff * diff / exp_p[i];
    }
    r.statistic = stat;
    r.p_value = boost::math::gamma_q(double(r.dof) / 2.0, stat / 2.0);
    return r;
}

}  // namespace

Chi2Result chi2_gof(const std::vector<long>& observed, const std::vector<double>& p,
                    long n_total, double min_expected) {
    if (observed.size() != p.size())
        throw std::invalid_argument("chi2_gof: size mismatch");
    std::vector<double> obs(observed.begin(), observed.end());
    std::vector<double> expd(p.size());
    double mass = 0.0;
    long counted = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < 0.0) throw std::invalid_argument("chi2_gof: negative probability");
        expd[i] = p[i] * double(n_total);
        mass += p[i];
        counted += observed[i];
    }
    if (mass > 1.0 + 1e-9) throw std::invalid_argument("chi2_gof: probabilities exceed 1");
    // overflow cell for the unlisted remainder of the support
    obs.push_back(double(n_total - counted));
    expd.push_back(std::max(0.0, 1.0 - mass) * double(n_total));
    return chi2_from_cells(obs, expd, 0, min_expected);
}

Chi2Result chi2_two_sample(const std::vector<long>& a, const std::vector<long>& b,
                           double min_expected) {
    if (a.size() != b.size()) throw std::invalid_argument("chi2_two_sample: size mismatch");
    double na = 0.0, nb = 0.0;
    for (long v : a) na += double(v);
    for (long v : b) nb += double(v);
    if (na == 0.0 || nb == 0.0)
        throw std::invalid_argument("chi2_two_sample: empty sample");
    // For cell i with row totals na, nb: expected_a = (a_i+b_i) * na/(na+nb).
    // Fold the two samples into one statistic by treating each sample's cells
    // against its expectation; dof = pooled_bins - 1.
    std::vector<double> obs, expd;
    const double ra = na / (na + nb), rb = nb / (na + nb);
    // pool in lockstep so both samples get identical cell boundaries
    double oa = 0.0, ob = 0.0;
    std::vector<std::pair<double, double>> cells;
    for (std::size_t i = 0; i < a.size(); ++i) {
        oa += double(a[i]);
        ob += double(b[i]);
        const double tot = oa + ob;
        if (tot * ra >= min_expected && tot * rb >= min_expected) {
            cells.emplace_back(oa, ob);
            oa = ob = 0.0;
        }
    }
    if ((oa > 0.0 || ob > 0.0)) {
        if (!cells.empty()) {
            cells.back().first += oa;
            cells.back().second += ob;
        } else {
            cells.emplace_back(oa, ob);
        }
    }
    Chi2Result r;
    r.pooled_bins = long(cells.size());
    r.dof = r.pooled_bins - 1;
    if (r.dof < 1) {
        r.dof = 0;
        r.p_value = 1.0;
        return r;
    }
    double stat = 0.0;
    for (const auto& [ca, cb] : cells) {
        const double tot = ca + cb;
        const double ea = tot * ra, eb = tot * rb;
        stat += (ca - ea) * (ca - ea) / ea + (cb - eb) * (cb - eb) / eb;
    }
    r.statistic = stat;
    r.p_value = boost::math::gamma_q(double(r.dof) / 2.0, stat / 2.0);
    return r;
}

Interval wilson_interval(long successes, long n, double z) {
    if (n <= 0) throw std::invalid_argument("wilson_interval: n must be positive");
    if (successes < 0 || successes > n)
        throw std::invalid_argument("wilson_interval: successes outside [0,n]");
    const double nn = double(n), p = double(successes) / nn, z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half =
        z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need >= 2 points of equal length");
    KahanSum sx, sy;
    const double n = double(x.size());
    for (double v : x) sx.add(v);
    for (double v : y) sy.add(v);
    const double mx = sx.value() / n, my = sy.value() / n;
    KahanSum sxx, sxy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx.add((x[i] - mx) * (x[i] - mx));
        sxy.add((x[i] - mx) * (y[i] - my));
    }
    if (sxx.value() == 0.0) throw std::invalid_argument("fit_line: degenerate x values");
    LineFit f;
    f.slope = sxy.value() / sxx.value();
    f.intercept = my - f.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i)
        f.max_residual =
            std::max(f.max_residual, std::abs(y[i] - (f.intercept + f.slope * x[i])));
    return f;
}

}  // namespace qpt

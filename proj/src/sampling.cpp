#include "sampling.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qpt {

// ---------------------------------------------------------------------------
// q-Geometric

double qgeo_pmf(long s, double xi, double q, double eps) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("qgeo_pmf: q outside (0,1)");
    if (!(xi >= 0.0 && xi <= 1.0)) throw std::domain_error("qgeo_pmf: xi outside [0,1]");
    if (s < 0) return 0.0;
    if (xi == 0.0) return s == 0 ? 1.0 : 0.0;
    if (xi == 1.0) return 0.0;  // (1;q)_inf = 0: all mass escapes to infinity
    double logp = static_cast<double>(s) * std::log(xi) + log_q_pochhammer_inf(xi, q, eps);
    // subtract log (q;q)_s
    double acc = 0.0;
    double qi = q;
    for (long i = 0; i < s; ++i) {
        acc += std::log1p(-qi);
        qi *= q;
    }
    return std::exp(logp - acc);
}

Rational qgeo_weight_exact(long s, const Rational& xi, const Rational& q) {
    if (s < 0) return Rational(0);
    Rational w = 1;
    for (long i = 0; i < s; ++i) w *= xi;
    Rational denom = q_pochhammer<Rational>(q, q, s);
    return w / denom;
}

QGeoTable::QGeoTable(double xi, double q, double tail_eps) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("QGeoTable: q outside (0,1)");
    if (!(xi >= 0.0 && xi < 1.0)) throw std::domain_error("QGeoTable: xi outside [0,1)");
    // Build the pmf by the stable ratio recursion p_{s+1}/p_s = xi/(1-q^{s+1}).
    const double p0 = q_pochhammer_inf(xi, q, tail_eps * 1e-4);
    double p = p0;
    double cum = 0.0;
    double qpow = q;
    // Tail bound after s terms: P(S > s) <= sum_{t>s} xi^t / (q;q)_inf ... use
    // the crude geometric bound p_{s+1} * 1/(1 - xi/(1-q^{s+1})) once the ratio
    // is below 1 (it is for all s once 1-q^{s+1} > xi).
    for (long s = 0; s < 2000000; ++s) {
        cum += p;
        cdf_.push_back(cum);
        const double ratio = xi / (1.0 - qpow);
        const double pnext = p * ratio;
        if (ratio < 1.0) {
            const double tail = pnext / (1.0 - ratio);
            if (tail < tail_eps) {
                tail_mass_ = tail;
                return;
            }
        }
        p = pnext;
        qpow *= q;
    }
    throw PrecisionError("QGeoTable: cdf did not certify below tail_eps within cap");
}

long QGeoTable::sample(RngStream& rng) const {
    const double u = rng.u01();
    // Expected value is small in practice: scan, falling back to binary search.
    if (cdf_.size() <= 8 || u <= cdf_[7]) {
        for (std::size_t s = 0; s < cdf_.size(); ++s)
            if (u < cdf_[s]) return static_cast<long>(s);
        return static_cast<long>(cdf_.size()) - 1;
    }
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) return static_cast<long>(cdf_.size()) - 1;  // tail < tail_eps
    return static_cast<long>(it - cdf_.begin());
}

// ---------------------------------------------------------------------------
// q-deformed beta binomial

namespace {

// log |1 - c*B^i| and its sign, stable for B >> 1 (base q^{-1} factors).
struct SignedLog {
    int sign;     // -1, 0, +1
    double logmag; // log |value|; ignored when sign == 0
};

SignedLog log1m_pow(double log_t) {
    // value = 1 - t with t = exp(log_t)
    if (log_t < -40.0) return {+1, -std::exp(log_t)};              // log1p(-t) ~ -t
    if (log_t > 40.0) return {-1, log_t + std::log1p(-std::exp(-log_t))};
    const double t = std::exp(log_t);
    if (t == 1.0) return {0, 0.0};
    if (t < 1.0) return {+1, std::log1p(-t)};
    return {-1, std::log(t - 1.0)};
}

}  // namespace

double qdbb_pmf(long s, const QDBBParams& params) {
    params.validate();
    const long m = params.m;
    if (s < 0 || s > m) return 0.0;
    const double logq = std::log(params.q);
    const double log_base = params.base_sign == 1 ? logq : -logq;

    int sign = 1;
    double logmag = 0.0;
    if (params.xi == 0.0) {
        if (s != 0) return 0.0;
        return 1.0;  // phi(0|m) = binom(m,0) = 1 when xi = 0, eta = 0
    }
    const double log_xi = std::log(params.xi);

    // xi^s (xi; base)_{m-s}
    logmag += static_cast<double>(s) * log_xi;
    for (long i = 0; i < m - s; ++i) {
        SignedLog f = log1m_pow(log_xi + static_cast<double>(i) * log_base);
        if (f.sign == 0) return 0.0;
        sign *= f.sign;
        logmag += f.logmag;
    }

    // binom(m, s)_{base}. For base q^{-1} use
    // binom(m,s)_{q^{-1}} = q^{-s(m-s)} binom(m,s)_q to stay in (0,1)-land.
    if (params.base_sign == 1) {
        logmag += log_q_binomial(m, s, params.q);
    } else {
        logmag += -static_cast<double>(s) * static_cast<double>(m - s) * logq +
                  log_q_binomial(m, s, params.q);
    }

    const double value = sign * std::exp(logmag);
    if (value < -1e-9) {
        std::ostringstream os;
        os << "qdbb_pmf: negative mass " << value << " at s=" << s << ", m=" << m
           << " — parameterization outside the admissible regime";
        throw std::domain_error(os.str());
    }
    return value < 0.0 ? 0.0 : value;
}

Rational qdbb_pmf_exact(long s, const Rational& q, long e, long m) {
    if (e < 0 || m < 0) throw std::domain_error("qdbb_pmf_exact: e, m must be >= 0");
    if (s < 0 || s > m) return Rational(0);
    const long j = m - s;               // shortfall below the maximum
    if (j > e) return Rational(0);      // support: s >= m - e
    // q^{(m-j)(e-j)} (q^{e-j+1}; q)_j binom(m, j)_q
    Rational out = 1;
    Integer expo = Integer(m - j) * Integer(e - j);
    for (Integer i = 0; i < expo; ++i) out *= q;
    Rational zpow = 1;
    for (long i = 0; i < e - j + 1; ++i) zpow *= q;  // q^{e-j+1}
    Rational poch = 1;
    for (long i = 0; i < j; ++i) {
        poch *= (1 - zpow);
        zpow *= q;
    }
    out *= poch;
    out *= q_binomial_exact(m, j, q);
    return out;
}

std::vector<double> qdbb_pmf_table(double q, long e, long m) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("qdbb_pmf_table: q outside (0,1)");
    if (e < 0 || m < 0) throw std::domain_error("qdbb_pmf_table: e, m must be >= 0");
    const double logq = std::log(q);
    std::vector<double> pmf(static_cast<std::size_t>(m) + 1, 0.0);
    const long jmax = std::min(e, m);
    for (long j = 0; j <= jmax; ++j) {
        double lg = static_cast<double>(m - j) * static_cast<double>(e - j) * logq;
        for (long i = 0; i < j; ++i)
            lg += std::log1p(-std::exp(static_cast<double>(e - j + 1 + i) * logq));
        lg += log_q_binomial(m, j, q);
        pmf[static_cast<std::size_t>(m - j)] = std::exp(lg);
    }
    double sum = 0.0;
    for (double p : pmf) sum += p;
    const double err = std::abs(sum - 1.0);
    if (err > 1e-6) {
        std::ostringstream os;
        os << "qdbb_pmf_table: mass sums to " << sum << " (|err| = " << err
           << ") at q=" << q << ", e=" << e << ", m=" << m;
        throw PrecisionError(os.str());
    }
    if (err > 1e-10) {
        for (double& p : pmf) p /= sum;  // defensive renormalization
    }
    return pmf;
}

long qdbb_sample(const QDBBParams& params, RngStream& rng) {
    params.validate();
    if (params.base_sign != -1 || params.xi_log_q < 0)
        throw std::domain_error("qdbb_sample: sampling requires the model regime "
                                "(base q^{-1}, xi = q^e with e >= 0)");
    const auto pmf = qdbb_pmf_table(params.q, params.xi_log_q, params.m);
    const double u = rng.u01();
    double cum = 0.0;
    for (std::size_t s = 0; s < pmf.size(); ++s) {
        cum += pmf[s];
        if (u < cum) return static_cast<long>(s);
    }
    return params.m;
}

long QdbbCache::sample(long e, long m, RngStream& rng) {
    if (m == 0) return 0;
    if (e == 0) return m;  // forced: s >= m - e = m
    const std::uint64_t key =
        (static_cast<std::uint64_t>(e) << 32) | static_cast<std::uint64_t>(m);
    auto it = cdfs_.find(key);
    if (it == cdfs_.end()) {
        auto pmf = qdbb_pmf_table(q_, e, m);
        double cum = 0.0;
        for (double& p : pmf) {
            cum += p;
            p = cum;
        }
        it = cdfs_.emplace(key, std::move(pmf)).first;
    }
    const auto& cdf = it->second;
    const double u = rng.u01();
    auto pos = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (pos == cdf.end()) return m;
    return static_cast<long>(pos - cdf.begin());
}

}  // namespace qpt

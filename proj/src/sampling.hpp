// Exact discrete samplers: Geo(z), q-Geo(xi), and the q-deformed beta
// binomial phi_{q,xi,eta}(s|m) in the regime the particle system uses
// (base q^{-1}, eta = 0, xi an integer power of q).
//
// The base-q^{-1} pmf looks alarming — factors (1 - xi q^{-i}) swing signs and
// blow up — but with xi = q^e, eta = 0 it collapses to an all-positive base-q
// product over the shortfall j = m - s:
//
//   phi(m-j | m) = q^{(m-j)(e-j)} (q^{e-j+1};q)_j binom(m,j)_q,  0 <= j <= min(e,m),
//
// and 0 otherwise (the factor (1 - q^{e-i}) vanishes at i = e). The identity
// is exercised exactly against the literal signed evaluation in the tests.
// Float mode evaluates the positive form in log space; a general sign-tracked
// log-magnitude evaluator covers the literal parameterization.

#pragma once

#include "prec.hpp"
#include "qspecial.hpp"
#include "rng.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace qpt {

// ---------------------------------------------------------------------------
// Geometric: P(X >= k) = z^k, k = 0,1,2,...

inline double geo_pmf(long k, double z) {
    if (!(z >= 0.0 && z < 1.0)) throw std::domain_error("geo_pmf: z outside [0,1)");
    if (k < 0) return 0.0;
    return std::pow(z, static_cast<double>(k)) * (1.0 - z);
}

inline long geo_sample(double z, RngStream& rng) {
    if (!(z >= 0.0 && z < 1.0)) throw std::domain_error("geo_sample: z outside [0,1)");
    if (z == 0.0) return 0;
    const double u = rng.u01_pos();
    if (u > z) return 0;  // fast path: avoids the log most of the time for small z
    return static_cast<long>(std::log(u) / std::log(z));
}

// ---------------------------------------------------------------------------
// q-Geometric: P(S = s) = xi^s (xi;q)_inf / (q;q)_s  on s = 0,1,2,...

double qgeo_pmf(long s, double xi, double q, double eps = 1e-16);
Rational qgeo_weight_exact(long s, const Rational& xi, const Rational& q);
// unnormalized: xi^s / (q;q)_s; the (xi;q)_inf factor is common.

// Cached inverse-CDF table. Complete up to certified tail mass < tail_eps.
class QGeoTable {
  public:
    QGeoTable() = default;
    QGeoTable(double xi, double q, double tail_eps = 1e-12);
    long sample(RngStream& rng) const;
    const std::vector<double>& cdf() const { return cdf_; }
    double tail_mass() const { return tail_mass_; }

  private:
    std::vector<double> cdf_;
    double tail_mass_ = 0.0;
};

// ---------------------------------------------------------------------------
// q-deformed beta binomial.

struct QDBBParams {
    double q = 0.5;     // base magnitude, in (0,1)
    int base_sign = -1; // -1: base q^{-1} (the model's case), +1: base q
    double xi = 0.25;   // >= 0
    double eta = 0.0;   // only 0 is in scope
    long m = 0;         // finite trial count

    // When xi is exactly q^e, set this so exact/positive-form paths engage.
    long xi_log_q = -1;  // negative means "not an exact power"

    void validate() const {
        if (!(q > 0.0 && q < 1.0)) throw std::domain_error("QDBB: q outside (0,1)");
        if (base_sign != 1 && base_sign != -1)
            throw std::domain_error("QDBB: base_sign must be +-1");
        if (xi < 0.0) throw std::domain_error("QDBB: xi < 0");
        if (eta != 0.0) throw std::domain_error("QDBB: eta != 0 not supported");
        if (m < 0) throw std::domain_error("QDBB: m < 0");
    }
};

// Literal evaluation of phi at either base, sign-tracked log magnitudes.
// Reports a support-violation error if a pmf value is below -1e-9 (that is a
// convention bug, not float noise); values in [-1e-9, 0) clamp to 0.
double qdbb_pmf(long s, const QDBBParams& params);

// Exact rational pmf in the model regime (base q^{-1}, xi = q^e, eta = 0).
Rational qdbb_pmf_exact(long s, const Rational& q, long e, long m);

// Full pmf table over {0..m} in the model regime via the positive form;
// defensively renormalized when |sum - 1| in (1e-10, 1e-6), error beyond.
std::vector<double> qdbb_pmf_table(double q, long e, long m);

long qdbb_sample(const QDBBParams& params, RngStream& rng);

// CDF-table cache for the particle system: the same (e, m) classes recur
// constantly within one simulation. One cache per worker; not thread-safe.
class QdbbCache {
  public:
    explicit QdbbCache(double q) : q_(q) {}
    long sample(long e, long m, RngStream& rng);

  private:
    double q_;
    std::unordered_map<std::uint64_t, std::vector<double>> cdfs_;
};

}  // namespace qpt

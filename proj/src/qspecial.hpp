// q-series special functions and the model's scalar constants.
//
// Everything here is a convergent series or product in powers of q in (0,1),
// evaluated in one of three regimes:
//   double    — fast path for Monte Carlo support code;
//   BigFloat  — extended precision, used whenever a 1e-30-grade truncation
//               certificate has to mean something;
//   Rational  — exact, for finite products (Pochhammer, q-binomial).
//
// Infinite series/products truncate at i* ~ log(eps)/log(q) and every such
// routine can report the certified geometric tail bound it actually achieved,
// so callers can assert certificate <= eps instead of trusting us.

#pragma once

#include "prec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qpt {

// Certified bound on the truncation error of an infinite sum/product
// (absolute error for sums, relative error for products), plus the number of
// terms it took.
struct TailCertificate {
    double bound = 0.0;
    long   terms = 0;
};

namespace detail {
// Smallest I with q^I < eps, floored at 1. Callers add their own prefactors.
inline long geometric_cutoff(double q, double eps) {
    const long i = static_cast<long>(std::ceil(std::log(eps) / std::log(q)));
    return std::max<long>(i, 1);
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Finite q-Pochhammer (z;q)_n = prod_{i=0}^{n-1} (1 - z q^i).

template <class Real>
Real q_pochhammer(const Real& z, const Real& q, long n) {
    if (n < 0) throw std::invalid_argument("q_pochhammer: n < 0");
    Real prod(1), zq = z;
    for (long i = 0; i < n; ++i) {
        prod *= (Real(1) - zq);
        zq *= q;
    }
    return prod;
}

inline double q_pochhammer(double z, double q, long n) {
    return q_pochhammer<double>(z, q, n);
}

// ---------------------------------------------------------------------------
// Infinite q-Pochhammer, log scale. Requires 0 <= z < 1 (all factors positive,
// which is the only regime the model needs: z is u^2, q^x, or a_i b_j).
//
// log(z;q)_inf = sum_{i>=0} log(1 - z q^i); dropped factors beyond I satisfy
//   0 < -sum_{i>I} log(1 - z q^i) <= sum_{i>I} z q^i / (1 - z q^i)
//                                 <= z q^{I+1} / ((1-q)(1 - z q^{I+1})),
// which is the relative-error certificate on the product.

template <class Real>
Real log_q_pochhammer_inf(const Real& z, const Real& q, double eps,
                          TailCertificate* cert = nullptr) {
    if (!(q > 0 && q < 1))
        throw std::domain_error("log_q_pochhammer_inf: q outside (0,1)");
    if (z < 0 || z >= 1)
        throw std::domain_error("log_q_pochhammer_inf: need 0 <= z < 1");
    if (z == 0) {
        if (cert) *cert = {0.0, 0};
        return Real(0);
    }
    Real sum(0), zq = z;
    long i = 0;
    const long hard_cap = 100000000;
    for (;; ++i) {
        if (i > hard_cap)
            throw PrecisionError("log_q_pochhammer_inf: cutoff not reached");
        const Real tail_bound = zq * q / ((Real(1) - q) * (Real(1) - zq * q));
        if (to_double(Real(tail_bound)) < eps && i >= 1) {
            if (cert) *cert = {to_double(Real(tail_bound)), i};
            break;
        }
        sum += log(Real(1) - zq);
        zq *= q;
    }
    return sum;
}

inline double log_q_pochhammer_inf(double z, double q, double eps,
                                   TailCertificate* cert = nullptr) {
    if (!(q > 0 && q < 1))
        throw std::domain_error("log_q_pochhammer_inf: q outside (0,1)");
    if (z < 0 || z >= 1)
        throw std::domain_error("log_q_pochhammer_inf: need 0 <= z < 1");
    if (z == 0) {
        if (cert) *cert = {0.0, 0};
        return 0.0;
    }
    double sum = 0.0, zq = z;
    long i = 0;
    for (;; ++i) {
        if (i > 100000000)
            throw PrecisionError("log_q_pochhammer_inf: cutoff not reached");
        const double tail_bound = zq * q / ((1.0 - q) * (1.0 - zq * q));
        if (tail_bound < eps && i >= 1) {
            if (cert) *cert = {tail_bound, i};
            break;
        }
        sum += std::log1p(-zq);
        zq *= q;
    }
    return sum;
}

template <class Real>
Real q_pochhammer_inf(const Real& z, const Real& q, double eps,
                      TailCertificate* cert = nullptr) {
    using std::exp;
    return exp(log_q_pochhammer_inf(z, q, eps, cert));
}

inline double q_pochhammer_inf(double z, double q, double eps = 1e-16,
                               TailCertificate* cert = nullptr) {
    return std::exp(log_q_pochhammer_inf(z, q, eps, cert));
}

// ---------------------------------------------------------------------------
// q-binomial  binom(n,k)_q = (q;q)_n / ((q;q)_k (q;q)_{n-k}).

inline Rational q_binomial_exact(long n, long k, const Rational& q) {
    if (k < 0 || k > n) throw std::domain_error("q_binomial: k outside [0,n]");
    // Iterative (1-q^{n-k+i})/(1-q^i) form keeps intermediates small.
    Rational result(1), num_pow = rational_pow(q, n - k + 1), den_pow = q;
    for (long i = 1; i <= k; ++i) {
        result *= (1 - num_pow) / (1 - den_pow);
        num_pow *= q;
        den_pow *= q;
    }
    return result;
}

inline double log_q_binomial(long n, long k, double q) {
    if (k < 0 || k > n) throw std::domain_error("q_binomial: k outside [0,n]");
    double s = 0.0;
    double num_pow = std::pow(q, static_cast<double>(n - k + 1)), den_pow = q;
    for (long i = 1; i <= k; ++i) {
        s += std::log1p(-num_pow) - std::log1p(-den_pow);
        num_pow *= q;
        den_pow *= q;
    }
    return s;
}

inline double q_binomial(long n, long k, double q) {
    return std::exp(log_q_binomial(n, k, q));
}

// ---------------------------------------------------------------------------
// q-gamma:  Gamma_q(x) = (q;q)_inf / (q^x;q)_inf * (1-q)^{1-x},  x > 0.

template <class Real>
Real log_q_gamma(const Real& x, const Real& q, double eps) {
    using std::exp;
    using std::log;
    if (!(x > 0)) throw std::domain_error("q_gamma: x <= 0");
    const Real qx = exp(x * log(q));
    return log_q_pochhammer_inf(q, q, eps) - log_q_pochhammer_inf(qx, q, eps) +
           (Real(1) - x) * log(Real(1) - q);
}

inline double q_gamma(double x, double q, double eps = 1e-16) {
    const double lg = log_q_gamma<double>(x, q, eps);
    if (std::abs(lg) > 700.0)
        throw std::overflow_error("q_gamma: result overflows double range");
    return std::exp(lg);
}

// ---------------------------------------------------------------------------
// q-digamma and its second derivative, by termwise series:
//   psi_q(x)   = -log(1-q) + log(q)   * sum_{i>=0} q^{i+x} / (1 - q^{i+x})
//   psi_q''(x) =             log(q)^3 * sum_{i>=0} q^{i+x}(1+q^{i+x})/(1-q^{i+x})^3
// Tail after index I is geometric:
//   sum_{i>I} q^{i+x}/(1-q^{i+x}) <= q^{I+1+x} / ((1-q)(1-q^x)), and the
// second-derivative terms pick up an extra (1+q^x)/(1-q^x)^2 factor at worst.

template <class Real>
Real q_digamma(const Real& x, const Real& q, double eps,
               TailCertificate* cert = nullptr) {
    using std::exp;
    using std::log;
    if (!(x > 0)) throw std::domain_error("q_digamma: x <= 0");
    const Real logq = log(q);
    const Real qx = exp(x * logq);
    Real sum(0), p = qx;
    long i = 0;
    for (;; ++i) {
        if (i > 100000000) throw PrecisionError("q_digamma: cutoff not reached");
        const Real tail = p * q / ((Real(1) - q) * (Real(1) - qx));
        if (to_double(Real(tail * (-logq))) < eps && i >= 1) {
            if (cert) *cert = {to_double(Real(tail * (-logq))), i};
            break;
        }
        sum += p / (Real(1) - p);
        p *= q;
    }
    return -log(Real(1) - q) + logq * sum;
}

template <class Real>
Real q_digamma_second(const Real& x, const Real& q, double eps,
                      TailCertificate* cert = nullptr) {
    using std::exp;
    using std::log;
    if (!(x > 0)) throw std::domain_error("q_digamma_second: x <= 0");
    const Real logq = log(q);
    const Real qx = exp(x * logq);
    const Real lq3 = -logq * logq * logq;  // |log q|^3
    Real sum(0), p = qx;
    long i = 0;
    for (;; ++i) {
        if (i > 100000000)
            throw PrecisionError("q_digamma_second: cutoff not reached");
        const Real om = Real(1) - qx;
        const Real tail =
            p * q * (Real(1) + qx) / ((Real(1) - q) * om * om * om);
        if (to_double(Real(tail * lq3)) < eps && i >= 1) {
            if (cert) *cert = {to_double(Real(tail * lq3)), i};
            break;
        }
        const Real omp = Real(1) - p;
        sum += p * (Real(1) + p) / (omp * omp * omp);
        p *= q;
    }
    return logq * logq * logq * sum;  // < 0: log(q)^3 < 0, series > 0
}

// ---------------------------------------------------------------------------
// Scalar constants of the hydrodynamic description.

inline double mu_q(double q) {
    if (!(q > 0 && q < 1)) throw std::domain_error("mu_q: q outside (0,1)");
    const double s = 1.0 + std::sqrt(q);
    return s * s / (1.0 - q);
}

inline double log_base_q(double q, double u) {
    // log_q u = log u / log q; positive since both logs are negative.
    return std::log(u) / std::log(q);
}

// f_q = 2 (psi_q(log_q u) + log(1-q)) / log q + 1  (law-of-large-numbers speed)
template <class Real>
Real f_q(const Real& q, const Real& u, double eps) {
    using std::log;
    const Real x = log(u) / log(q);
    return Real(2) * (q_digamma(x, q, eps) + log(Real(1) - q)) / log(q) + Real(1);
}

inline double f_q(double q, double u, double eps = 1e-16) {
    return f_q<double>(q, u, eps);
}

// Independent route to the same constant:  f_q = 1 + sum_{i>=0} 2u q^i/(1-u q^i).
template <class Real>
Real f_q_direct_series(const Real& q, const Real& u, double eps,
                       TailCertificate* cert = nullptr) {
    Real sum(0), p = u;
    long i = 0;
    for (;; ++i) {
        if (i > 100000000) throw PrecisionError("f_q_direct_series: cutoff");
        const Real tail = Real(2) * p * q / ((Real(1) - q) * (Real(1) - u));
        if (to_double(Real(tail)) < eps && i >= 1) {
            if (cert) *cert = {to_double(Real(tail)), i};
            break;
        }
        sum += Real(2) * p / (Real(1) - p);
        p *= q;
    }
    return Real(1) + sum;
}

// |direct series - psi_q route|, evaluated in extended precision so the
// residual reflects the identity, not double rounding.
inline double verify_lln_identity(double q, double u,
                                  const PrecisionContext& ctx) {
    ctx.activate();
    const BigFloat qb(q), ub(u);
    const BigFloat lhs = f_q_direct_series<BigFloat>(qb, ub, ctx.truncation_eps);
    const BigFloat rhs = f_q<BigFloat>(qb, ub, ctx.truncation_eps);
    return to_double(BigFloat(abs(lhs - rhs)));
}

inline double entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("entropy: p outside [0,1]");
    double h = 0.0;
    if (p > 0.0) h -= p * std::log(p);
    if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
    return h;
}

}  // namespace qpt

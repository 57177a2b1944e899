// Arithmetic modes shared by every module.
//
// Two regimes coexist deliberately:
//   * exact rational (GMP mpq via boost::multiprecision) for reference
//     enumerations, pmf identities and factorial moments, where answers of
//     order 1e-10 and smaller must be trusted exactly;
//   * extended float (MPFR, runtime precision, >= 64 bits) for orthogonal
//     polynomial bases, Fredholm determinants and tail sums where rationals
//     would blow up but double would silently lose the signal.
// Plain double stays the workhorse for Monte Carlo.

#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace qpt {

using Rational = boost::multiprecision::mpq_rational;
using Integer  = boost::multiprecision::mpz_int;
using BigFloat = boost::multiprecision::mpfr_float;  // runtime precision

enum class ArithMode { ExactRational, ExtendedFloat };

// Raised when a computation detects that the requested float precision cannot
// certify the result (e.g. Gram-Schmidt residual too large). Callers retry
// with more bits or switch to rational mode.
struct PrecisionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PrecisionContext {
    ArithMode mode   = ArithMode::ExtendedFloat;
    unsigned  bits   = 256;     // mpfr mantissa bits in ExtendedFloat mode
    double    truncation_eps = 1e-30;  // certified tail threshold for infinite
                                       // sums/products

    void validate() const {
        if (mode == ArithMode::ExtendedFloat && bits < 64)
            throw std::invalid_argument("PrecisionContext: need >= 64 bits");
        if (!(truncation_eps > 0.0) || truncation_eps >= 1e-3)
            throw std::invalid_argument("PrecisionContext: truncation_eps out of range");
    }

    // MPFR precision is set process-wide (extended-float sections are
    // single-threaded by design; Monte Carlo never touches BigFloat).
    void activate() const {
        validate();
        if (mode == ArithMode::ExtendedFloat) {
            const unsigned digits10 =
                static_cast<unsigned>(std::ceil(static_cast<double>(bits) * 0.30103)) + 2;
            BigFloat::default_precision(digits10);
        }
    }

    static PrecisionContext exact() {
        PrecisionContext c;
        c.mode = ArithMode::ExactRational;
        return c;
    }
    static PrecisionContext floating(unsigned bits_ = 256) {
        PrecisionContext c;
        c.mode = ArithMode::ExtendedFloat;
        c.bits = bits_;
        return c;
    }
};

// Model parameters. 0 < q < 1 always; u is the specialization value with
// 0 < u < 1 (jump rates are u^2 < 1). Rational mirrors are carried when the
// caller constructed the params from exact fractions, so exact-mode code can
// refuse to run on truncated doubles.
struct QParams {
    double   q = 0.5;
    double   u = 0.5;
    Rational q_rat{1, 2};
    Rational u_rat{1, 2};
    bool     has_exact = false;

    static QParams from_double(double q_, double u_) {
        QParams p;
        p.q = q_;
        p.u = u_;
        p.has_exact = false;
        p.validate();
        return p;
    }
    static QParams from_rational(const Rational& q_, const Rational& u_) {
        QParams p;
        p.q_rat = q_;
        p.u_rat = u_;
        p.q = p.q_rat.convert_to<double>();
        p.u = p.u_rat.convert_to<double>();
        p.has_exact = true;
        p.validate();
        return p;
    }
    void validate() const {
        if (!(q > 0.0 && q < 1.0))
            throw std::invalid_argument("QParams: require 0 < q < 1");
        if (!(u > 0.0 && u < 1.0))
            throw std::invalid_argument("QParams: require 0 < u < 1");
        if (has_exact && !(q_rat > 0 && q_rat < 1 && u_rat > 0 && u_rat < 1))
            throw std::invalid_argument("QParams: rational q,u out of (0,1)");
    }
    void require_exact(const char* who) const {
        if (!has_exact)
            throw std::invalid_argument(std::string(who) +
                                        ": exact-rational mode needs rational q,u");
    }
};

inline Rational rational_pow(const Rational& base, long e) {
    if (e < 0) return 1 / rational_pow(base, -e);
    Rational out(1), b = base;
    for (long n = e; n > 0; n >>= 1) {
        if (n & 1) out *= b;
        if (n > 1) b *= b;
    }
    return out;
}

inline double to_double(double x) { return x; }
inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(const BigFloat& x) { return x.convert_to<double>(); }

inline BigFloat to_bigfloat(const Rational& r) {
    return BigFloat(numerator(r)) / BigFloat(denominator(r));
}

// log of a positive rational without overflowing double; used when rationals
// of order (mu_q N)^k ~ 10^100 need a log-scale summary.
inline double log_rational(const Rational& r) {
    if (r <= 0) throw std::domain_error("log_rational: non-positive argument");
    const BigFloat x = to_bigfloat(r);
    return to_double(log(x));
}

}  // namespace qpt

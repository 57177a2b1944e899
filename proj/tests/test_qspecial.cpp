#include "doctest.h"

#include "prec.hpp"
#include "qspecial.hpp"

#include <cmath>

using namespace qpt;

namespace {

// Finite-difference oracles evaluated in extended precision. These are
// deliberately independent of the series implementations they check: the
// digamma is differenced from log Gamma_q, the second derivative from the
// digamma itself.
BigFloat fd_digamma(double x, double q, const BigFloat& h) {
    BigFloat up = log_q_gamma<BigFloat>(BigFloat(x) + h, BigFloat(q), 1e-40);
    BigFloat dn = log_q_gamma<BigFloat>(BigFloat(x) - h, BigFloat(q), 1e-40);
    return (up - dn) / (2 * h);
}

BigFloat fd_digamma_second(double x, double q, const BigFloat& h) {
    BigFloat up = q_digamma<BigFloat>(BigFloat(x) + h, BigFloat(q), 1e-40);
    BigFloat mid = q_digamma<BigFloat>(BigFloat(x), BigFloat(q), 1e-40);
    BigFloat dn = q_digamma<BigFloat>(BigFloat(x) - h, BigFloat(q), 1e-40);
    return (up - 2 * mid + dn) / (h * h);
}

}  // namespace

TEST_SUITE("qspecial") {

TEST_CASE("finite q-Pochhammer: pinned values and empty product") {
    CHECK(q_pochhammer(0.7, 0.5, 0) == 1.0);
    CHECK(q_pochhammer(0.5, 0.5, 2) == doctest::Approx(0.375).epsilon(1e-15));
    // (z;q)_1 = 1-z
    CHECK(q_pochhammer(0.3, 0.9, 1) == doctest::Approx(0.7).epsilon(1e-15));
    Rational exact = q_pochhammer<Rational>(Rational(1, 2), Rational(1, 2), 2);
    CHECK(exact == Rational(3, 8));
}

TEST_CASE("finite q-Pochhammer splits: (z;q)_{m+n} = (z;q)_m (z q^m;q)_n") {
    const Rational q(2, 5), z(3, 7);
    for (long m = 0; m <= 20; m += 5) {
        for (long n = 0; n <= 20; n += 5) {
            Rational lhs = q_pochhammer<Rational>(z, q, m + n);
            Rational zqm = z;
            for (long i = 0; i < m; ++i) zqm *= q;
            Rational rhs = q_pochhammer<Rational>(z, q, m) * q_pochhammer<Rational>(zqm, q, n);
            CHECK(lhs == rhs);
        }
    }
    for (long m : {0L, 1L, 7L, 13L}) {
        for (long n : {0L, 2L, 9L, 20L}) {
            double lhs = q_pochhammer(0.35, 0.65, m + n);
            double rhs = q_pochhammer(0.35, 0.65, m) *
                         q_pochhammer(0.35 * std::pow(0.65, double(m)), 0.65, n);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }
}

TEST_CASE("infinite q-Pochhammer: certificates and limits") {
    CHECK(q_pochhammer_inf(0.0, 0.5) == doctest::Approx(1.0).epsilon(1e-15));

    TailCertificate cert{};
    double v = std::exp(log_q_pochhammer_inf(0.5, 0.5, 1e-16, &cert));
    CHECK(cert.bound <= 1e-16);
    CHECK(cert.terms > 0);
    // Independent check: Euler's pentagonal-number series for (q;q)_inf,
    //   (q;q)_inf = sum_k (-1)^k q^{k(3k-1)/2}  over all integers k.
    double euler = 0.0;
    for (long k = -40; k <= 40; ++k) {
        double e = 0.5 * double(k) * double(3 * k - 1);
        euler += ((k % 2 == 0) ? 1.0 : -1.0) * std::pow(0.5, e);
    }
    CHECK(v == doctest::Approx(euler).epsilon(1e-13));

    // (z;q)_inf = (1-z)(zq;q)_inf
    for (double z : {0.1, 0.45, 0.8}) {
        double lhs = q_pochhammer_inf(z, 0.7);
        double rhs = (1.0 - z) * q_pochhammer_inf(z * 0.7, 0.7);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
    }
    CHECK_THROWS_AS((void)q_pochhammer_inf(1.2, 0.5), std::domain_error);
    CHECK_THROWS_AS((void)q_pochhammer_inf(0.5, 1.1), std::domain_error);
}

TEST_CASE("q-binomial: pinned values, symmetry, Pascal recurrences") {
    CHECK(q_binomial(5, 0, 0.77) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(q_binomial(2, 1, 0.5) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(q_binomial_exact(2, 1, Rational(1, 2)) == Rational(3, 2));
    CHECK(q_binomial_exact(4, 2, Rational(1, 2)) ==
          (1 - Rational(1, 8)) * (1 - Rational(1, 16)) /
              ((1 - Rational(1, 2)) * (1 - Rational(1, 4))));

    const Rational q(3, 11);
    for (long n = 0; n <= 20; ++n)
        for (long k = 0; k <= n; ++k)
            CHECK(q_binomial_exact(n, k, q) == q_binomial_exact(n, n - k, q));

    // binom(n,k)_q = binom(n-1,k-1)_q + q^k binom(n-1,k)_q
    for (long n = 1; n <= 30; ++n) {
        Rational qk = 1;
        for (long k = 1; k <= n - 1; ++k) {
            qk *= q;
            CHECK(q_binomial_exact(n, k, q) ==
                  q_binomial_exact(n - 1, k - 1, q) + qk * q_binomial_exact(n - 1, k, q));
        }
    }
    for (long n = 1; n <= 24; ++n)
        for (long k = 1; k <= n - 1; ++k)
            CHECK(q_binomial(n, k, 0.6) ==
                  doctest::Approx(q_binomial(n - 1, k - 1, 0.6) +
                                  std::pow(0.6, double(k)) * q_binomial(n - 1, k, 0.6))
                      .epsilon(1e-11));
}

TEST_CASE("q-Gamma: fixed points, functional equation, overflow signalling") {
    for (double q : {0.2, 0.5, 0.8}) {
        CHECK(q_gamma(1.0, q) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(q_gamma(2.0, q) == doctest::Approx(1.0).epsilon(1e-13));
    }
    // Gamma_q(x+1) = (1-q^x)/(1-q) Gamma_q(x)
    for (double q : {0.3, 0.7}) {
        for (double x : {0.4, 1.3, 2.6}) {
            double lhs = q_gamma(x + 1.0, q);
            double rhs = (1.0 - std::pow(q, x)) / (1.0 - q) * q_gamma(x, q);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS((void)q_gamma(2000.0, 0.5), std::overflow_error);
}

TEST_CASE("q-digamma matches the differenced q-log-Gamma") {
    PrecisionContext ctx = PrecisionContext::floating(384);
    ctx.activate();
    const BigFloat h = BigFloat("1e-15");
    for (double q : {0.25, 0.5, 0.85}) {
        for (double x : {0.6, 1.7, 3.2}) {
            BigFloat series = q_digamma<BigFloat>(BigFloat(x), BigFloat(q), 1e-40);
            BigFloat fd = fd_digamma(x, q, h);
            BigFloat rel = abs(series - fd) / abs(series);
            CHECK(to_double(rel) < 1e-12);
        }
    }
}

TEST_CASE("q-digamma second derivative: sign, oracle, certificate") {
    PrecisionContext ctx = PrecisionContext::floating(384);
    ctx.activate();
    const BigFloat h = BigFloat("1e-12");
    for (double q : {0.1, 0.5, 0.9}) {
        for (double x : {0.3, 1.0, 2.5}) {
            TailCertificate cert{};
            double val = q_digamma_second<double>(x, q, 1e-25, &cert);
            CHECK(val < 0.0);  // strict concavity of psi_q
            CHECK(cert.bound <= 1e-25);
            BigFloat fd = fd_digamma_second(x, q, h);
            CHECK(std::abs(val - to_double(fd)) / std::abs(val) < 1e-6);
        }
    }
}

TEST_CASE("mu_q: closed form at q=1/4, small-q limit, shift identity") {
    CHECK(mu_q(0.25) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(mu_q(1e-12) == doctest::Approx(1.0).epsilon(1e-5));
    for (double q : {0.1, 0.37, 0.8, 0.95}) {
        // mu_q - 1 = 2 sqrt(q) / (1 - sqrt(q))
        double rhs = 2.0 * std::sqrt(q) / (1.0 - std::sqrt(q));
        CHECK(mu_q(q) - 1.0 == doctest::Approx(rhs).epsilon(1e-14));
    }
}

TEST_CASE("f_q: both evaluation routes agree and exceed 1") {
    for (double q : {0.2, 0.5, 0.8}) {
        for (double u : {0.1, 0.4, 0.7}) {
            double via_digamma = f_q(q, u);
            TailCertificate cert{};
            double via_series = f_q_direct_series<double>(q, u, 1e-16, &cert);
            CHECK(via_digamma == doctest::Approx(via_series).epsilon(1e-12));
            CHECK(via_digamma > 1.0);
            CHECK(cert.bound <= 1e-16);
        }
    }
}

TEST_CASE("law-of-large-numbers identity residual") {
    PrecisionContext ctx = PrecisionContext::floating(256);
    CHECK(verify_lln_identity(0.5, 0.4, ctx) < 1e-12);
    CHECK(verify_lln_identity(0.9, 0.9, ctx) < 1e-12);
    // u -> 0: both sides collapse to f_q = 1 + 0
    CHECK(verify_lln_identity(0.5, 1e-8, ctx) < 1e-12);
}

TEST_CASE("entropy endpoints and symmetry") {
    CHECK(entropy(0.0) == 0.0);
    CHECK(entropy(1.0) == 0.0);
    CHECK(entropy(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    for (double p : {0.03, 0.2, 0.41})
        CHECK(entropy(p) == doctest::Approx(entropy(1.0 - p)).epsilon(1e-14));
}

}  // TEST_SUITE

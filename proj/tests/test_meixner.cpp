#include "doctest.h"

#include "lpp.hpp"
#include "meixner.hpp"
#include "rng.hpp"
#include "stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace qpt;

namespace {

// The geometric weight's monic recurrence has classical closed forms,
//     b_n = (n(1+q) + q) / (1-q),   a_n = q n^2 / (1-q)^2,
//     <p_n, p_n> = q^n (n!)^2 / (1-q)^{2n},
// derived independently of the Stieltjes construction.  They are the frozen
// oracle for both arithmetic routes.
struct ClassicalForms {
    BigFloat b, a, norm2;
};

ClassicalForms classical(double q, long n) {
    const BigFloat qb(q), one(1);
    BigFloat fact(1);
    for (long j = 2; j <= n; ++j) fact *= BigFloat(j);
    ClassicalForms c;
    c.b = (BigFloat(n) * (one + qb) + qb) / (one - qb);
    c.a = qb * BigFloat(n) * BigFloat(n) / pow(one - qb, 2);
    c.norm2 = pow(qb, n) * fact * fact / pow(one - qb, 2 * n);
    return c;
}

Rational rat_factorial_sq(long n) {
    Integer f(1);
    for (long j = 2; j <= n; ++j) f *= j;
    return Rational(f * f);
}

double rel_dev(const BigFloat& got, const BigFloat& want) {
    if (want == 0) return to_double(abs(got));
    return to_double(abs(got - want) / abs(want));
}

}  // namespace

TEST_SUITE("meixner") {

TEST_CASE("stieltjes recurrence matches the classical closed forms") {
    for (double q : {0.3, 0.5, 0.75}) {
        MeixnerBasis basis = build_basis(q, 24);
        PrecisionContext ctx = PrecisionContext::floating(basis.bits);
        ctx.activate();
        CHECK(basis.trunc_error < 1e-12);
        CHECK(basis.ortho_residual < 1e-10);
        CHECK(basis.root_bound < double(basis.x_max));
        for (long n = 0; n <= basis.degree; ++n) {
            const ClassicalForms c = classical(q, n);
            CHECK(rel_dev(basis.b[std::size_t(n)], c.b) < 1e-12);
            CHECK(rel_dev(basis.norm2[std::size_t(n)], c.norm2) < 1e-12);
            if (n >= 1) CHECK(rel_dev(basis.a[std::size_t(n)], c.a) < 1e-12);
        }
    }
}

TEST_CASE("exact moment route reproduces the closed forms bit for bit") {
    for (auto [num, den] : {std::pair<long, long>{1, 2}, {1, 4}, {3, 4}}) {
        const Rational q(num, den);
        const Rational omq = Rational(1) - q;
        MonicRecurrenceExact rec = build_recurrence_exact(q, 8);
        for (long n = 0; n <= 8; ++n) {
            const Rational b = (Rational(n) * (Rational(1) + q) + q) / omq;
            const Rational norm2 =
                rational_pow(q, n) * rat_factorial_sq(n) / rational_pow(omq, 2 * n);
            CHECK(rec.b[std::size_t(n)] == b);
            CHECK(rec.norm2[std::size_t(n)] == norm2);
            if (n >= 1) {
                const Rational a = q * Rational(n * n) / rational_pow(omq, 2);
                CHECK(rec.a[std::size_t(n)] == a);
            }
        }
    }
}

TEST_CASE("first rational steps pin the geometric mean and variance") {
    // b_0 is the mean q/(1-q) of the geometric law and norm2_1 its
    // variance q/(1-q)^2; both fall out of the first orthogonalization
    // step and anchor the whole exact construction.
    const Rational q(2, 5);
    const Rational omq = Rational(1) - q;
    MonicRecurrenceExact rec = build_recurrence_exact(q, 3);
    CHECK(rec.norm2[0] == Rational(1));
    CHECK(rec.b[0] == q / omq);
    CHECK(rec.norm2[1] == q / (omq * omq));
    CHECK(rec.a[1] == q / (omq * omq));
}

TEST_CASE("the two constructions agree on orthonormal values") {
    MeixnerBasis basis = build_basis(0.5, 24);
    PrecisionContext ctx = PrecisionContext::floating(basis.bits);
    ctx.activate();
    MonicRecurrenceExact rec = build_recurrence_exact(Rational(1, 2), 24);
    for (long xi : {0L, 1L, 3L, 10L, 40L, 100L}) {
        const BigFloat x(xi);
        std::vector<BigFloat> got = basis.eval(x, 24);
        CHECK(abs(got[0] - 1) < BigFloat(1e-30));
        // Monic sweep with the exact coefficients, then normalize.
        BigFloat pm1(0), p(1);
        for (long n = 0; n <= 24; ++n) {
            const BigFloat mn = p / sqrt(to_bigfloat(rec.norm2[std::size_t(n)]));
            CHECK(to_double(abs(got[std::size_t(n)] - mn)) < 1e-10);
            const BigFloat nxt = (x - to_bigfloat(rec.b[std::size_t(n)])) * p -
                                 to_bigfloat(rec.a[std::size_t(n)]) * pm1;
            pm1 = p;
            p = nxt;
        }
    }
}

TEST_CASE("two-term kernel form equals the direct sum") {
    MeixnerBasis basis = build_basis(0.5, 16);
    PrecisionContext ctx = PrecisionContext::floating(basis.bits);
    ctx.activate();
    auto direct = [&](long N, const BigFloat& x, const BigFloat& y) {
        std::vector<BigFloat> mx = basis.eval(x, N - 1);
        std::vector<BigFloat> my = basis.eval(y, N - 1);
        BigFloat s(0);
        for (long l = 0; l < N; ++l) s += mx[std::size_t(l)] * my[std::size_t(l)];
        return s;
    };
    for (long N : {1L, 4L, 9L, 16L}) {
        for (auto [xi, yi] : {std::pair<long, long>{0, 0}, {2, 7}, {5, 5},
                              {11, 3}, {20, 20}}) {
            const BigFloat x(xi), y(yi);
            const BigFloat kv = kernel(basis, N, x, y);
            CHECK(rel_dev(kv, direct(N, x, y)) < 1e-12);
            CHECK(to_double(abs(kv - kernel(basis, N, y, x))) <
                  1e-25 * (1.0 + std::abs(to_double(kv))));
        }
    }
}

TEST_CASE("gram matrices run from the identity down to zero") {
    MeixnerBasis basis = build_basis(0.5, 12);
    GramTable table = gram_table(basis, 12, 150);
    PrecisionContext ctx = PrecisionContext::floating(table.bits);
    ctx.activate();
    std::vector<BigFloat> g0 = table.gram(12, 0);
    for (long i = 0; i < 12; ++i)
        for (long j = 0; j < 12; ++j) {
            const double want = (i == j) ? 1.0 : 0.0;
            CHECK(std::abs(to_double(g0[std::size_t(i * 12 + j)]) - want) < 1e-10);
        }
    std::vector<BigFloat> gend = table.gram(12, 150);
    for (const BigFloat& e : gend) CHECK(std::abs(to_double(e)) < 1e-15);

    // det(I - K^0) = P(lambda_1 <= -1) = 0, and the induced pmf of
    // lambda_1 is nonnegative and sums to one.
    CHECK(gap_probability(table, 4, 0) == doctest::Approx(0.0).epsilon(1e-12));
    double prev = 0.0, total = 0.0;
    for (long t = 1; t <= 150; ++t) {
        const double g = gap_probability(table, 4, t);
        CHECK(g >= prev - 1e-10);
        total += g - prev;
        prev = g;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(prev == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("a single particle reduces to the geometric law") {
    MeixnerBasis basis = build_basis(0.5, 4);
    GramTable table = gram_table(basis, 4, 60);
    PrecisionContext ctx = PrecisionContext::floating(table.bits);
    ctx.activate();
    for (long t = 0; t <= 60; ++t) {
        const double entry = to_double(table.gram(1, t)[0]);
        CHECK(entry == doctest::Approx(std::pow(0.5, double(t))).epsilon(1e-12));
        CHECK(gap_probability(table, 1, t) ==
              doctest::Approx(1.0 - std::pow(0.5, double(t))).epsilon(1e-12));
    }
    // Worked example: the 1 x 1 Gram entry at t = 2 is q^2 = 1/4 and the
    // gap probability is 3/4.
    CHECK(to_double(table.gram(1, 2)[0]) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(gap_probability(table, 1, 2) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("gram spectra stay inside the unit interval") {
    for (double q : {0.3, 0.75}) {
        MeixnerBasis basis = build_basis(q, 20);
        GramTable table = gram_table(basis, 20, 120);
        PrecisionContext ctx = PrecisionContext::floating(table.bits);
        ctx.activate();
        for (long N : {1L, 5L, 20L}) {
            for (long t : {0L, 1L, 2L, 5L, 10L, 20L, 40L, 80L, 120L}) {
                std::vector<BigFloat> g = table.gram(N, t);
                std::vector<double> gd(g.size());
                std::transform(g.begin(), g.end(), gd.begin(),
                               [](const BigFloat& v) { return to_double(v); });
                std::vector<double> eig = symmetric_eigenvalues(gd, N);
                CHECK(eig.front() >= -1e-10);
                CHECK(eig.back() <= 1.0 + 1e-10);
            }
        }
    }
}

TEST_CASE("matrix trace equals N times the expected-measure tail") {
    for (double q : {0.25, 0.5, 0.75}) {
        MeixnerBasis basis = build_basis(q, 20);
        GramTable table = gram_table(basis, 20, 120);
        for (long N : {1L, 2L, 3L, 5L, 8L, 13L, 20L}) {
            NuMeasure nu = nu_measure(basis, N);
            PrecisionContext ctx = PrecisionContext::floating(nu.bits);
            ctx.activate();
            CHECK(std::abs(to_double(nu.suffix[0]) - 1.0) < 1e-9);
            CHECK(nu.tail_mass_bound < 1e-9);
            for (long t : {0L, 1L, N, 2 * N, 4 * N, 6 * N}) {
                CHECK(trace_identity_residual(table, nu, N, t) < 1e-8);
            }
        }
    }
}

TEST_CASE("expected empirical measure is a certified probability law") {
    MeixnerBasis basis = build_basis(0.5, 16);
    NuMeasure nu = nu_measure(basis, 8);
    PrecisionContext ctx = PrecisionContext::floating(nu.bits);
    ctx.activate();
    for (const BigFloat& d : nu.density) CHECK(to_double(d) > -1e-40);
    CHECK(std::abs(to_double(nu.suffix[0]) - 1.0) < 1e-9);
    CHECK(nu.tail_mass_bound < 1e-9);
    CHECK(nu.growth_ratio < 1.0);

    // One particle: the expected measure is the geometric law itself.
    NuMeasure nu1 = nu_measure(basis, 1);
    for (long x = 0; x <= 40; ++x) {
        const BigFloat want = BigFloat(0.5) * pow(BigFloat(0.5), x);
        CHECK(rel_dev(nu1.density[std::size_t(x)], want) < 1e-12);
    }
    CHECK(rel_dev(nu1.tail(7), pow(BigFloat(0.5), 7)) < 1e-12);
}

TEST_CASE("last passage percolation drives the largest particle") {
    // Independent Monte Carlo route to the same law: the largest particle
    // of the N-point ensemble is distributed as the N x N geometric
    // last-passage time plus N - 1.  Checked with z = 3 Wilson bands
    // pointwise and a discrete-aware KS test over the full sample.
    const long N = 5;
    const double q = 0.3;
    const long n = 20000;
    MeixnerBasis basis = build_basis(q, N);
    GramTable table = gram_table(basis, N, 120);
    std::vector<long> lam(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        RngStream rng(5511, static_cast<std::uint64_t>(i));
        RectEnvironment env = sample_rect_geo(N, N, q, rng);
        lam[std::size_t(i)] = rect_lpp(env) + N - 1;
    }
    for (long t = 4; t <= 20; ++t) {
        long cnt = 0;
        for (long v : lam) cnt += (v <= t);
        Interval band = wilson_interval(cnt, n, 3.0);
        const double g = gap_probability(table, N, t + 1);
        CHECK(g >= band.lo);
        CHECK(g <= band.hi);
    }
    std::vector<double> data(lam.begin(), lam.end());
    KsResult ks = ks_one_sample(
        data,
        [&](double s) {
            return gap_probability(table, N, long(std::floor(s)) + 1);
        },
        [&](double s) { return gap_probability(table, N, long(std::floor(s))); });
    CHECK(ks.p_value > 1e-3);
}

TEST_CASE("trace bound caps the determinant") {
    MeixnerBasis basis = build_basis(0.5, 12);
    GramTable table = gram_table(basis, 12, 100);
    for (long N : {1L, 2L, 6L, 12L}) {
        for (long t : {0L, 2L, 5L, 10L, 20L, 50L, 100L}) {
            auto [det, envelope] = widom_bound(table, N, t);
            CHECK(det <= envelope + 1e-12);
            CHECK(det == doctest::Approx(gap_probability(table, N, t)).epsilon(1e-12));
        }
    }
    // Scalar sanity: for one particle the bound reads
    // 1 - q^t <= exp(-q^t).
    auto [d1, e1] = widom_bound(table, 1, 3);
    CHECK(d1 == doctest::Approx(1.0 - 0.125).epsilon(1e-12));
    CHECK(e1 == doctest::Approx(std::exp(-0.125)).epsilon(1e-12));
}

TEST_CASE("jacobi eigenvalue solver matches known spectra") {
    std::vector<double> two{2, 1, 1, 2};
    std::vector<double> e2 = symmetric_eigenvalues(two, 2);
    CHECK(e2[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e2[1] == doctest::Approx(3.0).epsilon(1e-12));

    // Tridiagonal (2, -1) matrix: eigenvalues 2 - sqrt(2), 2, 2 + sqrt(2).
    std::vector<double> tri{2, -1, 0, -1, 2, -1, 0, -1, 2};
    std::vector<double> e3 = symmetric_eigenvalues(tri, 3);
    CHECK(e3[0] == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-12));
    CHECK(e3[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(e3[2] == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-12));

    // Random symmetric matrix: the spectrum preserves trace and
    // Frobenius norm.
    RngStream rng(99, 0);
    const long m = 8;
    std::vector<double> sym(std::size_t(m * m));
    for (long i = 0; i < m; ++i)
        for (long j = 0; j <= i; ++j) {
            const double v = 2.0 * rng.u01() - 1.0;
            sym[std::size_t(i * m + j)] = sym[std::size_t(j * m + i)] = v;
        }
    double tr = 0.0, fro2 = 0.0;
    for (long i = 0; i < m; ++i) tr += sym[std::size_t(i * m + i)];
    for (double v : sym) fro2 += v * v;
    std::vector<double> eig = symmetric_eigenvalues(sym, m);
    double etr = 0.0, efro2 = 0.0;
    for (double v : eig) {
        etr += v;
        efro2 += v * v;
    }
    CHECK(etr == doctest::Approx(tr).epsilon(1e-10));
    CHECK(efro2 == doctest::Approx(fro2).epsilon(1e-10));
}

TEST_CASE("out-of-range requests are rejected") {
    CHECK_THROWS_AS((void)build_basis(0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS((void)build_basis(1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS((void)build_basis(-0.2, 4), std::invalid_argument);
    CHECK_THROWS_AS((void)build_basis(0.5, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)build_recurrence_exact(Rational(5, 4), 3),
                    std::invalid_argument);

    MeixnerBasis basis = build_basis(0.5, 4);
    PrecisionContext ctx = PrecisionContext::floating(basis.bits);
    ctx.activate();
    CHECK_THROWS_AS((void)basis.eval(BigFloat(1), 5), std::invalid_argument);
    CHECK_THROWS_AS((void)kernel(basis, 5, BigFloat(1), BigFloat(2)),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)gram_table(basis, 5, 10), std::invalid_argument);
    CHECK_THROWS_AS((void)nu_measure(basis, 5), std::invalid_argument);

    GramTable table = gram_table(basis, 4, 10);
    CHECK_THROWS_AS((void)table.gram(0, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)table.gram(4, 11), std::invalid_argument);
    CHECK_THROWS_AS((void)table.gram(4, -1), std::invalid_argument);
}

}  // TEST_SUITE("meixner")

#include "doctest.h"

#include "meixner.hpp"

#include <cmath>
#include <cstdlib>
#include <map>
#include <vector>

using namespace qpt;

namespace {

Rational geometric_factorial_moment(const Rational& q, long k) {
    // One particle: E[(X)_k] = k! (q/(1-q))^k for the geometric law.
    Integer fact(1);
    for (long j = 2; j <= k; ++j) fact *= j;
    return Rational(fact) * rational_pow(q / (Rational(1) - q), k);
}

Integer falling_factorial(long x, long k) {
    Integer p(1);
    for (long j = 0; j < k; ++j) p *= (x - j);
    return p;
}

}  // namespace

TEST_SUITE("moments") {

TEST_CASE("stirling numbers of the second kind") {
    std::vector<Integer> row0 = stirling_row(0);
    REQUIRE(row0.size() == 1);
    CHECK(row0[0] == 1);

    const std::vector<long> want{0, 1, 15, 25, 10, 1};
    std::vector<Integer> row5 = stirling_row(5);
    REQUIRE(row5.size() == 6);
    for (std::size_t j = 0; j < want.size(); ++j)
        CHECK(row5[j] == Integer(want[j]));

    // Defining identity sum_j S(k, j) (x)_j = x^k, exactly at x = 7, k = 6.
    std::vector<Integer> row6 = stirling_row(6);
    Integer lhs(0);
    for (long j = 0; j <= 6; ++j)
        lhs += row6[std::size_t(j)] * falling_factorial(7, j);
    Integer rhs(1);
    for (int i = 0; i < 6; ++i) rhs *= 7;
    CHECK(lhs == rhs);
}

TEST_CASE("both factorial-moment routes agree exactly") {
    for (auto [num, den] : {std::pair<long, long>{1, 4}, {1, 2}, {3, 4}}) {
        const Rational q(num, den);
        for (long N = 1; N <= 15; N += 2) {
            for (long k = 0; k <= 10; ++k) {
                const Rational a = factorial_moment_ledoux(q, k, N);
                const Rational b = factorial_moment_exact(q, k, N);
                CHECK(a == b);
                if (k == 0) CHECK(a == Rational(1));
            }
        }
    }
}

TEST_CASE("one particle reduces to the geometric law") {
    for (auto [num, den] : {std::pair<long, long>{1, 3}, {1, 2}, {7, 10}}) {
        const Rational q(num, den);
        for (long k = 0; k <= 12; ++k) {
            CHECK(factorial_moment_exact(q, k, 1) ==
                  geometric_factorial_moment(q, k));
        }
    }
}

TEST_CASE("stirling transform sends falling to ordinary powers") {
    const Rational q(1, 2);
    for (long N : {1L, 4L, 9L}) {
        CHECK(polynomial_moment_exact(q, 0, N) == Rational(1));
        CHECK(polynomial_moment_exact(q, 1, N) == factorial_moment_exact(q, 1, N));
        // E[X^2] = E[(X)_2] + E[X].
        CHECK(polynomial_moment_exact(q, 2, N) ==
              factorial_moment_exact(q, 2, N) + factorial_moment_exact(q, 1, N));
    }

    // One particle, fully independent series oracle:
    // sum_x x^k (1-q) q^x against the exact rational route.
    PrecisionContext ctx = PrecisionContext::floating(256);
    ctx.activate();
    for (long k = 1; k <= 6; ++k) {
        BigFloat s(0);
        for (long x = 1; x <= 1000; ++x) {
            BigFloat xk(1);
            for (long j = 0; j < k; ++j) xk *= BigFloat(x);
            s += xk * BigFloat(0.5) * pow(BigFloat(0.5), x);
        }
        const BigFloat want = to_bigfloat(polynomial_moment_exact(q, k, 1));
        CHECK(to_double(abs(s - want) / want) < 1e-60);
    }
}

TEST_CASE("expected-measure integrals match the exact rationals") {
    MeixnerBasis basis = build_basis(0.5, 12);
    for (long N = 1; N <= 12; ++N) {
        NuMeasure nu = nu_measure(basis, N);
        PrecisionContext ctx = PrecisionContext::floating(nu.bits);
        ctx.activate();
        for (long k = 0; k <= 6; ++k) {
            const BigFloat fac = nu.factorial_moment(k);
            const BigFloat facx = to_bigfloat(factorial_moment_exact(Rational(1, 2), k, N));
            CHECK(to_double(abs(fac - facx) / facx) < 1e-8);
            const BigFloat mom = nu.moment(k);
            const BigFloat momx = to_bigfloat(polynomial_moment_exact(Rational(1, 2), k, N));
            CHECK(to_double(abs(mom - momx) / momx) < 1e-8);
            CHECK(nu.moment_tail_bound(k) / to_double(momx) < 1e-10);
        }
        CHECK(to_double(nu.restricted_moment(3, 0)) ==
              doctest::Approx(to_double(nu.moment(3))).epsilon(1e-12));
        CHECK(to_double(nu.restricted_moment(3, 5)) <=
              to_double(nu.restricted_moment(3, 2)));
    }

    MeixnerBasis basis4 = build_basis(0.25, 12);
    for (long N : {1L, 5L, 9L}) {
        NuMeasure nu = nu_measure(basis4, N);
        PrecisionContext ctx = PrecisionContext::floating(nu.bits);
        ctx.activate();
        for (long k : {1L, 4L}) {
            const BigFloat want = to_bigfloat(polynomial_moment_exact(Rational(1, 4), k, N));
            CHECK(to_double(abs(nu.moment(k) - want) / want) < 1e-8);
        }
    }
}

TEST_CASE("double wrapper stays exact and refuses deep factorials") {
    const double got = factorial_moment(0.5, 3, 4);
    const double want = to_double(factorial_moment_exact(Rational(1, 2), 3, 4));
    CHECK(got == doctest::Approx(want).epsilon(1e-15));
    CHECK_THROWS_AS((void)factorial_moment(0.5, 41, 3), std::domain_error);
    CHECK_THROWS_AS((void)factorial_moment_exact(Rational(1, 2), -1, 3),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)factorial_moment_ledoux(Rational(3, 2), 2, 3),
                    std::invalid_argument);
}

TEST_CASE("transfer inequalities hold at a pinned point") {
    // Upper: E[X^k 1_{X>=R}] <= E[(X)_k] exp(k^2/(2R) + k^3/(3R^2)) at
    // R = 2k; lower: E[X^k] >= (E[(X)_k] - E[X^{2k}]^{1/2} P(X>R)^{1/2})
    // exp(k(k-1)/(2R)).  Both recomputed here from the measure directly,
    // then the packaged checker must agree.
    const long N = 10, k = 3;
    MeixnerBasis basis = build_basis(0.5, 20);
    NuMeasure nu = nu_measure(basis, N);
    PrecisionContext ctx = PrecisionContext::floating(nu.bits);
    ctx.activate();
    const BigFloat fac = nu.factorial_moment(k);
    {
        const double R = 2.0 * k;
        const BigFloat lhs = nu.restricted_moment(k, 2 * k);
        const BigFloat rhs =
            fac * exp(BigFloat(k * k / (2.0 * R) + std::pow(double(k), 3) / (3.0 * R * R)));
        CHECK(lhs <= rhs);
    }
    {
        const double mu = std::pow(1.0 + std::sqrt(0.5), 2) / 0.5;
        const double R = mu * N * (1.0 + std::pow(double(N), -1.0 / 3.0));
        const BigFloat defect =
            sqrt(nu.moment(2 * k)) * sqrt(nu.tail(long(std::floor(R)) + 1));
        const BigFloat rhs = (fac - defect) * exp(BigFloat(k * (k - 1) / (2.0 * R)));
        CHECK(nu.moment(k) >= rhs);
    }
    BoundCheckReport rep = moment_bound_checks({0.5}, {10}, {3}, {});
    CHECK(rep.all_pass);
    bool saw_upper = false, saw_lower = false;
    for (const BoundCheckRow& row : rep.rows) {
        if (row.bound == "poly-upper") saw_upper = true;
        if (row.bound == "poly-lower") saw_lower = true;
        if (row.bound == "poly-upper" || row.bound == "poly-lower")
            CHECK(row.pass);
    }
    CHECK(saw_upper);
    CHECK(saw_lower);
}

TEST_CASE("moment bound battery on a reduced grid") {
    BoundCheckReport rep = moment_bound_checks({0.25, 0.5}, {50, 100},
                                               {5, 8, 12, 17, 21}, {0.1, 0.3});
    CHECK(rep.all_pass);
    CHECK(!rep.rows.empty());

    // The asymptotic ratio stays near its constant: every log-ratio within
    // a fixed envelope, and within each (q, N) series the spread across k
    // stays small (the k-dependence of the prediction is right).
    std::map<std::pair<double, long>, std::pair<double, double>> spread;
    long fa_rows = 0;
    for (const BoundCheckRow& row : rep.rows) {
        if (row.bound != "factorial-asymptotics") continue;
        ++fa_rows;
        CHECK(row.k <= long(std::pow(double(row.N), 2.0 / 3.0) + 1e-9));
        CHECK(std::abs(row.log_ratio) < 2.0);
        auto [it, fresh] = spread.try_emplace({row.q, row.N},
                                              std::pair{row.log_ratio, row.log_ratio});
        if (!fresh) {
            it->second.first = std::min(it->second.first, row.log_ratio);
            it->second.second = std::max(it->second.second, row.log_ratio);
        }
    }
    CHECK(fa_rows > 0);
    for (const auto& [key, mm] : spread) CHECK(mm.second - mm.first < 0.3);

    // The k <= N^{2/3} window is enforced: N = 50 admits k <= 13, so the
    // deeper k values only appear at N = 100.
    for (const BoundCheckRow& row : rep.rows)
        if (row.bound == "factorial-asymptotics" && row.N == 50)
            CHECK(row.k <= 13);

    bool saw_crude = false, saw_edge = false;
    for (const BoundCheckRow& row : rep.rows) {
        if (row.bound == "crude-tail") {
            saw_crude = true;
            CHECK(row.pass);
        }
        if (row.bound == "edge-tail") {
            saw_edge = true;
            CHECK(row.pass);
            // log_ratio = log(tail / eps^{3/2}) is the fitted constant;
            // it must be a sane positive constant, not a collapse to zero.
            CHECK(row.log_ratio > -3.0);
            CHECK(row.log_ratio < 1.0);
        }
    }
    CHECK(saw_crude);
    CHECK(saw_edge);

    for (const auto& [name, mm] : rep.envelopes) {
        if (name == "poly-envelope") {
            CHECK(mm.first > -2.303);
            CHECK(mm.second < 2.303);
        }
    }
}

}  // TEST_SUITE("moments")

#include "meixner.hpp"

#include "qspecial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

namespace qpt {

namespace {

// Integer binomial coefficient via the multiplicative formula (every
// intermediate division is exact).
Integer binom_int(long n, long r) {
    if (r < 0 || r > n) return Integer(0);
    r = std::min(r, n - r);
    Integer out(1);
    for (long i = 1; i <= r; ++i) {
        out *= (n - r + i);
        out /= i;
    }
    return out;
}

// Fixed-point solve for the grid end X of a certified truncation of
// sum_{x > X} x^m q^x: X log(1/q) ~ log(1/eps) + m log X, floored so the
// dropped-term ratio q (1+1/x)^m stays below sqrt(q).
long certified_grid_end(double q, long m, double eps, double root_guess) {
    const double lq = std::log(1.0 / q);
    double X = std::max({root_guess, 1.5 * m / lq, 50.0});
    for (int it = 0; it < 80; ++it) {
        X = (std::log(1.0 / eps) + m * std::log(std::max(X, 4.0))) / lq;
        X = std::max(X, 1.5 * m / lq);
    }
    X = std::max({X, 1.3 * root_guess + 20.0, 2.0 * m / lq, 60.0});
    return static_cast<long>(std::ceil(X));
}

// Shared LU determinant of I - M for a dense row-major N x N BigFloat M.
BigFloat det_identity_minus(const std::vector<BigFloat>& m, long N) {
    std::vector<BigFloat> B(static_cast<size_t>(N) * N);
    for (long i = 0; i < N; ++i)
        for (long j = 0; j < N; ++j) {
            B[i * N + j] = -m[i * N + j];
            if (i == j) B[i * N + j] += 1;
        }
    BigFloat det(1);
    int sign = 1;
    for (long c = 0; c < N; ++c) {
        long piv = c;
        for (long r = c + 1; r < N; ++r)
            if (abs(B[r * N + c]) > abs(B[piv * N + c])) piv = r;
        if (B[piv * N + c] == 0) return BigFloat(0);
        if (piv != c) {
            for (long j = c; j < N; ++j) std::swap(B[piv * N + j], B[c * N + j]);
            sign = -sign;
        }
        det *= B[c * N + c];
        for (long r = c + 1; r < N; ++r) {
            BigFloat f = B[r * N + c] / B[c * N + c];
            for (long j = c; j < N; ++j) B[r * N + j] -= f * B[c * N + j];
        }
    }
    if (sign < 0) det = -det;
    return det;
}

}  // namespace

// ---------------------------------------------------------------------------
// Basis construction.

MeixnerBasis build_basis(double q, long degree, unsigned bits,
                         double trunc_eps, long moment_headroom) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("build_basis: require 0 < q < 1");
    if (degree < 1) throw std::invalid_argument("build_basis: degree >= 1");
    if (moment_headroom < 0)
        throw std::invalid_argument("build_basis: headroom >= 0");
    PrecisionContext ctx = PrecisionContext::floating(bits);
    ctx.truncation_eps = trunc_eps;
    ctx.activate();

    const long m = 2 * degree + 2 + moment_headroom;
    // A-priori zero-location guess with the shape of the classical
    // recurrence bounds; the built coefficients re-certify it below.
    const double sq = std::sqrt(q);
    double root_guess = (degree * (1 + sq) * (1 + sq) + q + 1) / (1 - q);
    long X = certified_grid_end(q, m, trunc_eps, root_guess);

    MeixnerBasis basis;
    basis.q = q;
    basis.degree = degree;
    basis.bits = bits;

    const bool full_pairs = degree <= 40;
    for (int attempt = 0;; ++attempt) {
        if (attempt > 4)
            throw PrecisionError("build_basis: grid certification failed");
        const size_t n = static_cast<size_t>(X) + 1;
        const BigFloat qb(q);
        std::vector<BigFloat> w(n);
        w[0] = BigFloat(1) - qb;
        for (size_t x = 1; x < n; ++x) w[x] = w[x - 1] * qb;

        std::vector<BigFloat> pm2(n, BigFloat(0)), pm1(n, BigFloat(0)),
            p(n, BigFloat(1));
        std::vector<std::vector<BigFloat>> rows;
        if (full_pairs) rows.reserve(static_cast<size_t>(degree) + 1);

        basis.b.assign(static_cast<size_t>(degree) + 1, BigFloat(0));
        basis.a.assign(static_cast<size_t>(degree) + 1, BigFloat(0));
        basis.norm2.assign(static_cast<size_t>(degree) + 1, BigFloat(0));
        // Off-diagonal on-grid inner products tracked during the sweep:
        // adjacent, next-adjacent, and against the constant row.
        BigFloat band_max(0);

        for (long k = 0; k <= degree; ++k) {
            BigFloat nrm(0), xb(0), c1(0), c2(0), c0(0);
            for (size_t x = 0; x < n; ++x) {
                const BigFloat pw = p[x] * w[x];
                nrm += p[x] * pw;
                xb += static_cast<long>(x) * p[x] * pw;
                if (k >= 1) c1 += pm1[x] * pw;
                if (k >= 2) c2 += pm2[x] * pw;
                if (k >= 1) c0 += pw;
            }
            basis.norm2[static_cast<size_t>(k)] = nrm;
            basis.b[static_cast<size_t>(k)] = xb / nrm;
            if (k >= 1)
                basis.a[static_cast<size_t>(k)] =
                    nrm / basis.norm2[static_cast<size_t>(k) - 1];
            if (k >= 1) {
                const BigFloat sn = sqrt(nrm);
                const BigFloat v1 =
                    abs(c1) / (sn * sqrt(basis.norm2[static_cast<size_t>(k) - 1]));
                if (v1 > band_max) band_max = v1;
                const BigFloat v0 = abs(c0) / (sn * sqrt(basis.norm2[0]));
                if (v0 > band_max) band_max = v0;
                if (k >= 2) {
                    const BigFloat v2 =
                        abs(c2) /
                        (sn * sqrt(basis.norm2[static_cast<size_t>(k) - 2]));
                    if (v2 > band_max) band_max = v2;
                }
            }
            if (full_pairs) rows.push_back(p);
            if (k < degree) {
                const BigFloat& bk = basis.b[static_cast<size_t>(k)];
                const BigFloat& ak = basis.a[static_cast<size_t>(k)];
                for (size_t x = 0; x < n; ++x) {
                    BigFloat nx =
                        (static_cast<long>(x) - bk) * p[x] - ak * pm1[x];
                    pm2[x] = pm1[x];
                    pm1[x] = p[x];
                    p[x] = nx;
                }
            }
        }

        // Gershgorin bound on the Jacobi matrix: all zeros in [0, root].
        double root = 0.0;
        for (long nn = 0; nn < degree; ++nn) {
            double v = to_double(basis.b[static_cast<size_t>(nn)]) +
                       std::sqrt(to_double(basis.a[static_cast<size_t>(nn)])) +
                       std::sqrt(to_double(basis.a[static_cast<size_t>(nn) + 1]));
            root = std::max(root, v);
        }
        const double r = q * std::exp(static_cast<double>(m) / X);
        if (X < 1.25 * root + 20 || r >= 0.999) {
            const long prev = X;
            X = certified_grid_end(q, m, trunc_eps, 1.3 * root + 20);
            X = std::max(X, prev + prev / 2);
            continue;
        }
        // Polynomial-times-geometric tail of the dropped x > X range:
        // |p_i p_j| <= x^m there because every zero sits below X.
        BigFloat tail_raw = (BigFloat(1) - qb) * pow(BigFloat(X + 1), static_cast<unsigned>(m)) *
                            pow(qb, static_cast<unsigned>(X + 1)) / (1 - BigFloat(r));
        BigFloat min_norm2 = basis.norm2[0];
        for (const BigFloat& v : basis.norm2)
            if (v < min_norm2) min_norm2 = v;
        const double trunc_error = to_double(tail_raw / min_norm2);
        if (!(trunc_error < 1e-12)) {
            X += X / 2;
            continue;
        }

        double resid = to_double(band_max);
        if (full_pairs) {
            for (long i = 0; i <= degree; ++i)
                for (long j = 0; j < i; ++j) {
                    BigFloat s(0);
                    for (size_t x = 0; x < n; ++x)
                        s += rows[static_cast<size_t>(i)][x] *
                             rows[static_cast<size_t>(j)][x] * w[x];
                    double v = std::fabs(to_double(
                        s / (sqrt(basis.norm2[static_cast<size_t>(i)]) *
                             sqrt(basis.norm2[static_cast<size_t>(j)]))));
                    resid = std::max(resid, v);
                }
        }
        basis.x_max = X;
        basis.root_bound = root;
        basis.trunc_error = trunc_error;
        basis.ortho_residual = resid + trunc_error;
        break;
    }
    if (basis.ortho_residual > 1e-8)
        throw PrecisionError("build_basis: orthonormality residual " +
                             std::to_string(basis.ortho_residual) +
                             " exceeds 1e-8; raise precision_bits");
    basis.sqrt_norm2.resize(basis.norm2.size());
    for (size_t i = 0; i < basis.norm2.size(); ++i)
        basis.sqrt_norm2[i] = sqrt(basis.norm2[i]);
    return basis;
}

std::vector<BigFloat> MeixnerBasis::eval(const BigFloat& x, long d) const {
    if (d < 0 || d > degree)
        throw std::invalid_argument("MeixnerBasis::eval: degree out of range");
    std::vector<BigFloat> out(static_cast<size_t>(d) + 1);
    BigFloat pm1(0), p(1);
    for (long n = 0; n <= d; ++n) {
        out[static_cast<size_t>(n)] = p / sqrt_norm2[static_cast<size_t>(n)];
        if (n < d) {
            BigFloat nx = (x - b[static_cast<size_t>(n)]) * p -
                          a[static_cast<size_t>(n)] * pm1;
            pm1 = p;
            p = nx;
        }
    }
    return out;
}

void MeixnerBasis::eval_with_derivative(const BigFloat& x, long d,
                                        std::vector<BigFloat>& m,
                                        std::vector<BigFloat>& dm) const {
    if (d < 0 || d > degree)
        throw std::invalid_argument("MeixnerBasis::eval: degree out of range");
    m.assign(static_cast<size_t>(d) + 1, BigFloat(0));
    dm.assign(static_cast<size_t>(d) + 1, BigFloat(0));
    BigFloat pm1(0), p(1), dpm1(0), dp(0);
    for (long n = 0; n <= d; ++n) {
        m[static_cast<size_t>(n)] = p / sqrt_norm2[static_cast<size_t>(n)];
        dm[static_cast<size_t>(n)] = dp / sqrt_norm2[static_cast<size_t>(n)];
        if (n < d) {
            const BigFloat& bn = b[static_cast<size_t>(n)];
            const BigFloat& an = a[static_cast<size_t>(n)];
            BigFloat nx = (x - bn) * p - an * pm1;
            BigFloat ndx = p + (x - bn) * dp - an * dpm1;
            pm1 = p;
            p = nx;
            dpm1 = dp;
            dp = ndx;
        }
    }
}

// ---------------------------------------------------------------------------
// Exact second route: geometric moments + Chebyshev algorithm.

std::vector<Integer> stirling_row(long n) {
    if (n < 0) throw std::invalid_argument("stirling_row: n >= 0");
    std::vector<Integer> row(1, Integer(1));  // S(0,0) = 1
    for (long m = 1; m <= n; ++m) {
        std::vector<Integer> nxt(static_cast<size_t>(m) + 1, Integer(0));
        for (long j = 1; j <= m; ++j) {
            Integer v = row[static_cast<size_t>(j) - 1];
            if (j < m) v += j * row[static_cast<size_t>(j)];
            nxt[static_cast<size_t>(j)] = v;
        }
        row = std::move(nxt);
    }
    return row;
}

MonicRecurrenceExact build_recurrence_exact(const Rational& q, long degree) {
    if (!(q > 0 && q < 1))
        throw std::invalid_argument("build_recurrence_exact: 0 < q < 1");
    if (degree < 0)
        throw std::invalid_argument("build_recurrence_exact: degree >= 0");
    const long M = 2 * degree + 1;
    // Ordinary moments of (1-q) q^x through the factorial moments of the
    // geometric law, E[(X)_j] = j! (q/(1-q))^j.
    const Rational theta = q / (1 - q);
    std::vector<Rational> fac(static_cast<size_t>(M) + 1);
    Integer jfact(1);
    Rational thpow(1);
    for (long j = 0; j <= M; ++j) {
        if (j > 0) {
            jfact *= j;
            thpow *= theta;
        }
        fac[static_cast<size_t>(j)] = Rational(jfact) * thpow;
    }
    std::vector<Rational> mu(static_cast<size_t>(M) + 1, Rational(0));
    std::vector<Integer> srow(1, Integer(1));
    for (long mdeg = 0; mdeg <= M; ++mdeg) {
        if (mdeg > 0) {
            std::vector<Integer> nxt(static_cast<size_t>(mdeg) + 1, Integer(0));
            for (long j = 1; j <= mdeg; ++j) {
                Integer v = srow[static_cast<size_t>(j) - 1];
                if (j < mdeg) v += j * srow[static_cast<size_t>(j)];
                nxt[static_cast<size_t>(j)] = v;
            }
            srow = std::move(nxt);
        }
        Rational s(0);
        for (long j = 0; j <= mdeg; ++j)
            s += Rational(srow[static_cast<size_t>(j)]) * fac[static_cast<size_t>(j)];
        mu[static_cast<size_t>(mdeg)] = s;
    }

    MonicRecurrenceExact rec;
    rec.b.assign(static_cast<size_t>(degree) + 1, Rational(0));
    rec.a.assign(static_cast<size_t>(degree) + 1, Rational(0));
    rec.norm2.assign(static_cast<size_t>(degree) + 1, Rational(0));
    std::vector<Rational> sm2(static_cast<size_t>(M) + 2, Rational(0));
    std::vector<Rational> sm1(mu);
    sm1.resize(static_cast<size_t>(M) + 2, Rational(0));
    rec.b[0] = mu[1] / mu[0];
    rec.norm2[0] = mu[0];
    for (long k = 1; k <= degree; ++k) {
        std::vector<Rational> cur(static_cast<size_t>(M) + 2, Rational(0));
        for (long l = k; l <= M - k; ++l)
            cur[static_cast<size_t>(l)] =
                sm1[static_cast<size_t>(l) + 1] -
                rec.b[static_cast<size_t>(k) - 1] * sm1[static_cast<size_t>(l)] -
                rec.a[static_cast<size_t>(k) - 1] * sm2[static_cast<size_t>(l)];
        rec.norm2[static_cast<size_t>(k)] = cur[static_cast<size_t>(k)];
        rec.a[static_cast<size_t>(k)] =
            cur[static_cast<size_t>(k)] / sm1[static_cast<size_t>(k) - 1];
        // l runs up to (2*degree+1) - k >= k+1, so cur[k+1] is always valid.
        rec.b[static_cast<size_t>(k)] =
            cur[static_cast<size_t>(k) + 1] / cur[static_cast<size_t>(k)] -
            sm1[static_cast<size_t>(k)] / sm1[static_cast<size_t>(k) - 1];
        sm2 = std::move(sm1);
        sm1 = std::move(cur);
    }
    return rec;
}

// ---------------------------------------------------------------------------
// Kernel, Gram matrices, determinants.

BigFloat kernel(const MeixnerBasis& basis, long N, const BigFloat& x,
                const BigFloat& y) {
    if (N < 1 || N > basis.degree)
        throw std::invalid_argument("kernel: need 1 <= N <= basis degree");
    const BigFloat ratio = basis.sqrt_norm2[static_cast<size_t>(N)] /
                           basis.sqrt_norm2[static_cast<size_t>(N) - 1];
    if (x == y) {
        std::vector<BigFloat> m, dm;
        basis.eval_with_derivative(x, N, m, dm);
        return ratio * (dm[static_cast<size_t>(N)] * m[static_cast<size_t>(N) - 1] -
                        dm[static_cast<size_t>(N) - 1] * m[static_cast<size_t>(N)]);
    }
    std::vector<BigFloat> mx = basis.eval(x, N);
    std::vector<BigFloat> my = basis.eval(y, N);
    return ratio *
           (mx[static_cast<size_t>(N)] * my[static_cast<size_t>(N) - 1] -
            mx[static_cast<size_t>(N) - 1] * my[static_cast<size_t>(N)]) /
           (x - y);
}

GramTable gram_table(const MeixnerBasis& basis, long D, long t_max) {
    if (D < 1 || D > basis.degree)
        throw std::invalid_argument("gram_table: need 1 <= D <= basis degree");
    if (t_max < 0 || t_max > basis.x_max)
        throw std::invalid_argument("gram_table: t_max outside certified grid");
    PrecisionContext::floating(basis.bits).activate();
    GramTable table;
    table.q = basis.q;
    table.D = D;
    table.t_max = t_max;
    table.bits = basis.bits;
    table.tail_bound = basis.trunc_error;
    table.cum.assign(static_cast<size_t>(t_max) + 1,
                     std::vector<BigFloat>(static_cast<size_t>(D) * D, BigFloat(0)));
    std::vector<BigFloat> S(static_cast<size_t>(D) * D, BigFloat(0));
    const BigFloat qb(basis.q);
    // One backward sweep accumulates sum_{y >= x} M_i M_j w for every x.
    BigFloat w = (BigFloat(1) - qb) * pow(qb, static_cast<unsigned>(basis.x_max));
    for (long x = basis.x_max; x >= 0; --x) {
        std::vector<BigFloat> mrow = basis.eval(BigFloat(x), D - 1);
        for (long i = 0; i < D; ++i) {
            const BigFloat miw = mrow[static_cast<size_t>(i)] * w;
            for (long j = i; j < D; ++j)
                S[static_cast<size_t>(i) * D + j] += miw * mrow[static_cast<size_t>(j)];
        }
        if (x <= t_max) {
            auto& out = table.cum[static_cast<size_t>(x)];
            for (long i = 0; i < D; ++i)
                for (long j = i; j < D; ++j) {
                    out[static_cast<size_t>(i) * D + j] = S[static_cast<size_t>(i) * D + j];
                    out[static_cast<size_t>(j) * D + i] = S[static_cast<size_t>(i) * D + j];
                }
        }
        if (x > 0) w /= qb;
    }
    return table;
}

std::vector<BigFloat> GramTable::gram(long N, long t) const {
    if (N < 1 || N > D) throw std::invalid_argument("gram: need 1 <= N <= D");
    if (t < 0 || t > t_max)
        throw std::invalid_argument("gram: need 0 <= t <= t_max");
    std::vector<BigFloat> out(static_cast<size_t>(N) * N);
    const auto& src = cum[static_cast<size_t>(t)];
    for (long i = 0; i < N; ++i)
        for (long j = 0; j < N; ++j)
            out[static_cast<size_t>(i) * N + j] = src[static_cast<size_t>(i) * D + j];
    return out;
}

double gap_probability(const GramTable& table, long N, long t) {
    PrecisionContext::floating(table.bits).activate();
    const BigFloat det = det_identity_minus(table.gram(N, t), N);
    const double d = to_double(det);
    if (d < -1e-8 || d > 1.0 + 1e-8)
        throw PrecisionError("gap_probability: determinant " + std::to_string(d) +
                             " outside [0,1] beyond tolerance");
    return std::min(1.0, std::max(0.0, d));
}

std::pair<double, double> widom_bound(const GramTable& table, long N, long t) {
    PrecisionContext::floating(table.bits).activate();
    std::vector<BigFloat> g = table.gram(N, t);
    BigFloat tr(0);
    for (long i = 0; i < N; ++i) tr += g[static_cast<size_t>(i) * N + i];
    const double det =
        std::min(1.0, std::max(0.0, to_double(det_identity_minus(g, N))));
    return {det, std::exp(-to_double(tr))};
}

std::vector<double> symmetric_eigenvalues(std::vector<double> a, long n) {
    if (n < 1 || static_cast<long>(a.size()) != n * n)
        throw std::invalid_argument("symmetric_eigenvalues: bad dimensions");
    auto at = [&](long i, long j) -> double& { return a[static_cast<size_t>(i) * n + j]; };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0, scale = 0;
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < n; ++j) {
                if (i != j) off += at(i, j) * at(i, j);
                else scale += std::fabs(at(i, j));
            }
        if (off < 1e-28 * (1.0 + scale * scale)) break;
        for (long p = 0; p < n - 1; ++p)
            for (long qq = p + 1; qq < n; ++qq) {
                if (std::fabs(at(p, qq)) < 1e-300) continue;
                const double theta = (at(qq, qq) - at(p, p)) / (2 * at(p, qq));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1.0 / std::sqrt(t * t + 1), s = t * c;
                for (long k = 0; k < n; ++k) {
                    const double akp = at(k, p), akq = at(k, qq);
                    at(k, p) = c * akp - s * akq;
                    at(k, qq) = s * akp + c * akq;
                }
                for (long k = 0; k < n; ++k) {
                    const double apk = at(p, k), aqk = at(qq, k);
                    at(p, k) = c * apk - s * aqk;
                    at(qq, k) = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) ev[static_cast<size_t>(i)] = at(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

// ---------------------------------------------------------------------------
// Expected empirical measure.

NuMeasure nu_measure(const MeixnerBasis& basis, long N) {
    if (N < 1 || N > basis.degree)
        throw std::invalid_argument("nu_measure: need 1 <= N <= basis degree");
    PrecisionContext::floating(basis.bits).activate();
    NuMeasure nu;
    nu.q = basis.q;
    nu.N = N;
    nu.x_max = basis.x_max;
    nu.bits = basis.bits;
    const size_t n = static_cast<size_t>(basis.x_max) + 1;
    nu.density.resize(n);
    const BigFloat qb(basis.q);
    const BigFloat ratio = basis.sqrt_norm2[static_cast<size_t>(N)] /
                           basis.sqrt_norm2[static_cast<size_t>(N) - 1];
    BigFloat w = BigFloat(1) - qb;
    std::vector<BigFloat> m, dm;
    for (size_t x = 0; x < n; ++x) {
        basis.eval_with_derivative(BigFloat(static_cast<long>(x)), N, m, dm);
        const BigFloat kxx =
            ratio * (dm[static_cast<size_t>(N)] * m[static_cast<size_t>(N) - 1] -
                     dm[static_cast<size_t>(N) - 1] * m[static_cast<size_t>(N)]);
        nu.density[x] = kxx * w / N;
        w *= qb;
    }
    nu.suffix.assign(n + 1, BigFloat(0));
    for (size_t x = n; x-- > 0;) nu.suffix[x] = nu.suffix[x + 1] + nu.density[x];

    // Certificates.  Beyond the grid, K_N(x,x) <= x^{2N-2} sum_l 1/norm2_l
    // (all zeros below x_max), so the dropped mass is dominated by a
    // geometric series with ratio r0 <= sqrt(q).
    BigFloat inv_norm_sum(0);
    for (long l = 0; l < N; ++l)
        inv_norm_sum += 1 / basis.norm2[static_cast<size_t>(l)];
    nu.tail_prefactor = to_double((BigFloat(1) - qb) * inv_norm_sum / N);
    const double r0 =
        basis.q * std::exp((2.0 * N - 2.0) / static_cast<double>(basis.x_max));
    nu.growth_ratio = r0;
    const double log_beyond = (2.0 * N - 2.0) * std::log1p(basis.x_max) +
                              (basis.x_max + 1) * std::log(basis.q) +
                              std::log(nu.tail_prefactor / (1.0 - r0));
    const double beyond = std::exp(log_beyond);
    nu.tail_mass_bound =
        std::fabs(to_double(BigFloat(1) - nu.suffix[0])) + beyond;
    return nu;
}

BigFloat NuMeasure::tail(long t) const {
    if (t < 0) t = 0;
    if (t > x_max) return BigFloat(0);
    return suffix[static_cast<size_t>(t)];
}

BigFloat NuMeasure::moment(long k) const {
    if (k < 0) throw std::invalid_argument("moment: k >= 0");
    if (k == 0) return suffix[0];
    PrecisionContext::floating(bits).activate();
    BigFloat s(0);
    for (long x = 1; x <= x_max; ++x)
        s += pow(BigFloat(x), static_cast<unsigned>(k)) *
             density[static_cast<size_t>(x)];
    return s;
}

BigFloat NuMeasure::factorial_moment(long k) const {
    if (k < 0) throw std::invalid_argument("factorial_moment: k >= 0");
    if (k == 0) return suffix[0];
    PrecisionContext::floating(bits).activate();
    BigFloat s(0);
    for (long x = k; x <= x_max; ++x) {
        BigFloat prod(1);
        for (long i = 0; i < k; ++i) prod *= (x - i);
        s += prod * density[static_cast<size_t>(x)];
    }
    return s;
}

BigFloat NuMeasure::restricted_moment(long k, long lo) const {
    if (k < 0) throw std::invalid_argument("restricted_moment: k >= 0");
    PrecisionContext::floating(bits).activate();
    BigFloat s(0);
    for (long x = std::max(lo, k == 0 ? 0L : 1L); x <= x_max; ++x) {
        BigFloat term = k == 0 ? BigFloat(1)
                               : pow(BigFloat(x), static_cast<unsigned>(k));
        s += term * density[static_cast<size_t>(x)];
    }
    return s;
}

double NuMeasure::moment_tail_bound(long k) const {
    const double rk =
        q * std::exp((2.0 * N - 2.0 + k) / static_cast<double>(x_max));
    if (rk > 0.97)
        throw PrecisionError("moment_tail_bound: grid too small for order " +
                             std::to_string(k));
    const double logv = (2.0 * N - 2.0 + k) * std::log1p(x_max) +
                        (x_max + 1) * std::log(q) +
                        std::log(tail_prefactor / (1.0 - rk));
    return std::exp(logv);
}

double trace_identity_residual(const GramTable& table, const NuMeasure& nu,
                               long N, long t) {
    std::vector<BigFloat> g = table.gram(N, t);
    BigFloat tr(0);
    for (long i = 0; i < N; ++i) tr += g[static_cast<size_t>(i) * N + i];
    return std::fabs(to_double(tr - N * nu.tail(t)));
}

// ---------------------------------------------------------------------------
// Exact factorial and polynomial moments.

Rational factorial_moment_ledoux(const Rational& q, long k, long N) {
    if (!(q > 0 && q < 1))
        throw std::invalid_argument("factorial_moment_ledoux: 0 < q < 1");
    if (k < 0 || N < 1)
        throw std::invalid_argument("factorial_moment_ledoux: k >= 0, N >= 1");
    Rational total(0);
    for (long i = 0; i <= k; ++i) {
        Integer inner(0);
        for (long l = i; l < N; ++l) {
            Integer prod(1);
            for (long j = l - i + 1; j <= l + k - i; ++j) prod *= j;
            inner += prod;
        }
        const Integer c = binom_int(k, i);
        total += Rational(c * c * inner) * rational_pow(q, -i);
    }
    return rational_pow(q / (1 - q), k) * total / N;
}

Rational factorial_moment_exact(const Rational& q, long k, long N) {
    if (!(q > 0 && q < 1))
        throw std::invalid_argument("factorial_moment_exact: 0 < q < 1");
    if (k < 0 || N < 1)
        throw std::invalid_argument("factorial_moment_exact: k >= 0, N >= 1");
    Rational total(0);
    for (long i = 0; i <= k; ++i) {
        // (N+k-i)! / (N-i-1)! as the product of the k+1 integers ending at
        // N+k-i; a factor 0 appears exactly when the factorial convention
        // calls for a vanishing term.
        Integer prod(1);
        for (long j = N - i; j <= N + k - i; ++j) prod *= j;
        if (prod == 0) continue;
        const Integer c = binom_int(k, i);
        total += Rational(c * c * prod) * rational_pow(q, -i);
    }
    return rational_pow(q / (1 - q), k) * total / (Rational(N) * (k + 1));
}

double factorial_moment(double q, long k, long N) {
    if (k > 40)
        throw std::domain_error(
            "factorial_moment: double wrapper capped at k = 40; use the exact form");
    return to_double(factorial_moment_exact(Rational(q), k, N));
}

Rational polynomial_moment_exact(const Rational& q, long k, long N) {
    if (k < 0) throw std::invalid_argument("polynomial_moment_exact: k >= 0");
    const std::vector<Integer> S = stirling_row(k);
    Rational total(0);
    for (long j = 0; j <= k; ++j) {
        if (S[static_cast<size_t>(j)] == 0) continue;
        total += Rational(S[static_cast<size_t>(j)]) *
                 factorial_moment_exact(q, j, N);
    }
    return total;
}

// ---------------------------------------------------------------------------
// Moment-bound checkers.

namespace {

void envelope_update(BoundCheckReport& rep, const BoundCheckRow& row) {
    rep.rows.push_back(row);
    for (auto& e : rep.envelopes)
        if (e.first == row.bound) {
            e.second.first = std::min(e.second.first, row.log_ratio);
            e.second.second = std::max(e.second.second, row.log_ratio);
            return;
        }
    rep.envelopes.push_back({row.bound, {row.log_ratio, row.log_ratio}});
}

}  // namespace

BoundCheckReport moment_bound_checks(const std::vector<double>& q_grid,
                                     const std::vector<long>& N_grid,
                                     const std::vector<long>& k_grid,
                                     const std::vector<double>& eps_grid,
                                     long basis_cap, unsigned bits) {
    BoundCheckReport rep;
    std::map<std::pair<double, long>, std::pair<MeixnerBasis, NuMeasure>> cache;
    auto ensure_nu = [&](double q, long N) -> NuMeasure& {
        auto key = std::make_pair(q, N);
        auto it = cache.find(key);
        if (it == cache.end()) {
            MeixnerBasis basis = build_basis(q, N, bits);
            NuMeasure nu = nu_measure(basis, N);
            it = cache.emplace(key, std::make_pair(std::move(basis), std::move(nu)))
                     .first;
        }
        return it->second.second;
    };

    for (double q : q_grid) {
        const Rational rq(q);
        const double mu = mu_q(q);
        for (long N : N_grid) {
            const long k_cap =
                static_cast<long>(std::floor(std::pow(static_cast<double>(N), 2.0 / 3.0) + 1e-9));
            const bool with_nu = N <= basis_cap;
            for (long k : k_grid) {
                if (k < 1 || k > k_cap) continue;
                if (q < 1.0 / (static_cast<double>(k) * k)) continue;
                const double log_kq = -1.5 * std::log(std::pow(q, 1.0 / 6.0) * k);
                const double log_growth = k * std::log(mu * N);

                const double logfac =
                    log_rational(factorial_moment_exact(rq, k, N));
                BoundCheckRow fa;
                fa.bound = "factorial-asymptotics";
                fa.q = q;
                fa.N = N;
                fa.k = k;
                fa.lhs = logfac;
                fa.rhs = log_kq + log_growth - k * k / (2.0 * mu * N);
                fa.log_ratio = fa.lhs - fa.rhs;
                fa.pass = true;
                envelope_update(rep, fa);

                const Rational poly_k = polynomial_moment_exact(rq, k, N);
                const double logpoly = log_rational(poly_k);
                BoundCheckRow pe;
                pe.bound = "poly-envelope";
                pe.q = q;
                pe.N = N;
                pe.k = k;
                pe.lhs = logpoly;
                pe.rhs = log_kq + log_growth;
                pe.log_ratio = pe.lhs - pe.rhs;
                pe.pass = true;
                envelope_update(rep, pe);

                if (!with_nu) continue;
                NuMeasure& nu = ensure_nu(q, N);

                {  // E[X^k 1_{X>=R}] <= E[(X)_k] exp(k^2/2R + k^3/3R^2), R = 2k.
                    const long R = 2 * k;
                    const BigFloat lhs =
                        nu.restricted_moment(k, R) + BigFloat(nu.moment_tail_bound(k));
                    const BigFloat rhs =
                        to_bigfloat(factorial_moment_exact(rq, k, N)) *
                        exp(BigFloat(static_cast<double>(k) * k / (2.0 * R) +
                                     static_cast<double>(k) * k * k / (3.0 * R * R)));
                    BoundCheckRow row;
                    row.bound = "poly-upper";
                    row.q = q;
                    row.N = N;
                    row.k = k;
                    row.lhs = to_double(log(lhs));
                    row.rhs = to_double(log(rhs));
                    row.log_ratio = row.lhs - row.rhs;
                    row.pass = lhs <= rhs * BigFloat(1.0 + 1e-12);
                    rep.all_pass = rep.all_pass && row.pass;
                    envelope_update(rep, row);
                }
                {  // E[X^k] >= (E[(X)_k] - E[X^2k]^1/2 P(X>R)^1/2) e^{k(k-1)/2R}.
                    const double Rv = mu * N * (1.0 + std::pow(static_cast<double>(N), -1.0 / 3.0));
                    const long Rfloor = static_cast<long>(std::floor(Rv));
                    const BigFloat p_gt = nu.tail(Rfloor + 1);  // grid tail only:
                    // an under-estimate, which makes the subtracted term
                    // smaller and the check conservative.
                    const BigFloat fac_k = to_bigfloat(factorial_moment_exact(rq, k, N));
                    const BigFloat m2k =
                        to_bigfloat(polynomial_moment_exact(rq, 2 * k, N));
                    const BigFloat rhs =
                        (fac_k - sqrt(m2k) * sqrt(p_gt)) *
                        exp(BigFloat(static_cast<double>(k) * (k - 1) / (2.0 * Rv)));
                    const BigFloat lhs = to_bigfloat(poly_k);
                    BoundCheckRow row;
                    row.bound = "poly-lower";
                    row.q = q;
                    row.N = N;
                    row.k = k;
                    row.lhs = to_double(log(lhs));
                    row.rhs = rhs > 0 ? to_double(log(rhs))
                                      : -std::numeric_limits<double>::infinity();
                    row.log_ratio = row.lhs - row.rhs;
                    row.pass = rhs <= 0 || lhs >= rhs * BigFloat(1.0 - 1e-12);
                    rep.all_pass = rep.all_pass && row.pass;
                    envelope_update(rep, row);
                }
            }
            if (with_nu && N >= 50) {
                // Crude right-edge tail: log P(X >= mu_q N (1 + N^{-1/3}))
                // must sit below -N^{1/3} once N is moderately large.
                NuMeasure& nu = ensure_nu(q, N);
                const double thr =
                    mu * N * (1.0 + std::pow(static_cast<double>(N), -1.0 / 3.0));
                const double p =
                    to_double(nu.tail(static_cast<long>(std::ceil(thr)))) +
                    nu.tail_mass_bound;
                BoundCheckRow row;
                row.bound = "crude-tail";
                row.q = q;
                row.N = N;
                row.lhs = std::log(std::max(p, 1e-300));
                row.rhs = -std::pow(static_cast<double>(N), 1.0 / 3.0);
                row.log_ratio = row.lhs - row.rhs;
                row.pass = row.lhs <= row.rhs;
                rep.all_pass = rep.all_pass && row.pass;
                envelope_update(rep, row);
            }
        }
        // Left-of-edge tail mass at the largest nu-accessible N: the fitted
        // lower constant is exp(min log_ratio) over these rows.
        long N_star = 0;
        for (long N : N_grid)
            if (N <= basis_cap) N_star = std::max(N_star, N);
        if (N_star >= 1) {
            NuMeasure& nu = ensure_nu(q, N_star);
            for (double eps : eps_grid) {
                if (!(eps > 0.0 && eps < 0.5)) continue;
                if (q < eps * eps * eps) continue;
                const double thr = mu * N_star * (1.0 - std::pow(q, 1.0 / 6.0) * eps);
                const double p =
                    to_double(nu.tail(static_cast<long>(std::ceil(thr))));
                BoundCheckRow row;
                row.bound = "edge-tail";
                row.q = q;
                row.N = N_star;
                row.eps = eps;
                row.lhs = p;
                row.rhs = std::pow(eps, 1.5);
                row.log_ratio = std::log(std::max(p, 1e-300)) - 1.5 * std::log(eps);
                row.pass = p > 0.0;
                rep.all_pass = rep.all_pass && row.pass;
                envelope_update(rep, row);
            }
        }
    }
    return rep;
}

}  // namespace qpt

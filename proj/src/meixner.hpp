// Orthonormal polynomials and determinantal formulas for the geometric
// weight w(x) = (1-q) q^x on {0, 1, 2, ...} (the Meixner weight at the
// second parameter beta = 1).
//
// This is the analytic side of the laboratory: the N-point ensemble with
// joint density proportional to  prod_{i<j}(lambda_i - lambda_j)^2 *
// prod_i w(lambda_i)  has largest-particle law
//
//     P(lambda_1 <= t - 1) = det(I_N - K^t_N),
//
// where K^t_N is the N x N Gram matrix of the first N orthonormal
// polynomials over l^2({t, t+1, ...}, w).  The module builds the
// polynomials, the Christoffel-Darboux kernel, the Gram matrices, the
// expected empirical measure nu_{q,N} (density K_N(x,x) w(x) / N), and the
// exact factorial/polynomial moments of nu_{q,N}, together with checkers
// for the moment inequalities used by the lower-tail argument.
//
// Arithmetic strategy:
//   * the basis is built by the Stieltjes procedure in BigFloat on a finite
//     grid {0..x_max}; x_max carries an explicit certificate (all zeros of
//     the stored polynomials are below the grid end and the dropped
//     polynomial-times-geometric tail is below trunc_error);
//   * a second, independent construction (exact moments of the geometric
//     weight + the Chebyshev moment-to-recurrence algorithm, all in
//     rationals) is exposed for cross-validation;
//   * factorial moments are exact rationals end to end; large-N polynomial
//     moments go through the exact Stirling-transform route rather than the
//     truncated-grid route.
//
// BigFloat sections are single-threaded by design (process-wide MPFR
// precision); everything returned is plain data that may be read from any
// thread afterwards.

#pragma once

#include "prec.hpp"

#include <string>
#include <utility>
#include <vector>

namespace qpt {

// ---------------------------------------------------------------------------
// Basis.

struct MeixnerBasis {
    double q = 0.0;
    long   degree = 0;        // polynomials M_0 .. M_degree are available
    long   x_max = 0;         // certified grid {0..x_max} for inner products
    unsigned bits = 256;      // MPFR mantissa bits used to build

    // Monic three-term recurrence p_{n+1} = (x - b_n) p_n - a_n p_{n-1},
    // indices 0..degree (a[0] = 0 by convention), plus squared norms
    // norm2[n] = <p_n, p_n> and their square roots.  The orthonormal family
    // is M_n = p_n / sqrt_norm2[n], with leading coefficient
    // kappa_n = 1 / sqrt_norm2[n] > 0.
    std::vector<BigFloat> b;
    std::vector<BigFloat> a;
    std::vector<BigFloat> norm2;
    std::vector<BigFloat> sqrt_norm2;

    double root_bound = 0.0;      // all zeros of p_1..p_degree lie in
                                  // [0, root_bound] (Gershgorin on the
                                  // Jacobi matrix); root_bound < x_max
    double trunc_error = 0.0;     // certified bound on the mass any
                                  // orthonormality integral loses to the
                                  // dropped tail x > x_max
    double ortho_residual = 0.0;  // max |<M_i, M_j> - delta_ij| over the
                                  // checked pairs, truncation included

    // Orthonormal values M_0(x)..M_d(x); requires 0 <= d <= degree.
    std::vector<BigFloat> eval(const BigFloat& x, long d) const;
    // Values and first derivatives in one recurrence sweep.
    void eval_with_derivative(const BigFloat& x, long d,
                              std::vector<BigFloat>& m,
                              std::vector<BigFloat>& dm) const;
};

// Stieltjes procedure on the certified grid.  The grid is sized so that
// every integrand of degree <= 2*degree + moment_headroom keeps a
// geometric-tail certificate below trunc_eps; the headroom is what later
// lets nu-measure moments up to order ~moment_headroom carry certificates
// on the same grid.  Throws PrecisionError when the orthonormality
// residual exceeds 1e-8 (raise bits), std::invalid_argument on bad q.
MeixnerBasis build_basis(double q, long degree, unsigned bits = 256,
                         double trunc_eps = 1e-30, long moment_headroom = 84);

// Independent construction: exact moments of w (via factorial moments of
// the geometric law and a Stirling-number table) fed to the Chebyshev
// moment-to-recurrence algorithm, entirely in rational arithmetic.  Slow
// beyond degree ~25 but bit-exact; used to cross-check build_basis.
struct MonicRecurrenceExact {
    std::vector<Rational> b, a, norm2;  // indices 0..degree, a[0] = 0
};
MonicRecurrenceExact build_recurrence_exact(const Rational& q, long degree);

// ---------------------------------------------------------------------------
// Kernel and Gram matrices.

// Christoffel-Darboux kernel K_N(x, y) = sum_{l<N} M_l(x) M_l(y), evaluated
// in closed two-term form (kappa_{N-1}/kappa_N) (M_N(x) M_{N-1}(y) -
// M_{N-1}(x) M_N(y)) / (x - y), with the x = y case through the derivative
// limit.  Requires 1 <= N <= basis.degree.
BigFloat kernel(const MeixnerBasis& basis, long N, const BigFloat& x,
                const BigFloat& y);

// Gram matrices of M_0..M_{D-1} over l^2({t, t+1, ...}, w) for every
// t = 0..t_max, produced by one backward sweep over the certified grid.
// Any principal block (N <= D) of cum[t] is the matrix K^t_N.
struct GramTable {
    double q = 0.0;
    long   D = 0;
    long   t_max = 0;
    unsigned bits = 256;
    double tail_bound = 0.0;  // per-entry certificate inherited from the basis
    std::vector<std::vector<BigFloat>> cum;  // cum[t] is D x D, row-major

    // Dense N x N block, row-major; requires N <= D, 0 <= t <= t_max.
    std::vector<BigFloat> gram(long N, long t) const;
};
GramTable gram_table(const MeixnerBasis& basis, long D, long t_max);

// det(I_N - K^t_N) = P(lambda_1 <= t - 1).  LU with partial pivoting in
// BigFloat; the result is clamped to [0, 1] and a clamp beyond 1e-8 raises
// PrecisionError.
double gap_probability(const GramTable& table, long N, long t);

// (det(I - K^t), exp(-Tr K^t)); the determinant never exceeds the trace
// bound because every eigenvalue of K^t lies in [0, 1].
std::pair<double, double> widom_bound(const GramTable& table, long N, long t);

// Eigenvalues of a dense symmetric matrix (row-major, n x n) by cyclic
// Jacobi rotations, ascending.  Double precision: symmetric spectra are
// perfectly conditioned, so 1e-10 checks are safe here.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, long n);

// ---------------------------------------------------------------------------
// Expected empirical measure.

struct NuMeasure {
    double q = 0.0;
    long   N = 0;
    long   x_max = 0;
    unsigned bits = 256;
    std::vector<BigFloat> density;   // x = 0..x_max: K_N(x,x) w(x) / N
    std::vector<BigFloat> suffix;    // suffix[t] = sum_{x>=t} density[x],
                                     // t = 0..x_max+1
    double tail_mass_bound = 0.0;    // certified bound on the mass beyond
                                     // the grid (plus |1 - total| residual)
    double growth_ratio = 0.0;       // certified geometric ratio dominating
                                     // the density beyond the grid
    double tail_prefactor = 0.0;     // (1-q) sum_l norm2_l^{-1} / N, the
                                     // other ingredient of the tail bounds

    BigFloat tail(long t) const;                 // nu([t, infinity))
    BigFloat moment(long k) const;               // E[X^k]
    BigFloat factorial_moment(long k) const;     // E[X (X-1) ... (X-k+1)]
    BigFloat restricted_moment(long k, long lo) const;  // E[X^k 1_{X >= lo}]
    // Certified bound on the grid-truncation error of moment(k).
    double moment_tail_bound(long k) const;
};

// Density through the derivative form of the Christoffel-Darboux diagonal
// (a route disjoint from the Gram-matrix sums, so trace comparisons pin
// both).  Requires N <= basis.degree.
NuMeasure nu_measure(const MeixnerBasis& basis, long N);

// |Tr K^t_N - N nu_{q,N}([t, infinity))|: matrix trace against the
// kernel-diagonal tail, sharing only the recurrence coefficients.
double trace_identity_residual(const GramTable& table, const NuMeasure& nu,
                               long N, long t);

// ---------------------------------------------------------------------------
// Exact moments of nu_{q,N}.

// E[(X)_k] for X ~ nu_{q,N} by the double-sum route: (q/(1-q))^k *
// sum_{i<=k} q^{-i} binom(k,i)^2 sum_{l=i}^{N-1} (l+k-i)!/(l-i)!, divided
// by N (the inner double sum counts all N particles; nu is normalized).
Rational factorial_moment_ledoux(const Rational& q, long k, long N);
// Same quantity by the collapsed single-sum route: (q/(1-q))^k (1/N)
// (1/(k+1)) sum_{i<=k} q^{-i} binom(k,i)^2 (N+k-i)!/(N-i-1)!, where a
// negative lower factorial index makes the term vanish (the rising product
// then crosses zero).  The two routes must agree exactly.
Rational factorial_moment_exact(const Rational& q, long k, long N);
// Double-precision convenience wrapper (exact core); refuses k > 40.
double factorial_moment(double q, long k, long N);

// E[X^k] exactly, through the Stirling transform
// E[X^k] = sum_j S(k,j) E[(X)_j].
Rational polynomial_moment_exact(const Rational& q, long k, long N);

// Stirling numbers of the second kind S(n, j), row n.
std::vector<Integer> stirling_row(long n);

// ---------------------------------------------------------------------------
// Moment-bound checkers.
//
// Each row records one inequality instance: lhs, rhs and log_ratio =
// log(lhs) - log(rhs) where both sides are positive.  Deterministic
// inequalities must hold outright (pass = lhs <= rhs up to 1e-12 relative
// slack); asymptotic envelopes are judged by the caller from the collected
// log-ratios.

struct BoundCheckRow {
    std::string bound;   // which inequality
    double q = 0.0;
    long   N = 0;
    long   k = 0;
    double eps = 0.0;    // only for the edge-tail rows
    double lhs = 0.0;    // log scale for the envelope rows, linear for the
    double rhs = 0.0;    // exact-inequality rows (documented per bound)
    double log_ratio = 0.0;
    bool   pass = false;
};

struct BoundCheckReport {
    std::vector<BoundCheckRow> rows;
    bool all_pass = true;  // exact inequalities only; envelopes are data
    // [min, max] of log_ratio per bound name, in row-first-seen order.
    std::vector<std::pair<std::string, std::pair<double, double>>> envelopes;
};

// Runs the full battery on a parameter grid:
//   * "factorial-asymptotics": M^q(k,N) against
//       (q^{1/6} k)^{-3/2} (mu_q N)^k exp(-k^2 / (2 mu_q N)),
//     envelope rows (exact moment, log scale), restricted to q >= k^{-2};
//   * "poly-envelope": E[X^k] against (q^{1/6} k)^{-3/2} (mu_q N)^k,
//     envelope rows, same restriction;
//   * "poly-upper": E[X^k 1_{X>=R}] <= E[(X)_k] exp(k^2/(2R) + k^3/(3R^2))
//     at R = 2k, exact inequality (needs a basis, so only run when N <=
//     basis_cap);
//   * "poly-lower": E[X^k] >= (E[(X)_k] - E[X^{2k}]^{1/2} P(X > R)^{1/2})
//     exp(k(k-1)/(2R)) at R = mu_q N (1 + N^{-1/3}), exact inequality
//     (same gate);
//   * "crude-tail": log P(X >= mu_q N (1 + N^{-1/3})) <= -N^{1/3},
//     checked when N >= 50 (small N has no room for the asymptotic);
//   * "edge-tail": P(X >= mu_q N (1 - q^{1/6} eps)) >= c eps^{3/2}; rows
//     report the ratio so the caller can read off the fitted c-hat; run at
//     the largest N in the grid for eps in eps_grid with q >= eps^3.
// Rows needing nu_{q,N} build one basis per (q, N) with N <= basis_cap.
BoundCheckReport moment_bound_checks(const std::vector<double>& q_grid,
                                     const std::vector<long>& N_grid,
                                     const std::vector<long>& k_grid,
                                     const std::vector<double>& eps_grid,
                                     long basis_cap = 120,
                                     unsigned bits = 256);

}  // namespace qpt

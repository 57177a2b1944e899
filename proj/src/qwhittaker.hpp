// q-Whittaker symmetric polynomials (Macdonald P at t = 0) via the branching
// rule, plus the associated measure on partitions under the geometric-weight
// specialization. Everything here has an exact-rational path: these laws are
// the fixed target the particle-system sampler and the lattice-path model are
// checked against, so they must not inherit anybody's rounding.
//
// Branching: P_mu(x_1..x_n) = sum_{eta prec mu} P_eta(x_1..x_{n-1}) psi(mu/eta) x_n^{|mu|-|eta|},
// where eta prec mu is interlacing and
//   psi(mu/eta) = prod_i binom(mu_i - mu_{i+1}, mu_i - eta_i)_q.
// The skew one-variable polynomial is psi(mu/eta) z^{|mu|-|eta|}.

#pragma once

#include "prec.hpp"

#include <map>
#include <vector>

namespace qpt {

using Partition = std::vector<long>;  // weakly decreasing, trailing zeros allowed

bool is_partition(const Partition& mu);
Partition trim(Partition mu);  // strip trailing zeros
long weight(const Partition& mu);
bool interlaces(const Partition& eta, const Partition& mu);  // eta prec mu

// P_{mu/eta}(z): zero unless eta prec mu.
Rational qwhittaker_skew_one_exact(const Partition& mu, const Partition& eta,
                                   const Rational& z, const Rational& q);
double qwhittaker_skew_one(const Partition& mu, const Partition& eta, double z,
                           double q);

// P_{mu/eta}(x_1..x_n) by iterated branching; P_mu = P_{mu/empty}.
// Float evaluation refuses |mu| > 60 or n > 8 (the chain count explodes and
// cancellation is unchecked there); the exact path has no such guard.
Rational qwhittaker_skew_exact(const Partition& mu, const Partition& eta,
                               const std::vector<Rational>& x, const Rational& q);
Rational qwhittaker_exact(const Partition& mu, const std::vector<Rational>& x,
                          const Rational& q);
double qwhittaker(const Partition& mu, const std::vector<double>& x, double q);

// b_mu = prod_i 1/(q;q)_{mu_i - mu_{i+1}}
Rational b_mu_exact(const Partition& mu, const Rational& q);

// P_mu(x) for every mu with at most max_len rows and mu_1 <= max_part, in
// enumerate_partitions order. One level-synchronous sweep over the branching
// rule; far cheaper than evaluating each mu independently when a whole
// measure is needed.
std::vector<Rational> qwhittaker_batch_exact(long max_len, long max_part,
                                             const std::vector<Rational>& x,
                                             const Rational& q);

// All partitions with at most max_len parts, each part <= max_part, ordered
// by weight then by std::vector's lexicographic order — the deterministic
// iteration order every consumer relies on.
std::vector<Partition> enumerate_partitions(long max_len, long max_part);

// The measure W(mu) proportional to b_mu P_mu(u^N) P_mu(u^T) (all variables
// specialized to the same u), truncated to mu_1 <= m_cap.
struct TruncatedMeasure {
    long N = 0, T = 0;
    long m_cap = 0;
    std::vector<Partition> support;   // enumeration order
    std::vector<Rational> weights;    // unnormalized, exact
    std::vector<double> probs;        // weights * (u^2;q)_inf^{NT}
    double tail_mass_bound = 0.0;     // certified mass beyond the cap
};

// Requires N, T >= 1; exact rational u, q. The normalization constant is
// evaluated in extended precision at ctx.precision bits. Throws
// PrecisionError("cap too small...") if the certified tail exceeds tail_tol.
TruncatedMeasure truncated_measure(long N, long T, const Rational& u,
                                   const Rational& q, long m_cap,
                                   const PrecisionContext& ctx,
                                   double tail_tol = 1e-8);

// Law of mu_1 under the truncated measure (atom -> probability).
std::map<long, double> top_row_marginal(const TruncatedMeasure& m);

// Exact unnormalized weight of the atom {mu_1 = r}: sum over mu_2..  — finite.
Rational top_row_atom_exact(long N, long T, const Rational& u, const Rational& q,
                            long r);

}  // namespace qpt

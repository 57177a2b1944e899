#include "qwhittaker.hpp"

#include "qspecial.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <unordered_map>

namespace qpt {

bool is_partition(const Partition& mu) {
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (mu[i] < 0) return false;
        if (i > 0 && mu[i] > mu[i - 1]) return false;
    }
    return true;
}

Partition trim(Partition mu) {
    while (!mu.empty() && mu.back() == 0) mu.pop_back();
    return mu;
}

long weight(const Partition& mu) {
    long w = 0;
    for (long p : mu) w += p;
    return w;
}

bool interlaces(const Partition& eta, const Partition& mu) {
    // mu_1 >= eta_1 >= mu_2 >= eta_2 >= ...
    const Partition e = trim(eta), m = trim(mu);
    if (e.size() > m.size()) return false;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const long ei = i < e.size() ? e[i] : 0;
        if (ei > m[i]) return false;
        if (i + 1 < m.size() && m[i + 1] > ei) return false;
    }
    return true;
}

namespace {

void require_partition(const Partition& mu, const char* who) {
    if (!is_partition(mu)) {
        std::ostringstream os;
        os << who << ": not a partition:";
        for (long p : mu) os << " " << p;
        throw std::invalid_argument(os.str());
    }
}

template <class Real>
Real skew_one_factor(const Partition& mu, const Partition& eta, const Real& z,
                     const Real& q) {
    const Partition m = trim(mu), e = trim(eta);
    Real out(1);
    const long dz = weight(m) - weight(e);
    for (long i = 0; i < dz; ++i) out *= z;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const long mi = m[i];
        const long mnext = i + 1 < m.size() ? m[i + 1] : 0;
        const long ei = i < e.size() ? e[i] : 0;
        if constexpr (std::is_same_v<Real, Rational>) {
            out *= q_binomial_exact(mi - mnext, mi - ei, q);
        } else {
            out *= q_binomial(mi - mnext, mi - ei, q);
        }
    }
    return out;
}

}  // namespace

Rational qwhittaker_skew_one_exact(const Partition& mu, const Partition& eta,
                                   const Rational& z, const Rational& q) {
    require_partition(mu, "qwhittaker_skew_one");
    require_partition(eta, "qwhittaker_skew_one");
    if (!interlaces(eta, mu)) return Rational(0);
    return skew_one_factor<Rational>(mu, eta, z, q);
}

double qwhittaker_skew_one(const Partition& mu, const Partition& eta, double z,
                           double q) {
    require_partition(mu, "qwhittaker_skew_one");
    require_partition(eta, "qwhittaker_skew_one");
    if (!interlaces(eta, mu)) return 0.0;
    return skew_one_factor<double>(mu, eta, z, q);
}

namespace {

// Shared recursion for the multi-variable skew polynomial. Memoized on
// (number of variables still to place, inner partition); one memo per call.
template <class Real>
class BranchingEval {
  public:
    BranchingEval(const Partition& eta, const std::vector<Real>& x, const Real& q)
        : eta_(trim(eta)), x_(x), q_(q) {}

    Real run(const Partition& mu) { return eval(trim(mu), x_.size()); }

  private:
    static bool contains(const Partition& inner, const Partition& outer) {
        if (inner.size() > outer.size()) return false;
        for (std::size_t i = 0; i < inner.size(); ++i)
            if (inner[i] > outer[i]) return false;
        return true;
    }

    Real eval(const Partition& mu, std::size_t nvars) {
        if (nvars == 0) return mu == eta_ ? Real(1) : Real(0);
        if (!contains(eta_, mu)) return Real(0);  // every chain step only grows
        const auto key = std::make_pair(nvars, mu);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        // peel the last variable: sum over kappa prec mu
        Real total(0);
        Partition kappa = mu;
        sum_over_inner(mu, kappa, 0, nvars, total);
        memo_.emplace(key, total);
        return total;
    }

    // Enumerate kappa with kappa prec mu, kappa_i in [mu_{i+1}, mu_i];
    // recursion over rows keeps it allocation-light.
    void sum_over_inner(const Partition& mu, Partition& kappa, std::size_t row,
                        std::size_t nvars, Real& total) {
        if (row == mu.size()) {
            Partition k = trim(kappa);
            Real inner = eval(k, nvars - 1);
            if (inner != Real(0))
                total += inner * skew_one_factor<Real>(mu, k, x_[nvars - 1], q_);
            return;
        }
        const long lo = row + 1 < mu.size() ? mu[row + 1] : 0;
        for (long v = lo; v <= mu[row]; ++v) {
            kappa[row] = v;
            sum_over_inner(mu, kappa, row + 1, nvars, total);
        }
        kappa[row] = mu[row];
    }

    Partition eta_;
    const std::vector<Real>& x_;
    Real q_;
    std::map<std::pair<std::size_t, Partition>, Real> memo_;
};

}  // namespace

Rational qwhittaker_skew_exact(const Partition& mu, const Partition& eta,
                               const std::vector<Rational>& x, const Rational& q) {
    require_partition(mu, "qwhittaker_skew");
    require_partition(eta, "qwhittaker_skew");
    BranchingEval<Rational> ev(eta, x, q);
    return ev.run(mu);
}

Rational qwhittaker_exact(const Partition& mu, const std::vector<Rational>& x,
                          const Rational& q) {
    return qwhittaker_skew_exact(mu, {}, x, q);
}

double qwhittaker(const Partition& mu, const std::vector<double>& x, double q) {
    require_partition(mu, "qwhittaker");
    if (weight(mu) > 60 || x.size() > 8) {
        std::ostringstream os;
        os << "qwhittaker: refusing float evaluation at |mu|=" << weight(mu)
           << ", n=" << x.size() << " (use the exact-rational evaluator)";
        throw std::invalid_argument(os.str());
    }
    BranchingEval<double> ev({}, x, double(q));
    return ev.run(mu);
}

Rational b_mu_exact(const Partition& mu, const Rational& q) {
    require_partition(mu, "b_mu");
    const Partition m = trim(mu);
    Rational out(1);
    for (std::size_t i = 0; i < m.size(); ++i) {
        const long mnext = i + 1 < m.size() ? m[i + 1] : 0;
        out /= q_pochhammer<Rational>(q, q, m[i] - mnext);
    }
    return out;
}

std::vector<Partition> enumerate_partitions(long max_len, long max_part) {
    if (max_len < 0 || max_part < 0)
        throw std::invalid_argument("enumerate_partitions: negative bounds");
    std::vector<Partition> out = {{}};
    Partition cur;
    // depth-first over weakly decreasing rows, then sort into canonical order
    std::function<void(long, long)> rec = [&](long row, long bound) {
        if (row == max_len) return;
        for (long v = 1; v <= bound; ++v) {
            cur.push_back(v);
            out.push_back(cur);
            rec(row + 1, v);
            cur.pop_back();
        }
    };
    rec(0, max_part);
    std::sort(out.begin(), out.end(), [](const Partition& a, const Partition& b) {
        const long wa = weight(a), wb = weight(b);
        if (wa != wb) return wa < wb;
        return a < b;
    });
    return out;
}

std::vector<Rational> qwhittaker_batch_exact(long max_len, long max_part,
                                             const std::vector<Rational>& x,
                                             const Rational& q) {
    const auto support = enumerate_partitions(max_len, max_part);
    std::map<Partition, std::size_t> index;
    for (std::size_t i = 0; i < support.size(); ++i) index[support[i]] = i;

    std::vector<Rational> cur(support.size(), Rational(0));
    cur[index.at({})] = 1;  // level 0: P with no variables
    for (const Rational& z : x) {
        std::vector<Rational> next(support.size(), Rational(0));
        for (std::size_t i = 0; i < support.size(); ++i) {
            const Partition& mu = support[i];
            Rational total(0);
            Partition kappa = mu;
            std::function<void(std::size_t)> rec = [&](std::size_t row) {
                if (row == mu.size()) {
                    const Partition k = trim(kappa);
                    const Rational& inner = cur[index.at(k)];
                    if (inner != 0)
                        total += inner * skew_one_factor<Rational>(mu, k, z, q);
                    return;
                }
                const long lo = row + 1 < mu.size() ? mu[row + 1] : 0;
                for (long v = lo; v <= mu[row]; ++v) {
                    kappa[row] = v;
                    rec(row + 1);
                }
                kappa[row] = mu[row];
            };
            rec(0);
            next[i] = std::move(total);
        }
        cur = std::move(next);
    }
    return cur;
}

TruncatedMeasure truncated_measure(long N, long T, const Rational& u,
                                   const Rational& q, long m_cap,
                                   const PrecisionContext& ctx, double tail_tol) {
    if (N < 1 || T < 1) throw std::domain_error("truncated_measure: N, T must be >= 1");
    if (m_cap < 0) throw std::domain_error("truncated_measure: m_cap must be >= 0");
    if (!(u > 0 && u < 1) || !(q > 0 && q < 1))
        throw std::domain_error("truncated_measure: u, q must lie in (0,1)");

    TruncatedMeasure out;
    out.N = N;
    out.T = T;
    out.m_cap = m_cap;

    const std::vector<Rational> xa(static_cast<std::size_t>(N), u);
    const std::vector<Rational> xb(static_cast<std::size_t>(T), u);
    const long max_len = std::min(N, T);

    out.support = enumerate_partitions(max_len, m_cap);
    const auto pa = qwhittaker_batch_exact(max_len, m_cap, xa, q);
    const auto pb = N == T ? pa : qwhittaker_batch_exact(max_len, m_cap, xb, q);
    out.weights.reserve(out.support.size());
    for (std::size_t i = 0; i < out.support.size(); ++i)
        out.weights.push_back(b_mu_exact(out.support[i], q) * pa[i] * pb[i]);

    // normalization: probs = weights * (u^2;q)_inf^{NT}, evaluated in
    // extended precision so the certified tail is limited by the series
    // truncation, not by double rounding.
    PrecisionContext local = ctx;
    local.activate();
    const BigFloat log_poch = log_q_pochhammer_inf<BigFloat>(
        to_bigfloat(u * u), to_bigfloat(q), ctx.truncation_eps);
    const BigFloat norm = exp(BigFloat(N) * BigFloat(T) * log_poch);

    BigFloat total(0);
    out.probs.reserve(out.weights.size());
    for (const auto& w : out.weights) {
        BigFloat p = to_bigfloat(w) * norm;
        total += p;
        out.probs.push_back(to_double(p));
    }
    const double tail = to_double(BigFloat(1) - total);
    out.tail_mass_bound = std::max(0.0, tail) + 1e-15;
    if (out.tail_mass_bound > tail_tol) {
        std::ostringstream os;
        os << "truncated_measure: cap too small: certified tail "
           << out.tail_mass_bound << " exceeds tolerance " << tail_tol
           << " at m_cap=" << m_cap;
        throw PrecisionError(os.str());
    }
    for (double p : out.probs)
        if (p < 0.0) throw PrecisionError("truncated_measure: negative probability");
    return out;
}

std::map<long, double> top_row_marginal(const TruncatedMeasure& m) {
    std::map<long, double> law;
    for (std::size_t i = 0; i < m.support.size(); ++i) {
        const long r = m.support[i].empty() ? 0 : m.support[i][0];
        law[r] += m.probs[i];
    }
    return law;
}

Rational top_row_atom_exact(long N, long T, const Rational& u, const Rational& q,
                            long r) {
    if (N < 1 || T < 1) throw std::domain_error("top_row_atom: N, T must be >= 1");
    if (r < 0) return Rational(0);
    const std::vector<Rational> xa(static_cast<std::size_t>(N), u);
    const std::vector<Rational> xb(static_cast<std::size_t>(T), u);
    const long max_len = std::min(N, T);
    Rational sum(0);
    // all partitions with mu_1 = r exactly, remaining rows <= r
    for (const auto& rest : enumerate_partitions(max_len - 1, r)) {
        if (r == 0 && !rest.empty()) continue;
        Partition mu;
        mu.push_back(r);
        mu.insert(mu.end(), rest.begin(), rest.end());
        if (!is_partition(mu)) continue;
        mu = trim(mu);
        sum += b_mu_exact(mu, q) * qwhittaker_exact(mu, xa, q) *
               qwhittaker_exact(mu, xb, q);
    }
    return sum;
}

}  // namespace qpt

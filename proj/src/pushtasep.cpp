#include "pushtasep.hpp"

#include "qspecial.hpp"

#include <cmath>
#include <sstream>

namespace qpt {

PushTasep::PushTasep(const QParams& params, double tail_eps)
    : params_(params),
      jump_table_(params.u * params.u, params.q, tail_eps),
      push_cache_(params.q) {
    params_.validate();
}

ParticleConfig PushTasep::initial(long N) {
    if (N < 1) throw std::domain_error("PushTasep::initial: N must be >= 1");
    ParticleConfig cfg;
    cfg.x.resize(static_cast<std::size_t>(N));
    for (long k = 0; k < N; ++k) cfg.x[static_cast<std::size_t>(k)] = k + 1;
    cfg.T = 0;
    return cfg;
}

void PushTasep::step(ParticleConfig& cfg, RngStream& rng, StepRecord* rec) {
    const long N = static_cast<long>(cfg.x.size());
    if (rec) {
        rec->jumps.assign(static_cast<std::size_t>(N), 0);
        rec->pushes.assign(static_cast<std::size_t>(N), 0);
        rec->gaps_before.assign(static_cast<std::size_t>(N), -1);
    }
    long prev_old = 0, prev_new = 0;  // particle k-1 before/after this step
    for (long k = 0; k < N; ++k) {
        const long xk = cfg.x[static_cast<std::size_t>(k)];
        const long jump = jump_table_.sample(rng);
        long push = 0;
        if (k > 0) {
            const long m = prev_new - prev_old;
            const long gap = xk - prev_old;
            if (gap < 1)
                throw ModelConsistencyError("PushTasep::step: non-increasing configuration");
            push = push_cache_.sample(gap - 1, m, rng);
            if (rec) rec->gaps_before[static_cast<std::size_t>(k)] = gap;
        }
        const long xnew = xk + jump + push;
        if (k > 0 && xnew <= prev_new) {
            std::ostringstream os;
            os << "PushTasep::step: ordering violated at particle " << (k + 1)
               << " (x=" << xnew << " vs left neighbour " << prev_new << ")";
            throw ModelConsistencyError(os.str());
        }
        prev_old = xk;
        prev_new = xnew;
        cfg.x[static_cast<std::size_t>(k)] = xnew;
        if (rec) {
            rec->jumps[static_cast<std::size_t>(k)] = jump;
            rec->pushes[static_cast<std::size_t>(k)] = push;
        }
    }
    ++cfg.T;
}

ParticleConfig PushTasep::run(long N, long T, RngStream& rng) {
    ParticleConfig cfg = initial(N);
    for (long t = 0; t < T; ++t) step(cfg, rng);
    return cfg;
}

double scaled_observable(long x, long N, const QParams& params) {
    params.validate();
    const double q = params.q, u = params.u;
    const double theta = log_base_q(q, u);
    TailCertificate cert{};
    const double psi2 = q_digamma_second<double>(theta, q, 1e-18, &cert);
    if (!(psi2 < 0.0))
        throw PrecisionError("scaled_observable: psi''_q(log_q u) must be negative");
    const double denom =
        std::cbrt(-psi2) / std::log(1.0 / q) * std::cbrt(static_cast<double>(N));
    const double center = f_q(q, u) * static_cast<double>(N);
    return (static_cast<double>(x) - center) / denom;
}

}  // namespace qpt

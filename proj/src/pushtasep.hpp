// Discrete-time geometric q-pushTASEP on Z, step initial condition x_k(0) = k.
//
// One time step, particles updated left to right:
//   x_k(T+1) = x_k(T) + J_k + P_k,
// J_k ~ qGeo(u^2) independent, and P_k is the push the (k-1)-st particle
// transmits: P_k ~ phi_{q^{-1}, q^e, 0}( . | m) with
//   m = x_{k-1}(T+1) - x_{k-1}(T)   (how far the left neighbour just moved),
//   e = x_k(T) - x_{k-1}(T) - 1     (empty sites between them before the step).
// The leftmost particle has x_0 = -infinity: it never receives a push.
//
// The q^e exponent (not q^{e+1}) is what makes the push distribution's support
// stop exactly at the collision boundary: s >= m - e keeps x_{k-1} < x_k
// pathwise. The match with the q-Whittaker marginal is pinned down exactly in
// the two-step enumeration test.

#pragma once

#include "prec.hpp"
#include "rng.hpp"
#include "sampling.hpp"

#include <optional>
#include <vector>

namespace qpt {

struct ParticleConfig {
    std::vector<long> x;  // strictly increasing positions, x[k-1] = particle k
    long T = 0;           // time steps taken
};

struct StepRecord {
    std::vector<long> jumps;        // J_k
    std::vector<long> pushes;       // P_k
    std::vector<long> gaps_before;  // x_k(T) - x_{k-1}(T), index 0 unused (= -1)
};

class ModelConsistencyError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class PushTasep {
  public:
    PushTasep(const QParams& params, double tail_eps = 1e-14);

    static ParticleConfig initial(long N);

    // Advance one step in place. If rec is non-null the per-particle jump and
    // push components are recorded (used by the decomposition checks).
    void step(ParticleConfig& cfg, RngStream& rng, StepRecord* rec = nullptr);

    ParticleConfig run(long N, long T, RngStream& rng);

    const QParams& params() const { return params_; }

  private:
    QParams params_;
    QGeoTable jump_table_;  // qGeo(u^2): identical for every particle and step
    QdbbCache push_cache_;
};

// (x - f_q N) / ( (-psi''_q(log_q u))^{1/3} (log 1/q)^{-1} N^{1/3} )
double scaled_observable(long x, long N, const QParams& params);

}  // namespace qpt

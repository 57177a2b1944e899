// Experiment battery: each experiment runs a set of named checks against the
// library's mathematical claims and reports verdicts plus the statistics that
// back them. Reports are byte-deterministic given (config, seed): worker
// results are indexed by sample, reductions run in fixed order, and wall-time
// never enters report.json (timings go to a separate sidecar file).

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace qpt {

struct LabConfig {
    std::uint64_t seed = 20260822;
    int threads = 1;
    unsigned precision_bits = 256;
    std::string out_dir;
    nlohmann::json experiments;  // per-experiment overrides, may be empty

    // Parse + merge a JSON document into this config. Throws ConfigError.
    void merge_json(const std::string& text);
    nlohmann::ordered_json echo() const;  // deterministic part (no threads)
};

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct CheckResult {
    std::string name;
    bool pass = false;
    bool inconclusive = false;  // flagged honest non-answers (e.g. out-of-reach regimes)
    std::vector<std::pair<std::string, double>> stats;   // ordered, deterministic
    std::vector<std::pair<std::string, std::string>> notes;
};

struct ExperimentResult {
    std::string name;
    std::vector<CheckResult> checks;
    // CSV tables keyed by file stem; first row is the header.
    std::vector<std::pair<std::string, std::string>> tables;
    std::vector<std::pair<std::string, double>> timings_s;  // sidecar only
    bool passed() const;
};

const std::vector<std::string>& experiment_names();

// Throws ConfigError for unknown names; mathematical failures come back as
// failed checks, not exceptions (exceptions mean the run itself broke).
ExperimentResult run_experiment(const std::string& name, const LabConfig& cfg);

nlohmann::ordered_json report_json(const LabConfig& cfg,
                                   const std::vector<ExperimentResult>& results);

// Writes report.json, each CSV table, and timings.csv under dir.
void write_report(const std::string& dir, const LabConfig& cfg,
                  const std::vector<ExperimentResult>& results);

// Deterministic worker pool: evaluates fn(i) for i in [0, n) across the given
// number of threads, with results committed by index. fn must only touch its
// own slot. Used by every sampling experiment.
void parallel_for(long n, int threads, const std::function<void(long)>& fn);

}  // namespace qpt

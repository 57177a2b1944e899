// C binding. All exceptions stop at this boundary and turn into status codes;
// the offending message is parked on the lab handle for qpt_last_error.

#include "qptlab/qptlab.h"

#include "experiments.hpp"
#include "prec.hpp"
#include "qspecial.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <memory>
#include <new>
#include <string>

struct qpt_lab {
    qpt::LabConfig config;
    std::string last_error;
};

struct qpt_report {
    qpt::LabConfig config;
    std::vector<qpt::ExperimentResult> results;
    std::string json_cache;
    bool all_passed = false;
};

namespace {

qpt_status guard(qpt_lab* lab, const std::function<qpt_status()>& body) {
    if (!lab) return QPT_EINVAL;
    lab->last_error.clear();
    try {
        return body();
    } catch (const qpt::ConfigError& e) {
        lab->last_error = e.what();
        return QPT_ECONFIG;
    } catch (const qpt::PrecisionError& e) {
        lab->last_error = e.what();
        return QPT_EPRECISION;
    } catch (const std::domain_error& e) {
        lab->last_error = e.what();
        return QPT_EDOMAIN;
    } catch (const std::invalid_argument& e) {
        lab->last_error = e.what();
        return QPT_EINVAL;
    } catch (const std::ios_base::failure& e) {
        lab->last_error = e.what();
        return QPT_EIO;
    } catch (const std::exception& e) {
        lab->last_error = e.what();
        return QPT_EINTERNAL;
    } catch (...) {
        lab->last_error = "unknown exception";
        return QPT_EINTERNAL;
    }
}

}  // namespace

extern "C" {

const char* qpt_version(void) { return "1.0.0"; }

qpt_status qpt_lab_create(qpt_lab** out) {
    if (!out) return QPT_EINVAL;
    *out = new (std::nothrow) qpt_lab();
    return *out ? QPT_OK : QPT_EINTERNAL;
}

void qpt_lab_destroy(qpt_lab* lab) { delete lab; }

qpt_status qpt_lab_configure(qpt_lab* lab, const char* config_json) {
    return guard(lab, [&]() -> qpt_status {
        if (!config_json) throw std::invalid_argument("config_json is null");
        lab->config.merge_json(config_json);
        return QPT_OK;
    });
}

const char* qpt_last_error(const qpt_lab* lab) {
    return lab ? lab->last_error.c_str() : "null lab handle";
}

qpt_status qpt_eval_mu_q(qpt_lab* lab, double q, double* out) {
    return guard(lab, [&]() -> qpt_status {
        if (!out) throw std::invalid_argument("out is null");
        *out = qpt::mu_q(q);
        return QPT_OK;
    });
}

qpt_status qpt_eval_f_q(qpt_lab* lab, double q, double u, double* out) {
    return guard(lab, [&]() -> qpt_status {
        if (!out) throw std::invalid_argument("out is null");
        *out = qpt::f_q(q, u);
        return QPT_OK;
    });
}

qpt_status qpt_run(qpt_lab* lab, const char* experiment, qpt_report** out) {
    return guard(lab, [&]() -> qpt_status {
        if (!experiment) throw std::invalid_argument("experiment name is null");
        if (!out) throw std::invalid_argument("out is null");
        *out = nullptr;
        const std::string name(experiment);

        auto rep = std::make_unique<qpt_report>();
        rep->config = lab->config;
        if (name == "report") {
            for (const auto& n : qpt::experiment_names())
                rep->results.push_back(qpt::run_experiment(n, lab->config));
        } else {
            const auto& known = qpt::experiment_names();
            if (std::find(known.begin(), known.end(), name) == known.end())
                throw std::invalid_argument("unknown experiment: " + name);
            rep->results.push_back(qpt::run_experiment(name, lab->config));
        }
        rep->all_passed = true;
        for (const auto& r : rep->results) rep->all_passed = rep->all_passed && r.passed();
        rep->json_cache = qpt::report_json(rep->config, rep->results).dump(2);
        rep->json_cache.push_back('\n');
        const bool ok = rep->all_passed;
        *out = rep.release();
        return ok ? QPT_OK : QPT_ECHECK;
    });
}

int qpt_report_passed(const qpt_report* rep) { return rep && rep->all_passed ? 1 : 0; }

const char* qpt_report_json(const qpt_report* rep) {
    return rep ? rep->json_cache.c_str() : "";
}

qpt_status qpt_report_write(const qpt_report* rep, const char* dir) {
    if (!rep || !dir) return QPT_EINVAL;
    try {
        qpt::write_report(dir, rep->config, rep->results);
        return QPT_OK;
    } catch (const std::exception&) {
        return QPT_EIO;
    }
}

void qpt_report_destroy(qpt_report* rep) { delete rep; }

}  // extern "C"

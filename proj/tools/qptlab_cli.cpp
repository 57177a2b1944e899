// Command-line front end. Talks to the library exclusively through the C API.
//
//   qptlab verify <experiment> [--config c.json] [--seed N] [--out DIR]
//                 [--threads N] [--precision-bits N]
//   qptlab report [same flags]
//
// Exit codes: 0 all checks passed, 1 at least one check failed,
// 2 usage or configuration error.

#include "qptlab/qptlab.h"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

struct Options {
    std::string experiment;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<int> precision_bits;
    std::string out_dir = "qptlab_out";
};

void add_common_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--config", opt.config_path, "JSON configuration file");
    cmd->add_option("--seed", opt.seed, "base RNG seed (uint64)");
    cmd->add_option("--out", opt.out_dir, "output directory for report.json and CSVs");
    cmd->add_option("--threads", opt.threads, "worker threads (does not affect results)");
    cmd->add_option("--precision-bits", opt.precision_bits,
                    "mantissa bits for extended-precision sections");
}

// Flags override file contents; the file is passed through first.
int configure(qpt_lab* lab, const Options& opt) {
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) {
            std::cerr << "error: cannot open config file: " << opt.config_path << "\n";
            return 2;
        }
        std::stringstream buf;
        buf << in.rdbuf();
        if (qpt_lab_configure(lab, buf.str().c_str()) != QPT_OK) {
            std::cerr << "error: " << qpt_last_error(lab) << "\n";
            return 2;
        }
    }
    std::ostringstream overrides;
    overrides << "{";
    bool first = true;
    auto field = [&](const std::string& key, const std::string& value) {
        if (!first) overrides << ",";
        overrides << "\"" << key << "\":" << value;
        first = false;
    };
    if (opt.seed) field("seed", std::to_string(*opt.seed));
    if (opt.threads) field("threads", std::to_string(*opt.threads));
    if (opt.precision_bits) field("precision_bits", std::to_string(*opt.precision_bits));
    field("out", "\"" + opt.out_dir + "\"");
    overrides << "}";
    if (qpt_lab_configure(lab, overrides.str().c_str()) != QPT_OK) {
        std::cerr << "error: " << qpt_last_error(lab) << "\n";
        return 2;
    }
    return 0;
}

int run(const Options& opt) {
    qpt_lab* lab = nullptr;
    if (qpt_lab_create(&lab) != QPT_OK) {
        std::cerr << "error: failed to create lab handle\n";
        return 2;
    }
    int rc = configure(lab, opt);
    if (rc != 0) {
        qpt_lab_destroy(lab);
        return rc;
    }
    qpt_report* rep = nullptr;
    const qpt_status st = qpt_run(lab, opt.experiment.c_str(), &rep);
    if (st != QPT_OK && st != QPT_ECHECK) {
        std::cerr << "error: " << qpt_last_error(lab) << "\n";
        qpt_lab_destroy(lab);
        return 2;
    }
    if (qpt_report_write(rep, opt.out_dir.c_str()) != QPT_OK) {
        std::cerr << "error: failed to write outputs to " << opt.out_dir << "\n";
        qpt_report_destroy(rep);
        qpt_lab_destroy(lab);
        return 2;
    }
    std::cout << qpt_report_json(rep);
    const int exit_code = qpt_report_passed(rep) ? 0 : 1;
    qpt_report_destroy(rep);
    qpt_lab_destroy(lab);
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"q-pushTASEP / q-Whittaker verification battery"};
    app.require_subcommand(1);
    app.set_version_flag("--version", qpt_version());

    Options opt;
    auto* verify = app.add_subcommand("verify", "run one experiment");
    verify->add_option("experiment", opt.experiment,
                       "identities | meixner | moments | laplace | concentration | main-theorem")
        ->required();
    add_common_flags(verify, opt);

    auto* report = app.add_subcommand("report", "run the full battery");
    add_common_flags(report, opt);
    report->callback([&]() { opt.experiment = "report"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    return run(opt);
}

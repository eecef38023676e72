// mtsim: microcoil trap array design and verification tool.
//
// Verbs:
//   field   magnetic field over a scan grid
//   force   dipole force over a scan grid
//   couple  pairwise spin-spin coupling matrix (or species table)
//   spin    spin dynamics: gamma sweep, cluster state, time evolution
//   report  design health summary with scale projections
//   layout  geometry export and spacing-ratio analysis
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include "microtrap/errors.hpp"
#include "microtrap/field_kernel.hpp"
#include "microtrap/runner.hpp"
#include "microtrap/version.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    CLI::App app{"microcoil ion-trap array designer"};
    app.set_version_flag("--version",
                         std::string(microtrap::kToolName) + " " +
                             microtrap::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    microtrap::RunOptions opts;
    std::string out_dir = "out";
    std::string kernel;

    const std::vector<std::string> verbs{"field",  "force",  "couple",
                                         "spin",   "report", "layout"};
    for (const std::string& verb : verbs) {
        CLI::App* sub = app.add_subcommand(verb);
        sub->add_option("-c,--config", config_path, "run configuration file")
            ->required();
        sub->add_option("-o,--out", out_dir, "output directory (default: out)");
        sub->add_option("--format", opts.format,
                        "grid table format: csv, json, both")
            ->check(CLI::IsMember({"csv", "json", "both"}));
        sub->add_option("-j,--threads", opts.threads, "worker threads")
            ->check(CLI::PositiveNumber);
        sub->add_option("--kernel", kernel, "force a field kernel")
            ->check(CLI::IsMember({"scalar", "avx2"}));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const std::string verb = app.get_subcommands().front()->get_name();
    opts.out_dir = out_dir;

    try {
        if (kernel == "scalar") {
            microtrap::force_kernel(microtrap::KernelKind::Scalar);
        } else if (kernel == "avx2") {
            if (!microtrap::avx2_kernel_available()) {
                std::fprintf(stderr, "error: avx2 kernel not available on this host\n");
                return 2;
            }
            microtrap::force_kernel(microtrap::KernelKind::Avx2);
        }

        const microtrap::ConfigDoc cfg = microtrap::ConfigDoc::parse_file(config_path);
        const std::vector<std::string> files =
            microtrap::run_verb(verb, cfg, opts);
        for (const std::string& f : files) std::printf("%s\n", f.c_str());
        return 0;
    } catch (const microtrap::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const microtrap::SingularityError& e) {
        std::fprintf(stderr, "singularity: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

#pragma once

#include "microtrap/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace microtrap {

struct RunOptions {
    std::filesystem::path out_dir = "out";
    std::string format = "csv"; // grid tables: csv | json | both
    int threads = 1;
};

// Executes one CLI verb ("field", "force", "couple", "spin", "report",
// "layout") against a parsed config. Returns the files written, run manifest
// last. Throws ConfigError for configuration problems, SingularityError or
// std::runtime_error for runtime failures.
std::vector<std::string> run_verb(const std::string& verb, const ConfigDoc& cfg,
                                  const RunOptions& opts);

} // namespace microtrap

#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace microtrap {

// Canonical number formatting for all serialized output: shortest decimal
// string that round-trips the double exactly. Keeps CSV/JSON files
// reproducible bit-for-bit across runs.
std::string format_double(double v);

// FNV-1a 64-bit, used to fingerprint configs in run manifests.
std::uint64_t fnv1a64(std::string_view data);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

// Streaming CSV assembly with canonical formatting. Rows are buffered so a
// writer can be filled from parallel chunks into preassigned slots.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns);

    std::size_t column_count() const { return columns_.size(); }

    // Preallocate `n` rows for slot-addressed writes.
    void resize(std::size_t n);
    void set_row(std::size_t i, const std::vector<double>& values);
    void append_row(const std::vector<double>& values);

    std::string serialize() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

// Run manifest: what produced which artifacts from which config.
struct RunManifest {
    std::string tool;
    std::string version;
    std::string verb;
    std::string kernel;
    std::uint64_t config_hash = 0;
    std::vector<std::string> outputs;

    nlohmann::json to_json() const;
    void write(const std::filesystem::path& path) const;
};

} // namespace microtrap

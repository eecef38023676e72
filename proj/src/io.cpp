#include "microtrap/io.hpp"

#include "microtrap/constants.hpp"
#include "microtrap/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace microtrap {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    // std::to_chars emits the shortest representation that parses back to
    // exactly the same double.
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::resize(std::size_t n) { rows_.resize(n); }

void CsvTable::set_row(std::size_t i, const std::vector<double>& values) {
    if (values.size() != columns_.size())
        throw std::invalid_argument("CSV row width does not match header");
    rows_.at(i) = values;
}

void CsvTable::append_row(const std::vector<double>& values) {
    if (values.size() != columns_.size())
        throw std::invalid_argument("CSV row width does not match header");
    rows_.push_back(values);
}

std::string CsvTable::serialize() const {
    std::ostringstream os;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        if (j) os << ',';
        os << columns_[j];
    }
    os << '\n';
    for (const auto& row : rows_) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) os << ',';
            os << format_double(row[j]);
        }
        os << '\n';
    }
    return os.str();
}

void CsvTable::write(const std::filesystem::path& path) const {
    write_text_file(path, serialize());
}

nlohmann::json RunManifest::to_json() const {
    // The constants block pins the physical inputs a rerun would need to
    // reproduce these artifacts bit for bit.
    return {{"tool", tool},
            {"version", version},
            {"verb", verb},
            {"kernel", kernel},
            {"config_fnv1a64", config_hash},
            {"constants",
             {{"mu0_n_a2", constants.mu0},
              {"eps0_f_m", constants.eps0},
              {"bohr_magneton_j_t", constants.bohr_magneton},
              {"elementary_charge_c", constants.elementary_charge},
              {"hbar_j_s", constants.hbar},
              {"planck_h_j_s", constants.planck_h},
              {"amu_kg", constants.amu}}},
            {"outputs", outputs}};
}

void RunManifest::write(const std::filesystem::path& path) const {
    write_text_file(path, to_json().dump(2) + "\n");
}

} // namespace microtrap

#pragma once

#include "microtrap/geometry.hpp"
#include "microtrap/units.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace microtrap {

// INI-style run configuration:
//
//   # full-line comments start with '#' or ';'
//   [section]
//   key = value          # values may carry unit suffixes: "2.5 um", "10 mA"
//
// Section and key order is preserved; serialize() emits a canonical form
// whose reparse is identical (serialize . parse is idempotent). Unknown keys
// are rejected by the per-verb interpreters via validate_keys, with the
// offending line in the message.
class ConfigDoc {
public:
    struct Entry {
        std::string key;
        std::string value;
        int line = 0;
    };
    struct Section {
        std::string name;
        int line = 0;
        std::vector<Entry> entries;
    };

    static ConfigDoc parse(const std::string& text,
                           const std::string& source_name = "<config>");
    static ConfigDoc parse_file(const std::string& path);

    const std::string& source() const { return source_; }
    const std::vector<Section>& sections() const { return sections_; }

    bool has_section(const std::string& name) const;
    bool has(const std::string& section, const std::string& key) const;

    // Typed accessors; all throw ConfigError with source:line context.
    std::string string_value(const std::string& sec, const std::string& key) const;
    std::string string_or(const std::string& sec, const std::string& key,
                          const std::string& def) const;
    double quantity(const std::string& sec, const std::string& key, Dim dim) const;
    double quantity_or(const std::string& sec, const std::string& key, Dim dim,
                       double def) const;
    long integer(const std::string& sec, const std::string& key) const;
    long integer_or(const std::string& sec, const std::string& key, long def) const;
    bool boolean_or(const std::string& sec, const std::string& key, bool def) const;
    // Three whitespace-separated numbers with one shared trailing unit:
    // "0 0 1e-4 T". Dimensionless vectors take bare numbers.
    Vec3 vec3(const std::string& sec, const std::string& key, Dim dim) const;
    Vec3 vec3_or(const std::string& sec, const std::string& key, Dim dim,
                 const Vec3& def) const;
    std::vector<int> int_list_or(const std::string& sec, const std::string& key) const;
    std::vector<double> number_list(const std::string& sec,
                                    const std::string& key) const;
    // Several numbers sharing one trailing unit: "1 2 5 um".
    std::vector<double> quantity_list(const std::string& sec, const std::string& key,
                                      Dim dim) const;

    // Rejects keys outside `allowed` in `section`, and, when `required` is
    // nonempty, demands those keys exist. Call once per interpreted section.
    void validate_keys(const std::string& section,
                       const std::vector<std::string>& allowed,
                       const std::vector<std::string>& required = {}) const;
    void validate_sections(const std::vector<std::string>& allowed) const;

    [[noreturn]] void fail(const std::string& sec, const std::string& key,
                           const std::string& msg) const;

    std::string serialize() const;
    std::uint64_t fingerprint() const;

private:
    const Entry* find(const std::string& sec, const std::string& key) const;
    const Entry& require(const std::string& sec, const std::string& key) const;

    std::string source_ = "<config>";
    std::vector<Section> sections_;
};

} // namespace microtrap

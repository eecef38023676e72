#include "microtrap/config.hpp"

#include "microtrap/errors.hpp"
#include "microtrap/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <sstream>

namespace microtrap {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (char ch : s) {
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-'))
            return false;
    }
    return true;
}

} // namespace

ConfigDoc ConfigDoc::parse(const std::string& text, const std::string& source_name) {
    ConfigDoc doc;
    doc.source_ = source_name;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    Section* current = nullptr;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(source_name + ":" + std::to_string(lineno) +
                                  ": unterminated section header");
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (!valid_name(name))
                throw ConfigError(source_name + ":" + std::to_string(lineno) +
                                  ": invalid section name '" + name + "'");
            for (const Section& s : doc.sections_) {
                if (s.name == name)
                    throw ConfigError(source_name + ":" + std::to_string(lineno) +
                                      ": duplicate section [" + name + "]");
            }
            doc.sections_.push_back({name, lineno, {}});
            current = &doc.sections_.back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source_name + ":" + std::to_string(lineno) +
                              ": expected 'key = value' or '[section]'");
        if (!current)
            throw ConfigError(source_name + ":" + std::to_string(lineno) +
                              ": key outside any [section]");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!valid_name(key))
            throw ConfigError(source_name + ":" + std::to_string(lineno) +
                              ": invalid key name '" + key + "'");
        if (value.empty())
            throw ConfigError(source_name + ":" + std::to_string(lineno) +
                              ": empty value for key '" + key + "'");
        for (const Entry& e : current->entries) {
            if (e.key == key)
                throw ConfigError(source_name + ":" + std::to_string(lineno) +
                                  ": duplicate key '" + key + "' in [" +
                                  current->name + "] (first at line " +
                                  std::to_string(e.line) + ")");
        }
        current->entries.push_back({key, value, lineno});
    }
    return doc;
}

ConfigDoc ConfigDoc::parse_file(const std::string& path) {
    return parse(read_text_file(path), path);
}

bool ConfigDoc::has_section(const std::string& name) const {
    return std::any_of(sections_.begin(), sections_.end(),
                       [&name](const Section& s) { return s.name == name; });
}

const ConfigDoc::Entry* ConfigDoc::find(const std::string& sec,
                                        const std::string& key) const {
    for (const Section& s : sections_) {
        if (s.name != sec) continue;
        for (const Entry& e : s.entries)
            if (e.key == key) return &e;
    }
    return nullptr;
}

bool ConfigDoc::has(const std::string& sec, const std::string& key) const {
    return find(sec, key) != nullptr;
}

const ConfigDoc::Entry& ConfigDoc::require(const std::string& sec,
                                           const std::string& key) const {
    if (const Entry* e = find(sec, key)) return *e;
    throw ConfigError(source_ + ": missing required key '" + key + "' in [" + sec +
                      "]");
}

void ConfigDoc::fail(const std::string& sec, const std::string& key,
                     const std::string& msg) const {
    const Entry* e = find(sec, key);
    const std::string where =
        e ? source_ + ":" + std::to_string(e->line) : source_;
    throw ConfigError(where + ": [" + sec + "] " + key + ": " + msg);
}

std::string ConfigDoc::string_value(const std::string& sec,
                                    const std::string& key) const {
    return require(sec, key).value;
}

std::string ConfigDoc::string_or(const std::string& sec, const std::string& key,
                                 const std::string& def) const {
    const Entry* e = find(sec, key);
    return e ? e->value : def;
}

double ConfigDoc::quantity(const std::string& sec, const std::string& key,
                           Dim dim) const {
    const Entry& e = require(sec, key);
    try {
        return parse_quantity(e.value, dim);
    } catch (const std::invalid_argument& ex) {
        fail(sec, key, ex.what());
    }
}

double ConfigDoc::quantity_or(const std::string& sec, const std::string& key, Dim dim,
                              double def) const {
    if (!has(sec, key)) return def;
    return quantity(sec, key, dim);
}

long ConfigDoc::integer(const std::string& sec, const std::string& key) const {
    const Entry& e = require(sec, key);
    const std::string v = trim(e.value);
    char* end = nullptr;
    const long out = std::strtol(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || v.empty())
        fail(sec, key, "expected an integer, got '" + v + "'");
    return out;
}

long ConfigDoc::integer_or(const std::string& sec, const std::string& key,
                           long def) const {
    if (!has(sec, key)) return def;
    return integer(sec, key);
}

bool ConfigDoc::boolean_or(const std::string& sec, const std::string& key,
                           bool def) const {
    if (!has(sec, key)) return def;
    std::string v = string_value(sec, key);
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    fail(sec, key, "expected a boolean (true/false), got '" + v + "'");
}

Vec3 ConfigDoc::vec3(const std::string& sec, const std::string& key, Dim dim) const {
    const Entry& e = require(sec, key);
    std::istringstream in(e.value);
    std::vector<std::string> tokens;
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    if (tokens.size() < 3) fail(sec, key, "expected three numbers");
    std::string unit;
    for (std::size_t i = 3; i < tokens.size(); ++i)
        unit += (unit.empty() ? "" : " ") + tokens[i];
    try {
        // Components share the single trailing unit token.
        auto one = [&](const std::string& num) {
            return parse_quantity(unit.empty() ? num : num + " " + unit, dim);
        };
        return {one(tokens[0]), one(tokens[1]), one(tokens[2])};
    } catch (const std::invalid_argument& ex) {
        fail(sec, key, ex.what());
    }
}

Vec3 ConfigDoc::vec3_or(const std::string& sec, const std::string& key, Dim dim,
                        const Vec3& def) const {
    if (!has(sec, key)) return def;
    return vec3(sec, key, dim);
}

std::vector<int> ConfigDoc::int_list_or(const std::string& sec,
                                        const std::string& key) const {
    std::vector<int> out;
    if (!has(sec, key)) return out;
    std::string v = string_value(sec, key);
    std::replace(v.begin(), v.end(), ',', ' ');
    std::istringstream in(v);
    long x = 0;
    while (in >> x) out.push_back(static_cast<int>(x));
    if (!in.eof()) fail(sec, key, "expected a list of integers");
    return out;
}

std::vector<double> ConfigDoc::number_list(const std::string& sec,
                                           const std::string& key) const {
    std::string v = string_value(sec, key);
    std::replace(v.begin(), v.end(), ',', ' ');
    std::istringstream in(v);
    std::vector<double> out;
    double x = 0;
    while (in >> x) out.push_back(x);
    if (!in.eof() || out.empty()) fail(sec, key, "expected a list of numbers");
    return out;
}

std::vector<double> ConfigDoc::quantity_list(const std::string& sec,
                                             const std::string& key, Dim dim) const {
    const Entry& e = require(sec, key);
    std::string v = e.value;
    std::replace(v.begin(), v.end(), ',', ' ');
    std::istringstream in(v);
    std::vector<std::string> tokens;
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    if (tokens.empty()) fail(sec, key, "expected a list of quantities");

    // Leading tokens that parse fully as numbers are values; the remainder
    // is the shared unit.
    std::size_t nvals = 0;
    for (; nvals < tokens.size(); ++nvals) {
        char* end = nullptr;
        std::strtod(tokens[nvals].c_str(), &end);
        if (end != tokens[nvals].c_str() + tokens[nvals].size()) break;
    }
    if (nvals == 0) fail(sec, key, "expected numbers before the unit");
    std::string unit;
    for (std::size_t i = nvals; i < tokens.size(); ++i)
        unit += (unit.empty() ? "" : " ") + tokens[i];

    std::vector<double> out;
    try {
        for (std::size_t i = 0; i < nvals; ++i)
            out.push_back(parse_quantity(
                unit.empty() ? tokens[i] : tokens[i] + " " + unit, dim));
    } catch (const std::invalid_argument& ex) {
        fail(sec, key, ex.what());
    }
    return out;
}

void ConfigDoc::validate_keys(const std::string& section,
                              const std::vector<std::string>& allowed,
                              const std::vector<std::string>& required) const {
    for (const Section& s : sections_) {
        if (s.name != section) continue;
        for (const Entry& e : s.entries) {
            if (std::find(allowed.begin(), allowed.end(), e.key) == allowed.end()) {
                throw ConfigError(source_ + ":" + std::to_string(e.line) +
                                  ": unknown key '" + e.key + "' in [" + section +
                                  "]");
            }
        }
    }
    for (const std::string& req : required) {
        if (!has(section, req))
            throw ConfigError(source_ + ": missing required key '" + req + "' in [" +
                              section + "]");
    }
}

void ConfigDoc::validate_sections(const std::vector<std::string>& allowed) const {
    for (const Section& s : sections_) {
        if (std::find(allowed.begin(), allowed.end(), s.name) == allowed.end()) {
            throw ConfigError(source_ + ":" + std::to_string(s.line) +
                              ": unknown section [" + s.name + "]");
        }
    }
}

std::string ConfigDoc::serialize() const {
    std::ostringstream os;
    bool first = true;
    for (const Section& s : sections_) {
        if (!first) os << '\n';
        first = false;
        os << '[' << s.name << "]\n";
        for (const Entry& e : s.entries) os << e.key << " = " << e.value << '\n';
    }
    return os.str();
}

std::uint64_t ConfigDoc::fingerprint() const { return fnv1a64(serialize()); }

} // namespace microtrap

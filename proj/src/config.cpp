#include "ionsim/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "ionsim/constants.hpp"
#include "ionsim/errors.hpp"

namespace ionsim {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"trap", {"omega_x", "omega_y", "omega_z", "species"}},
      {"crystal", {"n", "seed"}},
      {"field", {"kind", "gradient", "direction", "bias", "wire_file"}},
      {"modes", {"roi"}},
      {"spectrum",
       {"carrier", "rabi", "pulse_time", "f_min", "f_max", "n_points", "distribution", "roi"}},
      {"rabi",
       {"transition", "eta", "rabi", "detuning", "decay_time", "distribution", "t_max",
        "n_points", "fit"}},
      {"coherence", {"sigma", "tau_c", "orders", "trajectories", "n_times"}},
      {"field_map", {"axis", "start", "stop", "n_points", "origin"}},
      {"alpha_scan", {"alpha_min", "alpha_max", "n_points"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

double parse_number(const std::string& tok, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + tok + "'", line);
  }
}

// value = "<number> <unit>"; scale table maps unit to SI factor.
double parse_with_unit(const std::string& value, int line,
                       const std::map<std::string, double>& scales, const char* kind) {
  const auto tk = tokens(value);
  if (tk.size() != 2)
    throw ConfigError(std::string("expected '<value> <unit>' for a ") + kind + ", got '" + value +
                          "'",
                      line);
  const auto it = scales.find(tk[1]);
  if (it == scales.end())
    throw ConfigError("unknown " + std::string(kind) + " unit '" + tk[1] + "'", line);
  return parse_number(tk[0], line) * it->second;
}

const std::map<std::string, double>& frequency_units() {
  static const std::map<std::string, double> u = {
      {"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
  return u;
}

const std::map<std::string, double>& time_units() {
  static const std::map<std::string, double> u = {
      {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}};
  return u;
}

const std::map<std::string, double>& length_units() {
  static const std::map<std::string, double> u = {
      {"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}};
  return u;
}

const std::map<std::string, double>& field_units() {
  static const std::map<std::string, double> u = {{"T", 1.0}, {"mT", 1e-3}, {"uT", 1e-6}};
  return u;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.raw_ = text;
  cfg.origin_ = origin;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::string section;
  bool saw_header = false;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (line_no == 1) {
      if (t != "# simconfig v1")
        throw ConfigError("first line must be '# simconfig v1'", 1);
      saw_header = true;
      continue;
    }
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("malformed section header '" + t + "'", line_no);
      section = trim(t.substr(1, t.size() - 2));
      if (schema().find(section) == schema().end())
        throw ConfigError("unknown section '" + section + "'", line_no);
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value', got '" + t + "'", line_no);
    if (section.empty()) throw ConfigError("key outside any section", line_no);
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const auto& allowed = schema().at(section);
    if (allowed.find(key) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in section [" + section + "]", line_no);
    if (value.empty()) throw ConfigError("empty value for key '" + key + "'", line_no);
    auto& sec = cfg.sections_[section];
    if (sec.find(key) != sec.end())
      throw ConfigError("duplicate key '" + key + "' in section [" + section + "]", line_no);
    sec[key] = Entry{value, line_no};
  }
  if (!saw_header) throw ConfigError("empty config: first line must be '# simconfig v1'", 1);
  return cfg;
}

const Config::Entry& Config::entry(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end() || s->second.find(key) == s->second.end())
    throw ConfigError("missing required key '" + key + "' in section [" + section + "]");
  return s->second.at(key);
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.find(key) != s->second.end();
}

double Config::frequency(const std::string& section, const std::string& key) const {
  const auto& e = entry(section, key);
  return two_pi * parse_with_unit(e.value, e.line, frequency_units(), "frequency");
}

double Config::time(const std::string& section, const std::string& key) const {
  const auto& e = entry(section, key);
  if (trim(e.value) == "inf") return std::numeric_limits<double>::infinity();
  return parse_with_unit(e.value, e.line, time_units(), "time");
}

double Config::length(const std::string& section, const std::string& key) const {
  const auto& e = entry(section, key);
  return parse_with_unit(e.value, e.line, length_units(), "length");
}

double Config::field_strength(const std::string& section, const std::string& key) const {
  const auto& e = entry(section, key);
  return parse_with_unit(e.value, e.line, field_units(), "field");
}

double Config::gradient(const std::string& section, const std::string& key) const {
  const auto& e = entry(section, key);
  return parse_with_unit(e.value, e.line, {{"T/m", 1.0}, {"T/mm", 1e3}}, "gradient");
}

double Config::current(const std::string& section, const std::string& key) const {
  const auto& e = entry(section, key);
  return parse_with_unit(e.value, e.line, {{"A", 1.0}, {"mA", 1e-3}}, "current");
}

double Config::number(const std::string& section, const std::string& key) const {
  const auto& e = entry(section, key);
  return parse_number(trim(e.value), e.line);
}

long long Config::integer(const std::string& section, const std::string& key) const {
  const auto& e = entry(section, key);
  const std::string v = trim(e.value);
  try {
    std::size_t used = 0;
    const long long n = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return n;
  } catch (const std::exception&) {
    throw ConfigError("not an integer: '" + v + "'", e.line);
  }
}

bool Config::boolean(const std::string& section, const std::string& key) const {
  const auto& e = entry(section, key);
  const std::string v = trim(e.value);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("expected 'true' or 'false', got '" + v + "'", e.line);
}

std::string Config::text_value(const std::string& section, const std::string& key) const {
  return trim(entry(section, key).value);
}

std::vector<long long> Config::integer_list(const std::string& section,
                                            const std::string& key) const {
  const auto& e = entry(section, key);
  std::vector<long long> out;
  for (const auto& t : tokens(e.value)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(t, &used));
      if (used != t.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ConfigError("not an integer: '" + t + "'", e.line);
    }
  }
  if (out.empty()) throw ConfigError("empty list for key '" + key + "'", e.line);
  return out;
}

std::vector<double> Config::number_list(const std::string& section, const std::string& key) const {
  const auto& e = entry(section, key);
  std::vector<double> out;
  for (const auto& t : tokens(e.value)) out.push_back(parse_number(t, e.line));
  if (out.empty()) throw ConfigError("empty list for key '" + key + "'", e.line);
  return out;
}

Eigen::Vector3d Config::field_vector(const std::string& section, const std::string& key) const {
  const auto& e = entry(section, key);
  const auto tk = tokens(e.value);
  if (tk.size() != 4)
    throw ConfigError("expected 'x y z <unit>' for a field vector, got '" + e.value + "'", e.line);
  const auto it = field_units().find(tk[3]);
  if (it == field_units().end())
    throw ConfigError("unknown field unit '" + tk[3] + "'", e.line);
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) v[i] = parse_number(tk[i], e.line) * it->second;
  return v;
}

Eigen::Vector3d Config::position(const std::string& section, const std::string& key) const {
  const auto& e = entry(section, key);
  const auto tk = tokens(e.value);
  if (tk.size() != 4)
    throw ConfigError("expected 'x y z <unit>' for a position, got '" + e.value + "'", e.line);
  const auto it = length_units().find(tk[3]);
  if (it == length_units().end())
    throw ConfigError("unknown length unit '" + tk[3] + "'", e.line);
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) v[i] = parse_number(tk[i], e.line) * it->second;
  return v;
}

Eigen::Vector3d Config::direction(const std::string& section, const std::string& key) const {
  const auto& e = entry(section, key);
  const auto tk = tokens(e.value);
  if (tk.size() != 3)
    throw ConfigError("expected three components for a direction, got '" + e.value + "'", e.line);
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) v[i] = parse_number(tk[i], e.line);
  if (v.norm() < 1e-12) throw ConfigError("direction must be nonzero", e.line);
  return v;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t Config::hash() const { return fnv1a64(raw_); }

std::string Config::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

}  // namespace ionsim

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ionsim {

// "# simconfig v1" files: INI-style sections, explicit unit suffixes on all
// physical quantities, unknown sections and keys rejected with line numbers.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;

  // All frequencies in files are linear (Hz family); accessors return rad/s.
  double frequency(const std::string& section, const std::string& key) const;
  double time(const std::string& section, const std::string& key) const;  // s, "inf" allowed
  double length(const std::string& section, const std::string& key) const;      // m
  double field_strength(const std::string& section, const std::string& key) const;  // T
  double gradient(const std::string& section, const std::string& key) const;    // T/m
  double current(const std::string& section, const std::string& key) const;     // A
  double number(const std::string& section, const std::string& key) const;      // dimensionless
  long long integer(const std::string& section, const std::string& key) const;
  bool boolean(const std::string& section, const std::string& key) const;
  std::string text_value(const std::string& section, const std::string& key) const;
  std::vector<long long> integer_list(const std::string& section, const std::string& key) const;
  std::vector<double> number_list(const std::string& section, const std::string& key) const;
  // Three components plus a unit suffix, e.g. "0 0 3.5e-4 T".
  Eigen::Vector3d field_vector(const std::string& section, const std::string& key) const;
  // Three components plus a length unit, e.g. "0 0 100 um".
  Eigen::Vector3d position(const std::string& section, const std::string& key) const;
  // Three plain components.
  Eigen::Vector3d direction(const std::string& section, const std::string& key) const;

  template <typename T>
  T value_or(T fallback, T (Config::*getter)(const std::string&, const std::string&) const,
             const std::string& section, const std::string& key) const {
    return has(section, key) ? (this->*getter)(section, key) : fallback;
  }

  // FNV-1a over the raw file bytes, for output provenance.
  std::uint64_t hash() const;
  std::string hash_hex() const;
  const std::string& raw_text() const { return raw_; }
  const std::string& origin() const { return origin_; }

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };

  const Entry& entry(const std::string& section, const std::string& key) const;

  std::string raw_;
  std::string origin_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace ionsim

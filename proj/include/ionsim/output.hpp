#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace ionsim {

inline constexpr const char* kToolVersion = "0.1.0";

struct OutputMeta {
  std::string subcommand;
  std::string config_hash;  // 16 hex digits
  std::uint64_t seed = 0;
};

// Shortest representation that round-trips doubles in our outputs; used for
// every CSV number so files are byte-stable.
std::string format_double(double v);

// CSV with '#'-prefixed provenance header; no timestamps or host details, so
// identical inputs give identical bytes.
void write_csv(const std::string& path, const OutputMeta& meta,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

// Same, with preformatted cells for tables that mix text and numbers.
void write_csv(const std::string& path, const OutputMeta& meta,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows);

void write_json(const std::string& path, const OutputMeta& meta, nlohmann::json body);

}  // namespace ionsim

#include "ionsim/output.hpp"

#include <cstdio>
#include <fstream>

#include "ionsim/errors.hpp"

namespace ionsim {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SimError("cannot open output file '" + path + "'");
  return out;
}

void write_header(std::ofstream& out, const OutputMeta& meta) {
  out << "# ionsim v" << kToolVersion << "\n";
  out << "# subcommand: " << meta.subcommand << "\n";
  out << "# config: " << meta.config_hash << "\n";
  out << "# seed: " << meta.seed << "\n";
}

}  // namespace

void write_csv(const std::string& path, const OutputMeta& meta,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  std::vector<std::vector<std::string>> cells;
  cells.reserve(rows.size());
  for (const auto& row : rows) {
    std::vector<std::string> line;
    line.reserve(row.size());
    for (double v : row) line.push_back(format_double(v));
    cells.push_back(std::move(line));
  }
  write_csv(path, meta, columns, cells);
}

void write_csv(const std::string& path, const OutputMeta& meta,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
  auto out = open_out(path);
  write_header(out, meta);
  for (std::size_t i = 0; i < columns.size(); ++i)
    out << (i ? "," : "") << columns[i];
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw std::logic_error("CSV row width does not match the column list");
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << "\n";
  }
  if (!out) throw SimError("failed writing '" + path + "'");
}

void write_json(const std::string& path, const OutputMeta& meta, nlohmann::json body) {
  body["tool_version"] = kToolVersion;
  body["subcommand"] = meta.subcommand;
  body["config_hash"] = meta.config_hash;
  body["seed"] = meta.seed;
  auto out = open_out(path);
  out << body.dump(2) << "\n";
  if (!out) throw SimError("failed writing '" + path + "'");
}

}  // namespace ionsim

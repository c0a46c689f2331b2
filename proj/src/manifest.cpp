#include "spdpool/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <string>
#include <system_error>

namespace spdpool {

namespace {

int parse_label(const std::string& field, std::size_t line_no) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || value < 0) {
    throw DataError("manifest line " + std::to_string(line_no) + ": bad label '" + field + "'");
  }
  return value;
}

bool parse_flag(const std::string& field, std::size_t line_no) {
  if (field == "0") {
    return false;
  }
  if (field == "1") {
    return true;
  }
  throw DataError("manifest line " + std::to_string(line_no) + ": bad failed flag '" + field +
                  "'");
}

}  // namespace

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open manifest: " + path.string());
  }
  const std::filesystem::path base = path.has_parent_path()
                                         ? path.parent_path()
                                         : std::filesystem::path(".");
  Manifest manifest;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const std::size_t tab1 = line.find('\t');
    const std::size_t tab2 = tab1 == std::string::npos ? std::string::npos
                                                       : line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos ||
        line.find('\t', tab2 + 1) != std::string::npos) {
      throw DataError("manifest line " + std::to_string(line_no) +
                      ": expected 'path<TAB>label<TAB>failed_flag'");
    }
    ManifestEntry entry;
    const std::string raw_path = line.substr(0, tab1);
    if (raw_path.empty()) {
      throw DataError("manifest line " + std::to_string(line_no) + ": empty path");
    }
    std::filesystem::path p(raw_path);
    entry.path = p.is_absolute() ? p : base / p;
    entry.label = parse_label(line.substr(tab1 + 1, tab2 - tab1 - 1), line_no);
    entry.failed = parse_flag(line.substr(tab2 + 1), line_no);
    if (!std::filesystem::exists(entry.path)) {
      throw DataError("manifest line " + std::to_string(line_no) + ": missing file " +
                      entry.path.string());
    }
    manifest.classes = std::max<Eigen::Index>(manifest.classes, entry.label + 1);
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw DataError("cannot open manifest for writing: " + path.string());
  }
  const std::filesystem::path base = path.has_parent_path()
                                         ? path.parent_path()
                                         : std::filesystem::path(".");
  for (const ManifestEntry& entry : entries) {
    std::error_code ec;
    std::filesystem::path rel = std::filesystem::relative(entry.path, base, ec);
    if (ec || rel.empty()) {
      rel = entry.path;
    }
    out << rel.generic_string() << '\t' << entry.label << '\t' << (entry.failed ? 1 : 0)
        << '\n';
  }
  if (!out) {
    throw DataError("manifest write failed: " + path.string());
  }
}

}  // namespace spdpool

#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "tablenet/record.hpp"

namespace tablenet {

class ManifestError : public Error {
 public:
  ManifestError(const std::string& path, std::size_t line, const std::string& detail)
      : Error("ManifestError", path + ":" + std::to_string(line) + ": " + detail), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateId : public Error {
 public:
  DuplicateId(const std::string& path, std::size_t line, const std::string& id)
      : Error("DuplicateId", path + ":" + std::to_string(line) + ": duplicate id '" + id + "'") {}
};

class PathError : public Error {
 public:
  explicit PathError(const std::string& path) : Error("PathError", "cannot open '" + path + "'") {}
};

// Reads one JSON object per non-blank line.
inline std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PathError(path.string());
  std::vector<json> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (html::is_blank(line)) continue;
    try {
      json j = json::parse(line);
      if (!j.is_object()) throw ManifestError(path.string(), number, "expected a JSON object");
      rows.push_back(std::move(j));
    } catch (const json::exception& e) {
      throw ManifestError(path.string(), number, e.what());
    }
  }
  return rows;
}

inline void write_jsonl(const std::vector<json>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PathError(path.string());
  for (const auto& row : rows) out << row.dump() << '\n';
}

inline std::vector<AnnotationRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PathError(path.string());
  std::vector<AnnotationRecord> records;
  std::set<std::string> seen;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (html::is_blank(line)) continue;
    AnnotationRecord r;
    try {
      r = json::parse(line).get<AnnotationRecord>();
    } catch (const json::exception& e) {
      throw ManifestError(path.string(), number, e.what());
    } catch (const ConfigError& e) {
      throw ManifestError(path.string(), number, e.what());
    }
    if (!seen.insert(r.id).second) throw DuplicateId(path.string(), number, r.id);
    records.push_back(std::move(r));
  }
  return records;
}

inline void write_manifest(const std::vector<AnnotationRecord>& records,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PathError(path.string());
  for (const auto& r : records) out << json(r).dump() << '\n';
}

}  // namespace tablenet

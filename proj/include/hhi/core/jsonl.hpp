#pragma once

#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "hhi/core/errors.hpp"
#include "hhi/core/serde.hpp"

namespace hhi {

/// Reads one JSON record per line; blank lines are skipped. Any parse or
/// schema failure is reported with its 1-based line number.
template <class T>
std::vector<T> read_jsonl(std::istream& in, const std::string& label = "<stream>") {
  std::vector<T> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(Json::parse(line).get<T>());
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(label + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(label + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(label + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

template <class T>
std::vector<T> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return read_jsonl<T>(in, path);
}

template <class T>
void write_jsonl(std::ostream& out, const std::vector<T>& records) {
  for (const auto& r : records) out << Json(r).dump() << '\n';
}

template <class T>
void write_jsonl(const std::string& path, const std::vector<T>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path);
  write_jsonl(out, records);
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": malformed JSON: " + e.what());
  }
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace hhi

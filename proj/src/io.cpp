#include "cdpp/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "cdpp/error.hpp"

#ifndef CDPP_GIT_DESCRIBE
#define CDPP_GIT_DESCRIBE "unknown"
#endif

namespace cdpp {

const char* build_version() { return CDPP_GIT_DESCRIBE; }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + path + "' is empty");
  t.header = split_line(line);
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_line(line);
    if (cells.size() != t.header.size())
      throw IoError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) + " fields");
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      std::size_t used = 0;
      try {
        row[i] = std::stod(cells[i], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cells[i].size())
        throw IoError(path + ":" + std::to_string(lineno) + ": '" + cells[i] + "' is not a number");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("'" + path + "': " + e.what());
  }
}

void write_sidecar(const std::string& path, const std::string& command, const nlohmann::json& config,
                   const nlohmann::json& extra) {
  nlohmann::json j = extra;
  j["version"] = build_version();
  j["command"] = command;
  j["config"] = config;
  write_text(path + ".json", j.dump(2) + "\n");
}

std::vector<SampleSet> sets_from_table(const CsvTable& t, const std::string& key) {
  const int kc = t.column(key);
  const int pc = t.column("point_index");
  if (kc < 0 || pc < 0) throw IoError("point table needs '" + key + "' and 'point_index' columns");
  std::vector<int> xc;
  for (int j = 1;; ++j) {
    const int c = t.column("x" + std::to_string(j));
    if (c < 0) break;
    xc.push_back(c);
  }
  if (xc.empty()) throw IoError("point table has no x1 column");
  std::map<long, std::map<long, Point>> grouped;
  for (const auto& r : t.rows) {
    Point x(xc.size());
    for (std::size_t j = 0; j < xc.size(); ++j) x[j] = r[xc[j]];
    grouped[static_cast<long>(r[kc])][static_cast<long>(r[pc])] = x;
  }
  std::vector<SampleSet> out;
  for (auto& [id, pts] : grouped) {
    SampleSet s;
    for (auto& [i, x] : pts) s.push_back(x);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace cdpp

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cdpp/types.hpp"

namespace cdpp {

/// Build identifier from `git describe` at configure time.
const char* build_version();

/// %.17g, so values round-trip exactly.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);

/// Writes `text` to `path`, replacing it.
void write_text(const std::string& path, const std::string& text);

nlohmann::json read_json(const std::string& path);

/// `path` + ".json": build version, command, config echo and any extra fields.
void write_sidecar(const std::string& path, const std::string& command, const nlohmann::json& config,
                   const nlohmann::json& extra = nlohmann::json::object());

/// Rows of (set_id, point_index, x1..xd) grouped back into sets; `key` names
/// the grouping column.
std::vector<SampleSet> sets_from_table(const CsvTable& t, const std::string& key);

}  // namespace cdpp

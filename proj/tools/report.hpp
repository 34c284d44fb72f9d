#ifndef SELMERLAB_TOOLS_REPORT_HPP_
#define SELMERLAB_TOOLS_REPORT_HPP_

#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

namespace selmerlab::cli {

using json = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInvariant = 3;
inline constexpr int kExitBudget = 4;

// Numeric value tagged as exact or empirical.
inline json exact(json v) { return json{{"value", std::move(v)}, {"kind", "exact"}}; }
inline json empirical(json v, double tolerance) {
  return json{{"value", std::move(v)}, {"kind", "empirical"}, {"tolerance", tolerance}};
}
inline json informational(json v) { return json{{"value", std::move(v)}, {"kind", "informational"}}; }

struct Report {
  json meta = json::object();
  json summary = json::object();
  std::vector<std::string> columns;
  std::vector<json> rows;  // each an array aligned with columns

  void add_row(json row) { rows.push_back(std::move(row)); }

  void write_json(std::ostream& os) const {
    json doc;
    doc["meta"] = meta;
    doc["summary"] = summary;
    if (!columns.empty()) {
      doc["columns"] = columns;
      doc["rows"] = rows;
    }
    os << doc.dump(2) << '\n';
  }

  void write_tsv(std::ostream& os) const {
    for (const auto& [k, v] : meta.items()) os << "# " << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
    for (const auto& [k, v] : summary.items()) os << "# " << k << ": " << v.dump() << '\n';
    if (columns.empty()) return;
    os << "# ";
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "\t" : "") << columns[i];
    os << '\n';
    for (const json& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "\t" : "") << (row[i].is_string() ? row[i].get<std::string>() : row[i].dump());
      os << '\n';
    }
  }
};

}  // namespace selmerlab::cli

#endif  // SELMERLAB_TOOLS_REPORT_HPP_

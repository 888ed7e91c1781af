#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vvmc/spaces.hpp"

namespace vvmc {

using ordered_json = nlohmann::ordered_json;

// JSON schema: {"N": int, "M": int, "p": number | "inf", "values": [[...], ...]}
// values[i] lists the M coordinates of f(i).

inline ordered_json p_to_json(double p) {
  if (std::isinf(p)) return ordered_json("inf");
  return ordered_json(p);
}

inline double p_from_json(const ordered_json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kPInf;
    throw std::invalid_argument("p: expected a number or \"inf\"");
  }
  return j.get<double>();
}

inline ordered_json tabfn_to_json(const TabFn& f) {
  ordered_json j;
  j["N"] = f.domain_size();
  j["M"] = f.space.dim;
  j["p"] = p_to_json(f.space.p);
  ordered_json vals = ordered_json::array();
  for (const VecX& v : f.values) vals.push_back(v.coords);
  j["values"] = std::move(vals);
  return j;
}

inline TabFn tabfn_from_json(const ordered_json& j) {
  for (const char* key : {"N", "M", "p", "values"})
    if (!j.contains(key))
      throw std::invalid_argument(std::string("TabFn json: missing field ") + key);
  const std::int64_t n = j["N"].get<std::int64_t>();
  const std::int64_t m = j["M"].get<std::int64_t>();
  LpSpec space = make_space(p_from_json(j["p"]), m);
  const auto& vals = j["values"];
  if (!vals.is_array() || static_cast<std::int64_t>(vals.size()) != n)
    throw std::invalid_argument("TabFn json: values must be an array of length N");
  std::vector<VecX> vv;
  vv.reserve(vals.size());
  for (const auto& row : vals) vv.push_back(make_vec(row.get<std::vector<double>>(), space));
  return make_tabfn(space, std::move(vv));
}

// CSV: row i holds the coordinates of f(i), comma separated, no header.
inline void tabfn_to_csv(const TabFn& f, std::ostream& os) {
  char buf[64];
  for (const VecX& v : f.values) {
    for (std::size_t i = 0; i < v.coords.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", v.coords[i]);
      if (i) os << ',';
      os << buf;
    }
    os << '\n';
  }
}

inline TabFn tabfn_from_csv(std::istream& is, double p) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("TabFn csv: no rows");
  const std::size_t m = rows[0].size();
  for (const auto& r : rows)
    if (r.size() != m) throw std::invalid_argument("TabFn csv: ragged rows");
  LpSpec space = make_space(p, static_cast<std::int64_t>(m));
  std::vector<VecX> vv;
  vv.reserve(rows.size());
  for (auto& r : rows) vv.push_back(make_vec(std::move(r), space));
  return make_tabfn(space, std::move(vv));
}

inline void save_tabfn(const TabFn& f, const std::string& path, const std::string& format) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  if (format == "json") {
    os << tabfn_to_json(f).dump(2) << '\n';
  } else if (format == "csv") {
    tabfn_to_csv(f, os);
  } else {
    throw std::invalid_argument("unknown format: " + format);
  }
}

inline TabFn load_tabfn(const std::string& path, double p_for_csv = 2.0) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    ordered_json j;
    is >> j;
    return tabfn_from_json(j);
  }
  return tabfn_from_csv(is, p_for_csv);
}

}  // namespace vvmc

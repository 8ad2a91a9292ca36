#pragma once

// File formats: loading-matrix CSV, study config (JSON), cell CSV, scan
// tables and per-figure data.

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gprv/simulation.hpp"

namespace gprv {

inline constexpr std::string_view kCellHeader =
    "k,n,kaiser,method,start_type,q,replications,mean_c,se_c,mean_v,se_v,mean_rmse,se_rmse";

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Loading matrices

/// One row per variable, comma-separated decimals. A first line that does not
/// parse as numbers is treated as a header.
inline LoadingMatrix parse_loading_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    std::vector<double> values(fields.size());
    bool numeric = true;
    for (std::size_t j = 0; j < fields.size(); ++j) numeric = numeric && detail::parse_double(fields[j], values[j]);
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw Error(ErrorKind::invalid_input, "non-numeric value on line " + std::to_string(line_no));
    }
    first = false;
    if (!rows.empty() && values.size() != rows.front().size())
      throw Error(ErrorKind::invalid_input, "ragged row on line " + std::to_string(line_no));
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw Error(ErrorKind::invalid_input, "no loading rows");
  LoadingMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

inline LoadingMatrix read_loading_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path);
  return parse_loading_csv(in);
}

inline void write_loading_csv(std::ostream& out, const LoadingMatrix& lambda) {
  for (Eigen::Index j = 0; j < lambda.cols(); ++j) out << (j ? "," : "") << "c" << (j + 1);
  out << '\n';
  for (Eigen::Index i = 0; i < lambda.rows(); ++i) {
    for (Eigen::Index j = 0; j < lambda.cols(); ++j) out << (j ? "," : "") << detail::format_double(lambda(i, j));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Study config

/// JSON object with StudyConfig fields by name. Unknown keys are rejected.
inline StudyConfig parse_study_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_input, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::invalid_input, "config must be a JSON object");
  static const std::set<std::string> known{
      "k_list",      "n_list",       "kaiser_list", "start_types", "q_schedule",       "replications",
      "base_seed",   "main_loading", "population_cases", "threads", "output_dir", "population_cache_dir",
      "gpr",         "pairwise"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw Error(ErrorKind::invalid_input, "unknown config key '" + key + "'");

  StudyConfig cfg;
  try {
    if (j.contains("k_list")) cfg.k_list = j["k_list"].get<std::vector<int>>();
    if (j.contains("n_list")) cfg.n_list = j["n_list"].get<std::vector<int>>();
    if (j.contains("kaiser_list")) cfg.kaiser_list = j["kaiser_list"].get<std::vector<bool>>();
    if (j.contains("start_types")) {
      cfg.identity_start = cfg.random_start = cfg.pairwise = false;
      for (const auto& s : j["start_types"].get<std::vector<std::string>>()) {
        if (s == "identity") cfg.identity_start = true;
        else if (s == "random") cfg.random_start = true;
        else if (s == "pairwise") cfg.pairwise = true;
        else throw Error(ErrorKind::invalid_input, "unknown start type '" + s + "'");
      }
    }
    if (j.contains("q_schedule")) cfg.q_schedule = j["q_schedule"].get<std::vector<int>>();
    if (j.contains("replications")) cfg.replications = j["replications"].get<int>();
    if (j.contains("base_seed")) cfg.base_seed = j["base_seed"].get<std::uint64_t>();
    if (j.contains("main_loading")) cfg.main_loading = j["main_loading"].get<double>();
    if (j.contains("population_cases")) cfg.population_cases = j["population_cases"].get<std::int64_t>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("population_cache_dir")) cfg.population_cache_dir = j["population_cache_dir"].get<std::string>();
    if (j.contains("gpr")) {
      const auto& g = j["gpr"];
      for (const auto& [key, _] : g.items())
        if (key != "alpha0" && key != "max_iter" && key != "grad_tol" && key != "max_halvings")
          throw Error(ErrorKind::invalid_input, "unknown gpr key '" + key + "'");
      cfg.gpr.alpha0 = g.value("alpha0", cfg.gpr.alpha0);
      cfg.gpr.max_iter = g.value("max_iter", cfg.gpr.max_iter);
      cfg.gpr.grad_tol = g.value("grad_tol", cfg.gpr.grad_tol);
      cfg.gpr.max_halvings = g.value("max_halvings", cfg.gpr.max_halvings);
    }
    if (j.contains("pairwise")) {
      const auto& p = j["pairwise"];
      for (const auto& [key, _] : p.items())
        if (key != "max_cycles" && key != "angle_tol") throw Error(ErrorKind::invalid_input, "unknown pairwise key '" + key + "'");
      cfg.pairwise_params.max_cycles = p.value("max_cycles", cfg.pairwise_params.max_cycles);
      cfg.pairwise_params.angle_tol = p.value("angle_tol", cfg.pairwise_params.angle_tol);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_input, std::string("bad config value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline StudyConfig read_study_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_study_config(ss.str());
}

// ---------------------------------------------------------------------------
// Cell CSV

inline void write_cells_csv(std::ostream& out, const std::vector<CellResult>& cells) {
  out << kCellHeader << '\n';
  for (const CellResult& c : cells) {
    const Condition& d = c.condition;
    out << d.k << ',' << d.n << ',' << (d.kaiser ? "on" : "off") << ',' << to_string(d.method) << ','
        << to_string(d.start_type) << ',' << d.q << ',' << c.replications << ',' << detail::format_double(c.mean_c) << ','
        << detail::format_double(c.se_c) << ',' << detail::format_double(c.mean_v) << ','
        << detail::format_double(c.se_v) << ',' << detail::format_double(c.mean_rmse) << ','
        << detail::format_double(c.se_rmse) << '\n';
  }
}

inline std::vector<CellResult> parse_cells_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kCellHeader)
    throw Error(ErrorKind::invalid_input, "cell CSV header mismatch");
  std::vector<CellResult> cells;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv(line);
    auto bad = [&] { return Error(ErrorKind::invalid_input, "malformed cell row on line " + std::to_string(line_no)); };
    if (f.size() != 13) throw bad();
    CellResult c;
    // k, n, q, replications, then five of the six statistics.
    double num[9];
    const std::size_t numeric_cols[9] = {0, 1, 5, 6, 7, 8, 9, 10, 11};
    for (int i = 0; i < 9; ++i)
      if (!detail::parse_double(f[numeric_cols[i]], num[i])) throw bad();
    double se_rmse = 0.0;
    if (!detail::parse_double(f[12], se_rmse)) throw bad();
    c.condition.k = static_cast<int>(num[0]);
    c.condition.n = static_cast<int>(num[1]);
    if (f[2] != "on" && f[2] != "off") throw bad();
    c.condition.kaiser = f[2] == "on";
    if (f[3] == "gpr") c.condition.method = Method::gpr;
    else if (f[3] == "pairwise") c.condition.method = Method::pairwise;
    else throw bad();
    if (f[4] == "identity") c.condition.start_type = StartType::identity;
    else if (f[4] == "random") c.condition.start_type = StartType::random;
    else if (f[4] == "none") c.condition.start_type = StartType::none;
    else throw bad();
    c.condition.q = static_cast<int>(num[2]);
    c.replications = static_cast<int>(num[3]);
    c.mean_c = num[4];
    c.se_c = num[5];
    c.mean_v = num[6];
    c.se_v = num[7];
    c.mean_rmse = num[8];
    c.se_rmse = se_rmse;
    cells.push_back(c);
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {

inline std::string series_name(int n, bool kaiser) {
  return "n" + std::to_string(n) + "_kaiser_" + (kaiser ? "on" : "off");
}

inline void write_table(const std::filesystem::path& dir, const std::string& stem, const std::string& title,
                        const std::vector<TableRow>& rows, bool benchmark) {
  std::set<int> ks;
  std::vector<std::pair<int, bool>> columns;
  for (const TableRow& r : rows) {
    if (benchmark && !r.benchmark) continue;
    ks.insert(r.k);
    const auto col = std::pair(r.n, r.kaiser);
    if (std::find(columns.begin(), columns.end(), col) == columns.end()) columns.push_back(col);
  }
  std::sort(columns.begin(), columns.end());
  auto lookup = [&](int k, int n, bool kaiser) -> std::string {
    for (const TableRow& r : rows)
      if (r.k == k && r.n == n && r.kaiser == kaiser)
        return benchmark ? (r.benchmark ? r.benchmark->label() : "") : r.stationarity.label();
    return "";
  };

  auto csv = open_output(dir / (stem + ".csv"));
  csv << "k,n,kaiser,min_q\n";
  for (const TableRow& r : rows) {
    if (benchmark && !r.benchmark) continue;
    csv << r.k << ',' << r.n << ',' << (r.kaiser ? "on" : "off") << ','
        << (benchmark ? r.benchmark->label() : r.stationarity.label()) << '\n';
  }

  auto txt = open_output(dir / (stem + ".txt"));
  txt << title << "\n\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%-12s", "components");
  txt << buf;
  for (const auto& [n, kaiser] : columns) {
    std::snprintf(buf, sizeof(buf), "%20s", ("n=" + std::to_string(n) + (kaiser ? " kaiser" : " raw")).c_str());
    txt << buf;
  }
  txt << '\n';
  for (int k : ks) {
    std::snprintf(buf, sizeof(buf), "%-12d", k);
    txt << buf;
    for (const auto& [n, kaiser] : columns) {
      std::snprintf(buf, sizeof(buf), "%20s", lookup(k, n, kaiser).c_str());
      txt << buf;
    }
    txt << '\n';
  }
}

}  // namespace detail

/// Writes cells.csv, stationarity/benchmark tables (.csv and .txt) and one
/// figure-data file per (metric, k). Returns the paths written.
inline std::vector<std::filesystem::path> emit_reports(const std::vector<CellResult>& cells,
                                                       const std::filesystem::path& dir, const Cutoffs& cut = {}) {
  namespace fs = std::filesystem;
  if (cells.empty()) throw Error(ErrorKind::invalid_input, "no cells to report");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw Error(ErrorKind::io, "cannot create " + dir.string());

  std::vector<fs::path> written;
  {
    auto out = detail::open_output(dir / "cells.csv");
    write_cells_csv(out, cells);
    if (!out) throw Error(ErrorKind::io, "failed writing cells.csv");
    written.push_back(dir / "cells.csv");
  }

  const auto rows = scan_tables(cells, cut);
  if (!rows.empty()) {
    detail::write_table(dir, "stationarity", "Minimum number of random starts to reach stationarity", rows, false);
    written.push_back(dir / "stationarity.csv");
    written.push_back(dir / "stationarity.txt");
    if (std::any_of(rows.begin(), rows.end(), [](const TableRow& r) { return r.benchmark.has_value(); })) {
      detail::write_table(dir, "benchmark", "Minimum number of random starts to reach pairwise Varimax", rows, true);
      written.push_back(dir / "benchmark.csv");
      written.push_back(dir / "benchmark.txt");
    }
  }

  // Figure data: x = start type / q, one mean+se column pair per (n, kaiser).
  std::set<int> ks;
  for (const CellResult& c : cells) ks.insert(c.condition.k);
  struct Metric {
    const char* name;
    double CellResult::*mean;
    double CellResult::*se;
  };
  const Metric metrics[] = {{"c", &CellResult::mean_c, &CellResult::se_c},
                            {"v", &CellResult::mean_v, &CellResult::se_v},
                            {"rmse", &CellResult::mean_rmse, &CellResult::se_rmse}};
  for (const Metric& metric : metrics) {
    for (int k : ks) {
      std::vector<std::pair<int, bool>> series;
      std::vector<std::tuple<Method, StartType, int>> xs;
      for (const CellResult& c : cells) {
        const Condition& d = c.condition;
        if (d.k != k) continue;
        if (std::find(series.begin(), series.end(), std::pair(d.n, d.kaiser)) == series.end())
          series.emplace_back(d.n, d.kaiser);
        const auto x = std::tuple(d.method, d.start_type, d.q);
        if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
      }
      std::sort(series.begin(), series.end());
      std::sort(xs.begin(), xs.end());
      const fs::path path = dir / ("figure_" + std::string(metric.name) + "_k" + std::to_string(k) + ".csv");
      auto out = detail::open_output(path);
      out << "start_type,q";
      for (const auto& [n, kaiser] : series)
        out << ',' << detail::series_name(n, kaiser) << "_mean," << detail::series_name(n, kaiser) << "_se";
      out << '\n';
      for (const auto& [method, start, q] : xs) {
        out << (method == Method::pairwise ? "pairwise" : to_string(start)) << ',' << q;
        for (const auto& [n, kaiser] : series) {
          const Condition want{k, n, kaiser, method, start, q};
          const auto it = std::find_if(cells.begin(), cells.end(), [&](const CellResult& c) { return c.condition == want; });
          if (it == cells.end()) out << ",,";
          else out << ',' << detail::format_double((*it).*metric.mean) << ',' << detail::format_double((*it).*metric.se);
        }
        out << '\n';
      }
      written.push_back(path);
    }
  }
  return written;
}

inline std::vector<CellResult> read_cells_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path);
  return parse_cells_csv(in);
}

}  // namespace gprv

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "torusinv/diagnostics.hpp"

namespace torusinv::expcli {

inline const std::vector<std::string>& results_columns() {
  static const std::vector<std::string> cols{"experiment", "N",        "seed",      "l2_mean",
                                             "l2_map",     "d_g_mean", "accept_rate", "runtime_s",
                                             "nm1",        "nm2",      "mm2"};
  return cols;
}

inline const std::vector<std::string>& conditions_columns() {
  static const std::vector<std::string> cols{"experiment", "N",         "seed",     "condition",
                                             "measured",   "threshold", "satisfied"};
  return cols;
}

/// One (N, seed) cell. Failed stages leave NaN metrics and a message.
struct ResultRow {
  std::string experiment;
  long N = 0;
  long seed = 0;
  double l2_mean = NAN;
  double l2_map = NAN;
  double d_g_mean = NAN;
  double accept_rate = NAN;
  double runtime_s = 0.0;
  bool nm1 = false;
  bool nm2 = false;
  bool mm2 = false;
};

struct CellFailure {
  std::string stage;
  std::string message;
};

struct CellOutput {
  ResultRow row;
  std::vector<diagnostics::ConditionReport> conditions;
  std::vector<CellFailure> failures;
};

/// Shortest text that reads back to the same double.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline std::string csv_header(const std::vector<std::string>& cols) {
  std::string s;
  for (std::size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + cols[i];
  return s;
}

inline std::string csv_line(const ResultRow& r) {
  std::ostringstream s;
  s << r.experiment << ',' << r.N << ',' << r.seed << ',' << format_number(r.l2_mean) << ','
    << format_number(r.l2_map) << ',' << format_number(r.d_g_mean) << ',' << format_number(r.accept_rate)
    << ',' << format_number(r.runtime_s) << ',' << int(r.nm1) << ',' << int(r.nm2) << ',' << int(r.mm2);
  return s.str();
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_number(const std::string& s, const std::string& column, std::size_t line) {
  if (s == "nan") return NAN;
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0')
    throw ConfigError("results line " + std::to_string(line) + ": column '" + column + "' is not a number: '" + s + "'");
  return v;
}

/// Read a results CSV, requiring exactly the results schema.
inline std::vector<ResultRow> read_results(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("results file is empty");
  const auto header = split_csv(line);
  const auto& cols = results_columns();
  for (std::size_t i = 0; i < std::max(header.size(), cols.size()); ++i) {
    if (i >= header.size()) throw ConfigError("results header is missing column '" + cols[i] + "'");
    if (i >= cols.size() || header[i] != cols[i])
      throw ConfigError("results header has unexpected column '" + header[i] + "' at position " + std::to_string(i + 1));
  }
  std::vector<ResultRow> rows;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() != cols.size())
      throw ConfigError("results line " + std::to_string(n) + " has " + std::to_string(f.size()) + " fields, expected " +
                        std::to_string(cols.size()));
    ResultRow r;
    r.experiment = f[0];
    r.N = static_cast<long>(parse_number(f[1], "N", n));
    r.seed = static_cast<long>(parse_number(f[2], "seed", n));
    r.l2_mean = parse_number(f[3], "l2_mean", n);
    r.l2_map = parse_number(f[4], "l2_map", n);
    r.d_g_mean = parse_number(f[5], "d_g_mean", n);
    r.accept_rate = parse_number(f[6], "accept_rate", n);
    r.runtime_s = parse_number(f[7], "runtime_s", n);
    r.nm1 = parse_number(f[8], "nm1", n) != 0.0;
    r.nm2 = parse_number(f[9], "nm2", n) != 0.0;
    r.mm2 = parse_number(f[10], "mm2", n) != 0.0;
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<ResultRow> read_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open results file '" + path + "'");
  return read_results(in);
}

/// Writes cells to results.csv and conditions.csv in cell-index order from
/// any thread: completed cells wait until every earlier cell has been written.
class OrderedAppender {
 public:
  OrderedAppender(const std::string& results_path, const std::string& conditions_path)
      : results_(results_path, std::ios::trunc), conditions_(conditions_path, std::ios::trunc) {
    if (!results_) throw ConfigError("cannot write '" + results_path + "'");
    if (!conditions_) throw ConfigError("cannot write '" + conditions_path + "'");
    results_ << csv_header(results_columns()) << '\n';
    conditions_ << csv_header(conditions_columns()) << '\n';
    results_.flush();
    conditions_.flush();
  }

  void submit(std::size_t index, CellOutput cell) {
    std::lock_guard lock(mu_);
    pending_.emplace(index, std::move(cell));
    while (!pending_.empty() && pending_.begin()->first == next_) {
      write(pending_.begin()->second);
      pending_.erase(pending_.begin());
      ++next_;
    }
  }

  std::size_t written() const {
    std::lock_guard lock(mu_);
    return next_;
  }

 private:
  void write(const CellOutput& c) {
    results_ << csv_line(c.row) << '\n';
    for (const auto& r : c.conditions)
      conditions_ << c.row.experiment << ',' << c.row.N << ',' << c.row.seed << ',' << r.name << ','
                  << format_number(r.measured) << ',' << format_number(r.threshold) << ',' << int(r.satisfied) << '\n';
    results_.flush();
    conditions_.flush();
  }

  mutable std::mutex mu_;
  std::ofstream results_, conditions_;
  std::map<std::size_t, CellOutput> pending_;
  std::size_t next_ = 0;
};

/// Finite positive values of a metric grouped by N.
inline std::map<double, std::vector<double>> group_by_n(const std::vector<ResultRow>& rows,
                                                        const std::string& metric) {
  std::map<double, std::vector<double>> out;
  for (const auto& r : rows) {
    double v;
    if (metric == "l2_mean") v = r.l2_mean;
    else if (metric == "l2_map") v = r.l2_map;
    else if (metric == "d_g_mean") v = r.d_g_mean;
    else throw ConfigError("unknown metric '" + metric + "' (expected l2_mean, l2_map or d_g_mean)");
    if (std::isfinite(v) && v > 0.0) out[double(r.N)].push_back(v);
  }
  return out;
}

/// Rate fit of per-N medians, or null when fewer than three sample sizes
/// have usable values.
inline nlohmann::json rate_json(const std::vector<ResultRow>& rows, const std::string& metric) {
  const auto g = group_by_n(rows, metric);
  if (g.size() < 3) return nullptr;
  auto j = diagnostics::to_json(diagnostics::fit_rate_medians(g));
  j["metric"] = metric;
  return j;
}

struct NSummary {
  long N = 0;
  int cells = 0;
  int usable = 0;
  double l2_mean = NAN, l2_map = NAN, d_g_mean = NAN, accept_rate = NAN;
  double nm1 = 0.0, nm2 = 0.0, mm2 = 0.0;
};

/// Medians over seeds and the fraction of cells with each flag set.
inline std::vector<NSummary> summarize_by_n(const std::vector<ResultRow>& rows) {
  std::map<long, std::vector<const ResultRow*>> by;
  for (const auto& r : rows) by[r.N].push_back(&r);
  std::vector<NSummary> out;
  for (const auto& [n, rs] : by) {
    NSummary s;
    s.N = n;
    s.cells = int(rs.size());
    auto med = [&](double ResultRow::*m) {
      std::vector<double> v;
      for (const auto* r : rs)
        if (std::isfinite(r->*m)) v.push_back(r->*m);
      return v.empty() ? NAN : diagnostics::median(v);
    };
    s.l2_mean = med(&ResultRow::l2_mean);
    s.l2_map = med(&ResultRow::l2_map);
    s.d_g_mean = med(&ResultRow::d_g_mean);
    s.accept_rate = med(&ResultRow::accept_rate);
    for (const auto* r : rs) {
      if (std::isfinite(r->l2_mean)) ++s.usable;
      s.nm1 += r->nm1;
      s.nm2 += r->nm2;
      s.mm2 += r->mm2;
    }
    s.nm1 /= s.cells;
    s.nm2 /= s.cells;
    s.mm2 /= s.cells;
    out.push_back(s);
  }
  return out;
}

inline nlohmann::json to_json(const NSummary& s) {
  auto num = [](double x) -> nlohmann::json { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  return {{"N", s.N},
          {"cells", s.cells},
          {"usable", s.usable},
          {"l2_mean", num(s.l2_mean)},
          {"l2_map", num(s.l2_map)},
          {"d_g_mean", num(s.d_g_mean)},
          {"accept_rate", num(s.accept_rate)},
          {"nm1", s.nm1},
          {"nm2", s.nm2},
          {"mm2", s.mm2}};
}

}  // namespace torusinv::expcli

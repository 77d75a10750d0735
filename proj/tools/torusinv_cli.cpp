#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "torusinv/expcli.hpp"

namespace ex = torusinv::expcli;

namespace {

void print_report(const ex::ValidationReport& r) {
  for (const auto& e : r.errors) std::cerr << "error: " << ex::format_issue(e) << '\n';
  for (const auto& w : r.warnings) std::cerr << "warning: " << ex::format_issue(w) << '\n';
}

std::string cell(double x, int prec = 4) {
  if (!std::isfinite(x)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

int cmd_validate(const std::string& path, bool as_json) {
  const auto r = ex::validate_config(path);
  if (as_json) std::cout << ex::to_json(r).dump(2) << '\n';
  else {
    print_report(r);
    if (r.ok()) std::cout << path << ": ok (" << r.warnings.size() << " warning" << (r.warnings.size() == 1 ? "" : "s") << ")\n";
  }
  return r.ok() ? 0 : 2;
}

int cmd_run(const std::string& path, long seed_offset, const std::string& out, bool quiet) {
  const auto r = ex::validate_config(path);
  print_report(r);
  if (!r.ok()) return 2;
  const auto cfg = ex::load_config(path);
  ex::RunOptions ro;
  ro.seed_offset = seed_offset;
  ro.output_directory = out;
  if (!quiet)
    ro.on_cell = [](const ex::CellOutput& c) {
      std::cerr << "N=" << c.row.N << " seed=" << c.row.seed << " l2_mean=" << cell(c.row.l2_mean)
                << " l2_map=" << cell(c.row.l2_map) << " accept=" << cell(c.row.accept_rate, 3);
      for (const auto& f : c.failures) std::cerr << " [" << f.stage << " failed: " << f.message << "]";
      std::cerr << '\n';
    };
  const auto res = ex::run_experiment(cfg, ro);
  std::cout << "wrote " << res.results_path << ", " << res.conditions_path << ", " << res.summary_path << '\n';
  if (!res.summary["rate"].is_null())
    std::cout << "rate slope " << res.summary["rate"]["slope"].get<double>() << " (reference "
              << res.summary["reference_slope"].get<double>() << ")\n";
  return 0;
}

int cmd_rate(const std::string& path, const std::string& metric) {
  const auto rows = ex::read_results(path);
  const auto g = ex::group_by_n(rows, metric);
  if (g.size() < 3) {
    std::cerr << "rate needs usable values at >= 3 sample sizes (found " << g.size() << ")\n";
    return 1;
  }
  auto j = torusinv::diagnostics::to_json(torusinv::diagnostics::fit_rate_medians(g));
  j["metric"] = metric;
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_report(const std::string& path) {
  const auto rows = ex::read_results(path);
  if (rows.empty()) {
    std::cerr << "no result rows in " << path << '\n';
    return 1;
  }
  std::printf("%-8s %5s %6s %11s %11s %11s %8s %5s %5s %5s\n", "N", "cells", "usable", "l2_mean", "l2_map",
              "d_g_mean", "accept", "nm1", "nm2", "mm2");
  for (const auto& s : ex::summarize_by_n(rows))
    std::printf("%-8ld %5d %6d %11s %11s %11s %8s %5.2f %5.2f %5.2f\n", s.N, s.cells, s.usable, cell(s.l2_mean).c_str(),
                cell(s.l2_map).c_str(), cell(s.d_g_mean).c_str(), cell(s.accept_rate, 3).c_str(), s.nm1, s.nm2, s.mm2);
  std::printf("(medians over seeds; flag columns are the fraction of cells satisfied)\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"torusinv: Bayesian PDE inverse problems on the torus under likelihood misspecification"};
  app.require_subcommand(1);

  std::string path, out, metric = "l2_mean";
  long seed_offset = 0;
  bool quiet = false, as_json = false;

  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", path, "Experiment config (JSON)")->required();
  run->add_option("--seed-offset", seed_offset, "Shift every seed by this amount");
  run->add_option("--out", out, "Override the output directory");
  run->add_flag("-q,--quiet", quiet, "Do not print per-cell progress");

  auto* validate = app.add_subcommand("validate", "Check a config and report errors and warnings");
  validate->add_option("config", path, "Experiment config (JSON)")->required();
  validate->add_flag("--json", as_json, "Print the report as JSON");

  auto* rate = app.add_subcommand("rate", "Fit the log-log error rate from a results CSV");
  rate->add_option("results", path, "results.csv")->required();
  rate->add_option("--metric", metric, "l2_mean, l2_map or d_g_mean");

  auto* report = app.add_subcommand("report", "Summarize a results CSV by sample size");
  report->add_option("results", path, "results.csv")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(path, seed_offset, out, quiet);
    if (*validate) return cmd_validate(path, as_json);
    if (*rate) return cmd_rate(path, metric);
    if (*report) return cmd_report(path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

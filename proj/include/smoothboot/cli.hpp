#pragma once

#include "bandwidth.hpp"
#include "bootstrap_ci.hpp"
#include "estimators.hpp"
#include "isotonic.hpp"
#include "simulation.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace smoothboot::cli {

enum class Command
{
  fit,
  band,
  bandwidth,
  simulate
};

enum class Format
{
  csv,
  json
};

struct RunConfig
{
  Command command = Command::band;
  std::string input;
  std::string output;
  std::string step_output;
  Format format = Format::csv;
  Estimator estimator = Estimator::slse;
  bool studentized = false;
  NwSigma sigma = NwSigma::hall_kay;
  double c = 0.5;
  double c0 = 0.7;
  std::size_t B = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  double grid_step = 0.01;
  //! start:stop:step of the bandwidth constants tried by `bandwidth`.
  double c_min = 0.01;
  double c_max = 1.0;
  double c_step = 0.01;
  bool mendota = false;
  std::string scenario = "quadratic";
  std::size_t n = 100;
  std::size_t M = 200;
  double sigma0 = 0.1;
  unsigned threads = 0;
};

inline std::string to_string(Command c)
{
  switch (c) {
    case Command::fit:
      return "fit";
    case Command::band:
      return "band";
    case Command::bandwidth:
      return "bandwidth";
    case Command::simulate:
      return "simulate";
  }
  return "unknown";
}

//! Shortest form is not required; 17 significant digits always round-trip.
inline std::string format_double(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::optional<double> parse_double(std::string_view s)
{
  s = trim(s);
  if (!s.empty() && s.front() == '+') {
    s.remove_prefix(1);
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

} // namespace detail

//! Maps consecutive years to x = (year - 1853)/158 and reverses the
//! responses, turning a downward trend into an upward one.
inline RegressionSample mendota_transform(std::span<const double> years,
                                          std::span<const double> days)
{
  if (years.size() != days.size() || years.empty()) {
    throw std::invalid_argument("years and days must be nonempty and of equal length");
  }
  std::vector<double> xs(years.size());
  std::vector<double> ys(days.rbegin(), days.rend());
  for (std::size_t i = 0; i < years.size(); ++i) {
    if (years[i] != years[0] + static_cast<double>(i)) {
      throw std::invalid_argument("years must be consecutive and ascending");
    }
    xs[i] = (years[i] - 1853.0) / 158.0;
    if (xs[i] < 0.0 || xs[i] > 1.0) {
      throw std::invalid_argument("year " + format_double(years[i]) +
                                  " maps outside [0,1]");
    }
  }
  return RegressionSample(std::move(xs), std::move(ys));
}

//! Reads a two-column `x,y` CSV. Lines starting with '#' are comments. Rows
//! are sorted by x and ties merged; with `mendota` the columns are year and
//! days and are transformed first.
inline RegressionSample load_csv(const std::string& path, bool mendota = false)
{
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open input file: " + path);
  }
  std::vector<double> xs, ys;
  std::vector<std::size_t> line_of;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto view = detail::trim(line);
    if (view.empty() || view.front() == '#') {
      continue;
    }
    auto comma = view.find(',');
    if (comma == std::string_view::npos || view.find(',', comma + 1) != std::string_view::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected exactly two comma-separated columns");
    }
    auto left = detail::trim(view.substr(0, comma));
    auto right = detail::trim(view.substr(comma + 1));
    if (!header_seen) {
      if (left != "x" || right != "y") {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": expected header 'x,y'");
      }
      header_seen = true;
      continue;
    }
    auto x = detail::parse_double(left);
    auto y = detail::parse_double(right);
    if (!x || !y) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": non-numeric value");
    }
    if (!mendota && (*x < 0.0 || *x > 1.0)) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": x outside [0,1]");
    }
    xs.push_back(*x);
    ys.push_back(*y);
    line_of.push_back(lineno);
  }
  if (!header_seen) {
    throw std::runtime_error(path + ": missing header 'x,y'");
  }
  if (xs.empty()) {
    throw std::runtime_error(path + ": empty input");
  }
  if (mendota) {
    return mendota_transform(xs, ys);
  }
  return RegressionSample::from_unsorted(xs, ys);
}

//! Writes `x,y` rows, one per observation, at full precision.
inline void write_sample_csv(std::ostream& out, const RegressionSample& sample)
{
  out << "x,y\n";
  for (std::size_t i = 0; i < sample.size(); ++i) {
    for (std::size_t k = 0; k < sample.counts()[i]; ++k) {
      out << format_double(sample.xs()[i]) << ',' << format_double(sample.ys()[i]) << '\n';
    }
  }
}

//! Evaluation points step, 2 step, ...; the last point is 1 - step, or 1 when
//! `include_one`.
inline std::vector<double> unit_grid(double step, bool include_one)
{
  if (!(step > 0.0 && step < 1.0)) {
    throw std::invalid_argument("grid step must lie in (0,1)");
  }
  double m = std::round(1.0 / step);
  if (std::abs(m * step - 1.0) > 1e-9) {
    throw std::invalid_argument("grid step must divide 1");
  }
  auto count = static_cast<std::size_t>(m);
  std::vector<double> ts;
  for (std::size_t k = 1; k < count + (include_one ? 1 : 0); ++k) {
    ts.push_back(static_cast<double>(k) / m);
  }
  return ts;
}

inline std::vector<double> c_grid(double start, double stop, double step)
{
  if (!(start > 0.0) || !(step > 0.0) || stop < start) {
    throw std::invalid_argument("c grid needs 0 < start <= stop and step > 0");
  }
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    double c = std::round((start + static_cast<double>(k) * step) * 1e12) / 1e12;
    if (c > stop + 1e-12) {
      break;
    }
    out.push_back(c);
  }
  return out;
}

namespace detail {

using nlohmann::json;

struct Table
{
  json meta = json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline json base_meta(const RunConfig& cfg)
{
  json m;
  m["command"] = to_string(cfg.command);
  m["seed"] = cfg.seed;
  m["c"] = cfg.c;
  m["c0"] = cfg.c0;
  m["B"] = cfg.B;
  m["alpha"] = cfg.alpha;
  m["estimator"] = to_string(cfg.estimator);
  m["studentized"] = cfg.studentized;
  m["sigma"] = to_string(cfg.sigma);
  m["grid_step"] = cfg.grid_step;
  if (!cfg.input.empty()) {
    m["input"] = cfg.input;
    m["mendota"] = cfg.mendota;
  }
  return m;
}

inline std::string meta_value(const json& v)
{
  if (v.is_number_float()) {
    return format_double(v.get<double>());
  }
  if (v.is_string()) {
    return v.get<std::string>();
  }
  return v.dump();
}

inline void write_table(std::ostream& out, const Table& table, Format format)
{
  if (format == Format::json) {
    json doc;
    doc["meta"] = table.meta;
    json data = json::array();
    for (const auto& row : table.rows) {
      json rec;
      for (std::size_t j = 0; j < table.columns.size(); ++j) {
        rec[table.columns[j]] = row[j];
      }
      data.push_back(std::move(rec));
    }
    doc["data"] = std::move(data);
    out << doc.dump(2) << '\n';
    return;
  }
  for (const auto& [key, value] : table.meta.items()) {
    out << "# " << key << '=' << meta_value(value) << '\n';
  }
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    out << (j ? "," : "") << table.columns[j];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      out << (j ? "," : "") << format_double(row[j]);
    }
    out << '\n';
  }
}

inline BootstrapConfig bootstrap_config(const RunConfig& cfg)
{
  BootstrapConfig b;
  b.B = cfg.B;
  b.seed = cfg.seed;
  b.estimator = cfg.estimator;
  b.studentized = cfg.studentized;
  b.nw_sigma = cfg.sigma;
  b.alpha = cfg.alpha;
  b.c = cfg.c;
  b.c0 = cfg.c0;
  b.threads = cfg.threads;
  return b;
}

inline RegressionSample input_sample(const RunConfig& cfg)
{
  if (cfg.input.empty()) {
    throw std::invalid_argument(to_string(cfg.command) + " requires --input");
  }
  return load_csv(cfg.input, cfg.mendota);
}

inline Table run_fit(const RunConfig& cfg)
{
  RegressionSample sample = input_sample(cfg);
  BandwidthPlan plan(cfg.c, cfg.c0, sample.observations());
  StepFunction lse = fit_lse(sample);
  auto ts = unit_grid(cfg.grid_step, false);
  std::vector<double> est = cfg.estimator == Estimator::slse
                              ? slse_curve(SlseFit(lse, plan.h(), plan.h0()), ts)
                              : nw_curve(sample, plan.h(), ts);
  Table t;
  t.meta = base_meta(cfg);
  t.meta["h"] = plan.h().value();
  t.meta["h0"] = plan.h0().value();
  t.meta["n"] = sample.observations();
  if (cfg.format == Format::json) {
    t.meta["step"] = { { "knots", lse.knots() }, { "values", lse.values() } };
  }
  t.columns = { "t", "lse", "estimate" };
  for (std::size_t j = 0; j < ts.size(); ++j) {
    t.rows.push_back({ ts[j], eval_step(lse, ts[j]), est[j] });
  }

  if (!cfg.step_output.empty()) {
    std::ofstream step(cfg.step_output, std::ios::binary);
    if (!step) {
      throw std::runtime_error("cannot open step output: " + cfg.step_output);
    }
    Table s;
    s.meta = t.meta;
    s.meta.erase("step");
    s.columns = { "x", "lse" };
    for (std::size_t i = 0; i < lse.knots().size(); ++i) {
      s.rows.push_back({ lse.knots()[i], lse.values()[i] });
    }
    write_table(step, s, cfg.format);
  }
  return t;
}

inline Table run_band(const RunConfig& cfg)
{
  RegressionSample sample = input_sample(cfg);
  auto ts = unit_grid(cfg.grid_step, false);
  ConfidenceBand band = confidence_band(sample, bootstrap_config(cfg), ts);
  Table t;
  t.meta = base_meta(cfg);
  t.meta["h"] = band.h;
  t.meta["h0"] = band.h0;
  t.meta["n"] = sample.observations();
  t.columns = { "t", "estimate", "lower", "upper" };
  for (std::size_t j = 0; j < ts.size(); ++j) {
    t.rows.push_back({ band.ts[j], band.estimate[j], band.lower[j], band.upper[j] });
  }
  return t;
}

inline Table run_bandwidth(const RunConfig& cfg)
{
  RegressionSample sample = input_sample(cfg);
  auto cs = c_grid(cfg.c_min, cfg.c_max, cfg.c_step);
  MiseGrid grid = MiseGrid::from_points(unit_grid(cfg.grid_step, true));
  BandwidthSelection sel = select_c(sample, cs, cfg.c0, cfg.B, grid, cfg.seed, cfg.threads);
  Table t;
  t.meta = base_meta(cfg);
  t.meta["chosen_c"] = sel.chosen_c;
  t.meta["h"] = sel.h;
  t.meta["h0"] = sel.h0;
  t.meta["n"] = sample.observations();
  t.meta["c_grid"] = format_double(cfg.c_min) + ":" + format_double(cfg.c_max) + ":" +
                     format_double(cfg.c_step);
  t.columns = { "c", "score" };
  for (std::size_t k = 0; k < cs.size(); ++k) {
    t.rows.push_back({ sel.c_grid[k], sel.scores[k] });
  }
  return t;
}

inline Table run_simulate(const RunConfig& cfg)
{
  ScenarioSpec spec;
  if (cfg.scenario == "quadratic") {
    spec = ScenarioSpec::quadratic(cfg.n, cfg.sigma0);
  } else if (cfg.scenario == "logistic") {
    spec = ScenarioSpec::logistic(cfg.n, cfg.sigma0);
  } else {
    throw std::invalid_argument("unknown scenario: " + cfg.scenario);
  }
  auto ts = unit_grid(cfg.grid_step, false);
  CoverageReport report = coverage_experiment(spec, bootstrap_config(cfg), ts, cfg.M, cfg.seed);
  Table t;
  t.meta = base_meta(cfg);
  t.meta["scenario"] = cfg.scenario;
  t.meta["n"] = cfg.n;
  t.meta["M"] = cfg.M;
  t.meta["sigma0"] = cfg.sigma0;
  t.columns = { "t", "coverage" };
  for (std::size_t j = 0; j < ts.size(); ++j) {
    t.rows.push_back({ report.ts[j], report.coverage[j] });
  }
  return t;
}

} // namespace detail

//! Executes one subcommand. Results go to cfg.output (or `out`); failures are
//! reported on `err` as a one-line JSON record and yield exit status 1.
inline int run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
  try {
    detail::Table table;
    switch (cfg.command) {
      case Command::fit:
        table = detail::run_fit(cfg);
        break;
      case Command::band:
        table = detail::run_band(cfg);
        break;
      case Command::bandwidth:
        table = detail::run_bandwidth(cfg);
        break;
      case Command::simulate:
        table = detail::run_simulate(cfg);
        break;
    }
    if (cfg.output.empty()) {
      detail::write_table(out, table, cfg.format);
      out.flush();
    } else {
      std::ofstream file(cfg.output, std::ios::binary);
      if (!file) {
        throw std::runtime_error("cannot open output file: " + cfg.output);
      }
      detail::write_table(file, table, cfg.format);
    }
    return 0;
  } catch (const std::exception& e) {
    nlohmann::json record;
    record["error"] = e.what();
    record["command"] = to_string(cfg.command);
    err << record.dump() << '\n';
    return 1;
  }
}

} // namespace smoothboot::cli

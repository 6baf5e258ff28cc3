#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <gsl/gsl_version.h>
#include <openssl/opensslv.h>

#include "json.hpp"
#include "optomech/dynamics/hysteresis.hpp"
#include "optomech/dynamics/switching.hpp"
#include "optomech/model/bistability.hpp"
#include "optomech/response/closed_form.hpp"
#include "optomech/response/peaks.hpp"
#include "optomech/response/spectrum.hpp"
#include "optomech/runner/output.hpp"
#include "optomech/runner/scenario.hpp"
#include "optomech/runner/table.hpp"

namespace optomech::runner {

inline constexpr std::string_view kToolVersion = "0.1.0";

using Json = nlohmann::ordered_json;

/// Everything one evaluation point produces.
struct PointResult {
  std::vector<Table> tables;
  std::vector<std::pair<std::string, Json>> documents;  ///< small JSON files (peaks, knees, ...)
};

namespace detail {

inline Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline PointResult run_bistability(const model::SystemParams& p, const model::DriveConfig& d, const TaskOptions& o) {
  const double rocking = model::rocking_parameter(d);
  std::vector<double> grid(std::size_t(o.input_points));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = o.input_min + (o.input_max - o.input_min) * double(i) / double(grid.size() - 1);
  }
  grid.back() = o.input_max;
  const auto curve = model::bistability_curve(p, grid, rocking);

  Table t{"bistability", {"input_power[omega_m^2]", "branch_index", "p_trans[dimensionless]", "stability"}, {}};
  for (const auto& pt : curve.points) {
    for (std::size_t k = 0; k < pt.roots.size(); ++k) {
      t.rows.push_back({pt.input_power, std::int64_t(k), pt.roots[k].p_trans,
                        std::string(response::to_string(pt.roots[k].stability))});
    }
  }
  Json doc = Json::object();
  doc["rocking"] = rocking;
  doc["knees"] = curve.knees;
  return {{std::move(t)}, {{"knees.json", std::move(doc)}}};
}

inline PointResult run_spectrum(const model::SystemParams& p, const model::DriveConfig& d, const TaskOptions& o) {
  const double rocking = model::rocking_parameter(d);
  const auto roots = model::solve_transmitted_power(p, d.eta0, rocking);
  if (roots.empty()) throw Error(ErrorKind::DegenerateModel, "no physical steady state");
  double p_trans = roots.front().p_trans;
  if (o.branch == "upper") {
    p_trans = roots.back().p_trans;
  } else if (o.branch == "middle") {
    if (roots.size() != 3) throw Error(ErrorKind::DegenerateModel, "no middle branch at this drive");
    p_trans = roots[1].p_trans;
  }
  const auto st = model::steady_state_from_ptrans(p, d.eta0, rocking, p_trans);
  const auto noise = response::NoiseModel::from(p);
  const auto grid = response::linear_grid(o.omega_min, o.omega_max, std::size_t(o.omega_points));
  auto series = response::spectrum_matrix(p, st, noise, grid);
  series.peaks = response::detect_peaks(series);

  PointResult r;
  Table t{"spectrum", {"omega[omega_m]", "S_q[dimensionless]"}, {}};
  std::optional<response::ClosedFormResult> cf;
  if (o.closed_form != "none") {
    const auto w = o.closed_form == "as-printed" ? response::BrownianWeighting::AsPrinted
                                                  : response::BrownianWeighting::Symmetrized;
    cf = response::spectrum_closed_form(p, st, noise, grid, w);
    t.header.push_back("S_q_closed_form[dimensionless]");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<Cell> row{grid[i], series.s_q[i]};
    if (cf) row.emplace_back(cf->series.s_q[i]);
    t.rows.push_back(std::move(row));
  }
  r.tables.push_back(std::move(t));
  if (cf) {
    Table dev{"closed_form_deviations",
              {"omega[omega_m]", "S_q_closed_form[dimensionless]", "S_q[dimensionless]", "relative_deviation[dimensionless]"},
              {}};
    for (const auto& x : cf->deviations) dev.rows.push_back({x.omega, x.closed, x.matrix, x.relative});
    r.tables.push_back(std::move(dev));
  }

  Json doc = Json::object();
  doc["branch"] = o.branch;
  doc["p_trans"] = p_trans;
  doc["count"] = series.peaks.size();
  Json peaks = Json::array();
  for (const auto& pk : series.peaks) {
    peaks.push_back(Json{{"position", pk.position}, {"height", pk.height}, {"prominence", pk.prominence}});
  }
  doc["peaks"] = std::move(peaks);
  r.documents.emplace_back("peaks.json", std::move(doc));
  return r;
}

inline dynamics::SwitchOptions switch_options(const TaskOptions& o) {
  dynamics::SwitchOptions s;
  s.transient_periods = int(o.transient_periods);
  s.measured_periods = int(o.measured_periods);
  s.samples_per_period = int(o.samples_per_period);
  s.rel_tol = o.rel_tol;
  return s;
}

inline PointResult run_switch_metrics(const model::SystemParams& p, const model::DriveConfig& d, const TaskOptions& o) {
  const auto so = switch_options(o);
  const auto run = dynamics::run_switch(p, d, so);
  PointResult r;
  Table t{"metrics",
          {"eta0[omega_m]", "p_amp[omega_m]", "omega_mod[omega_m]", "switch_ratio[dimensionless]",
           "gain[dimensionless]", "period_multiple"},
          {}};
  std::vector<Cell> row{d.eta0, d.p_amp, d.omega_mod, run.metrics.switch_ratio, run.metrics.gain,
                        std::int64_t(run.period_multiple)};
  if (o.bandwidth_points > 0) {
    std::vector<double> grid(std::size_t(o.bandwidth_points));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      grid[i] = o.bandwidth_omega_min + (o.bandwidth_omega_max - o.bandwidth_omega_min) * double(i) / double(grid.size() - 1);
    }
    grid.back() = o.bandwidth_omega_max;
    const auto bw = dynamics::bandwidth(p, d.eta0, d.p_amp, grid, so);
    t.header.push_back("bandwidth[omega_m]");
    row.emplace_back(bw.bandwidth);
    Table g{"bandwidth", {"omega_mod[omega_m]", "gain[dimensionless]"}, {}};
    for (std::size_t i = 0; i < grid.size(); ++i) g.rows.push_back({grid[i], bw.gains[i]});
    r.tables.push_back(std::move(g));
  }
  t.rows.push_back(std::move(row));
  r.tables.insert(r.tables.begin(), std::move(t));
  return r;
}

inline PointResult run_hysteresis(const model::SystemParams& p, const model::DriveConfig& d, const TaskOptions& o) {
  dynamics::HysteresisSpec h;
  h.lo = o.input_min;
  h.hi = o.input_max;
  h.steps = int(o.steps);
  h.dwell = o.dwell;
  h.rocking = model::rocking_parameter(d);
  h.rel_tol = o.rel_tol;
  const auto res = dynamics::hysteresis_sweep(p, h);

  Table t{"hysteresis", {"direction", "input_power[omega_m^2]", "output_power[dimensionless]"}, {}};
  for (const auto& x : res.up) t.rows.push_back({std::string("up"), x.input_power, x.output_power});
  for (auto it = res.down.rbegin(); it != res.down.rend(); ++it) {
    t.rows.push_back({std::string("down"), it->input_power, it->output_power});
  }
  // Cubic knees in the same range, for comparison with the jumps.
  std::vector<double> grid(std::size_t(std::max<std::int64_t>(o.steps, 2)) * 4 + 1);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = h.lo + (h.hi - h.lo) * double(i) / double(grid.size() - 1);
  std::vector<double> knees;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const auto n0 = model::root_count(p, grid[i - 1], h.rocking);
    const auto n1 = model::root_count(p, grid[i], h.rocking);
    if (n0 != n1) knees.push_back(model::refine_knee(p, h.rocking, grid[i - 1], grid[i]));
  }
  Json doc = Json::object();
  doc["rocking"] = h.rocking;
  doc["jump_up"] = optional_number(res.jump_up);
  doc["jump_down"] = optional_number(res.jump_down);
  doc["loop_area"] = res.loop_area;
  doc["cubic_knees"] = knees;
  return {{std::move(t)}, {{"jumps.json", std::move(doc)}}};
}

inline PointResult run_point(TaskKind task, const model::SystemParams& p, const model::DriveConfig& d,
                             const TaskOptions& o) {
  switch (task) {
    case TaskKind::Bistability: return run_bistability(p, d, o);
    case TaskKind::Spectrum: return run_spectrum(p, d, o);
    case TaskKind::SwitchMetrics: return run_switch_metrics(p, d, o);
    case TaskKind::Hysteresis: return run_hysteresis(p, d, o);
    case TaskKind::Sweep: break;
  }
  throw ConfigError("nested sweep");
}

struct PointOutcome {
  std::optional<PointResult> result;
  std::optional<Error> error;
};

inline PointOutcome guarded(TaskKind task, const model::SystemParams& p, const model::DriveConfig& d,
                            const TaskOptions& o) {
  try {
    return {run_point(task, p, d, o), std::nullopt};
  } catch (const Error& e) {
    return {std::nullopt, Error(e.kind(), e.what())};
  } catch (const std::exception& e) {
    return {std::nullopt, Error(ErrorKind::NoConvergence, e.what())};
  }
}

/// Runs fn(i) for i in [0, n) on `jobs` worker threads.
template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, unsigned(n)));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (unsigned w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline Json error_json(const Error& e) {
  return Json{{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}, {"exit_code", exit_code_for(e.kind())}};
}

}  // namespace detail

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> files;  ///< written files, sorted
  std::optional<std::string> error;
};

/// Renders all result files for a config (no disk access). Throws Error if
/// a non-sweep run fails; sweep points fail individually.
inline std::pair<OutputSet, int> render_scenario(const ScenarioConfig& c, unsigned jobs = 1) {
  validate_config(c);
  const bool csv = std::find(c.formats.begin(), c.formats.end(), "csv") != c.formats.end();
  const bool json = std::find(c.formats.begin(), c.formats.end(), "json") != c.formats.end();

  std::vector<Table> tables;
  std::vector<std::pair<std::string, Json>> documents;
  Json errors = Json::array();
  int exit_code = 0;

  if (!c.sweep) {
    auto r = detail::run_point(c.task, c.params, c.drive, c.options);
    tables = std::move(r.tables);
    documents = std::move(r.documents);
  } else {
    const auto& sw = *c.sweep;
    std::vector<detail::PointOutcome> outcomes(sw.values.size());
    detail::parallel_for(sw.values.size(), jobs, [&](std::size_t i) {
      auto p = c.params;
      auto d = c.drive;
      apply_parameter(p, d, sw.parameter, sw.values[i]);
      outcomes[i] = detail::guarded(sw.task, p, d, c.options);
    });
    // Ordered collection: grid order, independent of scheduling.
    const std::string column = sw.parameter + "[" + unit_of(sw.parameter) + "]";
    std::vector<std::string> doc_order;
    std::map<std::string, Json> docs;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      const double v = sw.values[i];
      if (outcomes[i].error) {
        Json e = detail::error_json(*outcomes[i].error);
        Json rec = Json::object();
        rec[sw.parameter] = v;
        for (auto& [k, val] : e.items()) rec[k] = val;
        errors.push_back(std::move(rec));
        exit_code = std::max(exit_code, exit_code_for(outcomes[i].error->kind()));
        continue;
      }
      for (auto& t : outcomes[i].result->tables) {
        // The swept column leads; a task column of the same name is dropped.
        const auto dup = std::find(t.header.begin(), t.header.end(), column);
        const auto skip = dup == t.header.end() ? t.header.size() : std::size_t(dup - t.header.begin());
        auto it = std::find_if(tables.begin(), tables.end(), [&](const Table& x) { return x.name == t.name; });
        if (it == tables.end()) {
          Table nt{t.name, {column}, {}};
          for (std::size_t k = 0; k < t.header.size(); ++k) {
            if (k != skip) nt.header.push_back(t.header[k]);
          }
          tables.push_back(std::move(nt));
          it = std::prev(tables.end());
        }
        for (auto& row : t.rows) {
          std::vector<Cell> full{v};
          for (std::size_t k = 0; k < row.size(); ++k) {
            if (k != skip) full.push_back(std::move(row[k]));
          }
          it->rows.push_back(std::move(full));
        }
      }
      for (auto& [name, doc] : outcomes[i].result->documents) {
        if (!docs.count(name)) {
          doc_order.push_back(name);
          docs[name] = Json::array();
        }
        Json rec = Json::object();
        rec[sw.parameter] = v;
        for (auto& [k, val] : doc.items()) rec[k] = val;
        docs[name].push_back(std::move(rec));
      }
    }
    for (const auto& n : doc_order) documents.emplace_back(n, std::move(docs[n]));
  }

  OutputSet out;
  for (const auto& t : tables) {
    if (csv) out.add(t.name + ".csv", to_csv(t));
    if (json) out.add(t.name + ".json", to_json(t));
  }
  for (const auto& [name, doc] : documents) out.add(name, doc.dump(2) + "\n");
  if (!errors.empty()) out.add("errors.json", errors.dump(2) + "\n");

  Json manifest = Json::object();
  manifest["tool"] = "optomech-switch";
  manifest["version"] = std::string(kToolVersion);
  manifest["task"] = std::string(to_string(c.task));
  manifest["config_sha256"] = sha256_hex(serialize_config(c));
  manifest["libraries"] = Json{
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"boost", BOOST_LIB_VERSION},
      {"gsl", GSL_VERSION},
      {"openssl", OPENSSL_VERSION_STR},
      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                            "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  Json files = Json::object();
  for (const auto& [name, content] : out.files()) files[name] = sha256_hex(content);
  manifest["files"] = std::move(files);
  out.add("manifest.json", manifest.dump(2) + "\n");
  return {std::move(out), exit_code};
}

/// Runs a scenario and writes its files into `out_dir`. On failure only
/// error.json is written (nothing partial).
inline RunResult run_scenario(const ScenarioConfig& c, const std::filesystem::path& out_dir, unsigned jobs = 1) {
  RunResult rr;
  try {
    auto [out, code] = render_scenario(c, jobs);
    out.write_all(out_dir);
    for (const auto& [name, content] : out.files()) rr.files.push_back(name);
    rr.exit_code = code;
    return rr;
  } catch (const Error& e) {
    rr.exit_code = exit_code_for(e.kind());
    rr.error = e.what();
    if (e.kind() != ErrorKind::Io) {
      try {
        ensure_directory(out_dir);
        write_atomic(out_dir, "error.json", detail::error_json(e).dump(2) + "\n");
        rr.files.push_back("error.json");
      } catch (const Error&) {
        rr.exit_code = exit_code_for(ErrorKind::Io);
      }
    }
    return rr;
  }
}

}  // namespace optomech::runner

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "optomech/error.hpp"
#include "optomech/model/params.hpp"
#include "optomech/runner/table.hpp"

namespace optomech::runner {

enum class TaskKind { Bistability, Spectrum, SwitchMetrics, Hysteresis, Sweep };

inline constexpr std::string_view to_string(TaskKind t) {
  switch (t) {
    case TaskKind::Bistability: return "bistability";
    case TaskKind::Spectrum: return "spectrum";
    case TaskKind::SwitchMetrics: return "switch-metrics";
    case TaskKind::Hysteresis: return "hysteresis";
    case TaskKind::Sweep: return "sweep";
  }
  return "?";
}

inline std::optional<TaskKind> parse_task_kind(std::string_view s) {
  for (auto t : {TaskKind::Bistability, TaskKind::Spectrum, TaskKind::SwitchMetrics,
                 TaskKind::Hysteresis, TaskKind::Sweep}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

/// Task-specific settings; every task reads only its own keys.
struct TaskOptions {
  // bistability / hysteresis: input-power (eta0^2) range
  double input_min = 0.01;
  double input_max = 1.2;
  std::int64_t input_points = 400;
  // spectrum
  double omega_min = 0.0;
  double omega_max = 2.5;
  std::int64_t omega_points = 2000;
  std::string branch = "lower";        ///< lower | middle | upper
  std::string closed_form = "none";    ///< none | symmetrized | as-printed
  // switch-metrics
  std::int64_t transient_periods = 50;
  std::int64_t measured_periods = 10;
  std::int64_t samples_per_period = 400;
  std::int64_t bandwidth_points = 0;   ///< 0 disables the bandwidth scan
  double bandwidth_omega_min = 0.1;
  double bandwidth_omega_max = 3.0;
  // hysteresis
  std::int64_t steps = 200;
  double dwell = 200.0;
  // integration
  double rel_tol = 1e-8;

  bool operator==(const TaskOptions&) const = default;
};

struct SweepSpec {
  TaskKind task = TaskKind::Bistability;
  std::string parameter;
  std::vector<double> values;

  bool operator==(const SweepSpec&) const = default;
};

struct ScenarioConfig {
  model::SystemParams params;
  model::DriveConfig drive;
  TaskKind task = TaskKind::Bistability;
  TaskOptions options;
  std::optional<SweepSpec> sweep;
  std::string output;
  std::vector<std::string> formats{"csv"};

  bool operator==(const ScenarioConfig&) const = default;

  /// The task actually computed per point.
  TaskKind base_task() const { return sweep ? sweep->task : task; }
};

// ---------------------------------------------------------------------------
// Key tables

namespace detail {

inline constexpr std::string_view kDriveKeys[] = {"eta0", "p_amp", "omega_mod", "rocking"};

struct DoubleKey {
  std::string_view name;
  double TaskOptions::*member;
};
struct IntKey {
  std::string_view name;
  std::int64_t TaskOptions::*member;
};
struct StringKey {
  std::string_view name;
  std::string TaskOptions::*member;
};

inline constexpr DoubleKey kTaskDoubles[] = {
    {"input_min", &TaskOptions::input_min},
    {"input_max", &TaskOptions::input_max},
    {"omega_min", &TaskOptions::omega_min},
    {"omega_max", &TaskOptions::omega_max},
    {"bandwidth_omega_min", &TaskOptions::bandwidth_omega_min},
    {"bandwidth_omega_max", &TaskOptions::bandwidth_omega_max},
    {"dwell", &TaskOptions::dwell},
    {"rel_tol", &TaskOptions::rel_tol},
};
inline constexpr IntKey kTaskInts[] = {
    {"input_points", &TaskOptions::input_points},
    {"omega_points", &TaskOptions::omega_points},
    {"transient_periods", &TaskOptions::transient_periods},
    {"measured_periods", &TaskOptions::measured_periods},
    {"samples_per_period", &TaskOptions::samples_per_period},
    {"bandwidth_points", &TaskOptions::bandwidth_points},
    {"steps", &TaskOptions::steps},
};
inline constexpr StringKey kTaskStrings[] = {
    {"branch", &TaskOptions::branch},
    {"closed_form", &TaskOptions::closed_form},
};

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view v, std::string_view key, int line) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw ConfigError("'" + std::string(key) + "': expected a finite number, got '" + std::string(v) + "'", line);
  }
  return out;
}

inline std::int64_t parse_int(std::string_view v, std::string_view key, int line) {
  std::int64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("'" + std::string(key) + "': expected an integer, got '" + std::string(v) + "'", line);
  }
  return out;
}

inline std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = v.find(',', start);
    const auto piece = trim(v.substr(start, comma == std::string_view::npos ? v.npos : comma - start));
    out.emplace_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

/// Whether `name` can be swept: a system field or a drive field.
inline bool is_sweepable(std::string_view name) {
  if (model::find_system_field(name)) return true;
  return std::find(std::begin(detail::kDriveKeys), std::end(detail::kDriveKeys), name) !=
         std::end(detail::kDriveKeys);
}

/// Unit annotation used in CSV headers.
inline std::string unit_of(std::string_view name) {
  if (name == "chi" || name == "n_inversion" || name == "thermal_ratio" || name == "rocking") {
    return "dimensionless";
  }
  if (name == "theta") return "rad";
  return "omega_m";
}

/// Copy of (params, drive) with `name` set to `value`.
inline void apply_parameter(model::SystemParams& p, model::DriveConfig& d, std::string_view name, double value) {
  if (const auto* f = model::find_system_field(name)) {
    p.*(f->member) = value;
  } else if (name == "eta0") {
    d.eta0 = value;
  } else if (name == "p_amp") {
    d.p_amp = value;
  } else if (name == "omega_mod") {
    d.omega_mod = value;
  } else if (name == "rocking") {
    d.rocking = value;
  } else {
    throw ConfigError("unknown sweep parameter '" + std::string(name) + "'");
  }
}

/// Semantic checks shared by parsing and by programmatic construction.
inline void validate_config(const ScenarioConfig& c) {
  auto wrap = [](auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  };
  const auto& o = c.options;
  if (c.task == TaskKind::Sweep && !c.sweep) throw ConfigError("task 'sweep' needs sweep_task and sweep_parameter");
  if (c.task != TaskKind::Sweep && c.sweep) throw ConfigError("sweep_* keys given but task is not 'sweep'");
  if (c.formats.empty()) throw ConfigError("formats: at least one of csv, json required");
  for (const auto& f : c.formats) {
    if (f != "csv" && f != "json") throw ConfigError("formats: unknown format '" + f + "'");
  }
  const auto base = c.base_task();
  if (base == TaskKind::Bistability || base == TaskKind::Hysteresis) {
    if (!(o.input_min >= 0) || !(o.input_max > o.input_min)) {
      throw ConfigError("input_min/input_max: need 0 <= input_min < input_max");
    }
  }
  if (base == TaskKind::Bistability && o.input_points < 2) throw ConfigError("input_points: need >= 2");
  if (base == TaskKind::Spectrum) {
    if (!(o.omega_max > o.omega_min) || o.omega_points < 2) {
      throw ConfigError("omega grid: need omega_min < omega_max and omega_points >= 2");
    }
    if (o.branch != "lower" && o.branch != "middle" && o.branch != "upper") {
      throw ConfigError("branch: expected lower, middle or upper");
    }
    if (o.closed_form != "none" && o.closed_form != "symmetrized" && o.closed_form != "as-printed") {
      throw ConfigError("closed_form: expected none, symmetrized or as-printed");
    }
    if (o.closed_form == "as-printed" && !(o.omega_min > 0)) {
      throw ConfigError("closed_form = as-printed diverges at omega = 0; set omega_min > 0");
    }
  }
  if (base == TaskKind::SwitchMetrics) {
    if (o.transient_periods < 0 || o.measured_periods < 1 || o.samples_per_period < 8) {
      throw ConfigError("switch windows: need transient_periods >= 0, measured_periods >= 1, samples_per_period >= 8");
    }
    if (o.bandwidth_points != 0 &&
        (o.bandwidth_points < 20 || !(o.bandwidth_omega_min > 0) || !(o.bandwidth_omega_max > o.bandwidth_omega_min))) {
      throw ConfigError("bandwidth scan: need bandwidth_points >= 20 and 0 < bandwidth_omega_min < bandwidth_omega_max");
    }
  }
  if (base == TaskKind::Hysteresis && (o.steps < 1 || !(o.dwell > 0))) {
    throw ConfigError("hysteresis: need steps >= 1 and dwell > 0");
  }
  if (!(o.rel_tol > 0 && o.rel_tol < 1)) throw ConfigError("rel_tol: need 0 < rel_tol < 1");

  // Every concrete point must be a valid model input.
  std::vector<std::optional<double>> points{std::nullopt};
  if (c.sweep) {
    if (!is_sweepable(c.sweep->parameter)) {
      throw ConfigError("sweep_parameter: '" + c.sweep->parameter + "' is not a parameter");
    }
    if (c.sweep->values.empty()) throw ConfigError("sweep grid is empty");
    if (c.sweep->task == TaskKind::Sweep) throw ConfigError("sweep_task cannot be 'sweep'");
    const auto& name = c.sweep->parameter;
    const bool clash = ((base == TaskKind::Bistability || base == TaskKind::Hysteresis) && name == "eta0") ||
                       (base == TaskKind::SwitchMetrics && o.bandwidth_points > 0 && name == "omega_mod");
    if (clash) throw ConfigError("sweep_parameter '" + name + "' is already the task's own grid variable");
    points.clear();
    for (double v : c.sweep->values) points.emplace_back(v);
  }
  for (const auto& v : points) {
    auto p = c.params;
    auto d = c.drive;
    if (v) apply_parameter(p, d, c.sweep->parameter, *v);
    wrap([&] {
      model::validate(p);
      model::validate(d);
      (void)model::rocking_parameter(d);
    });
    if (base == TaskKind::SwitchMetrics && d.rocking) {
      throw ConfigError("rocking: not used by switch-metrics (the modulation is integrated explicitly)");
    }
    if (base == TaskKind::SwitchMetrics && !(d.p_amp > 0 && d.omega_mod > 0)) {
      throw ConfigError("switch-metrics needs p_amp > 0 and omega_mod > 0");
    }
  }
}

/// Parses the scenario format (see docs/formats.md). `cli_task`, if given,
/// must agree with a `type` key in [task].
inline ScenarioConfig parse_config(std::string_view text, std::optional<TaskKind> cli_task = std::nullopt) {
  ScenarioConfig c;
  std::string section;
  std::set<std::string> seen_sections;
  std::set<std::string> seen_keys;
  std::optional<TaskKind> file_task;
  std::optional<TaskKind> sweep_task;
  std::optional<std::string> sweep_param;
  std::optional<std::vector<double>> sweep_values;
  std::optional<double> sweep_start, sweep_stop;
  std::optional<std::int64_t> sweep_points;
  std::set<std::string> system_keys;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = detail::trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header", line_no);
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      if (section != "system" && section != "drive" && section != "task") {
        throw ConfigError("unknown section [" + section + "]", line_no);
      }
      if (!seen_sections.insert(section).second) throw ConfigError("duplicate section [" + section + "]", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key(detail::trim(line.substr(0, eq)));
    const auto value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key before '='", line_no);
    if (section.empty()) throw ConfigError("key '" + key + "' outside of any section", line_no);
    if (value.empty()) throw ConfigError("'" + key + "': missing value", line_no);
    if (!seen_keys.insert(section + "." + key).second) {
      throw ConfigError("duplicate key '" + key + "' in [" + section + "]", line_no);
    }

    if (section == "system") {
      const auto* f = model::find_system_field(key);
      if (!f) throw ConfigError("unknown key '" + key + "' in [system]", line_no);
      c.params.*(f->member) = detail::parse_double(value, key, line_no);
      system_keys.insert(key);
    } else if (section == "drive") {
      const double v = detail::parse_double(value, key, line_no);
      if (key == "eta0") {
        c.drive.eta0 = v;
      } else if (key == "p_amp") {
        c.drive.p_amp = v;
      } else if (key == "omega_mod") {
        c.drive.omega_mod = v;
      } else if (key == "rocking") {
        c.drive.rocking = v;
      } else {
        throw ConfigError("unknown key '" + key + "' in [drive]", line_no);
      }
    } else {  // task
      bool handled = false;
      for (const auto& k : detail::kTaskDoubles) {
        if (k.name == key) {
          c.options.*(k.member) = detail::parse_double(value, key, line_no);
          handled = true;
        }
      }
      for (const auto& k : detail::kTaskInts) {
        if (k.name == key) {
          c.options.*(k.member) = detail::parse_int(value, key, line_no);
          handled = true;
        }
      }
      for (const auto& k : detail::kTaskStrings) {
        if (k.name == key) {
          c.options.*(k.member) = std::string(value);
          handled = true;
        }
      }
      if (handled) continue;
      if (key == "type" || key == "sweep_task") {
        const auto t = parse_task_kind(value);
        if (!t) throw ConfigError("'" + key + "': unknown task '" + std::string(value) + "'", line_no);
        (key == "type" ? file_task : sweep_task) = *t;
      } else if (key == "sweep_parameter") {
        if (!is_sweepable(value)) {
          throw ConfigError("sweep_parameter: '" + std::string(value) + "' is not a parameter", line_no);
        }
        sweep_param = std::string(value);
      } else if (key == "sweep_values") {
        std::vector<double> vals;
        for (const auto& s : detail::split_list(value)) vals.push_back(detail::parse_double(s, key, line_no));
        sweep_values = std::move(vals);
      } else if (key == "sweep_start") {
        sweep_start = detail::parse_double(value, key, line_no);
      } else if (key == "sweep_stop") {
        sweep_stop = detail::parse_double(value, key, line_no);
      } else if (key == "sweep_points") {
        sweep_points = detail::parse_int(value, key, line_no);
      } else if (key == "output") {
        c.output = std::string(value);
      } else if (key == "formats") {
        c.formats = detail::split_list(value);
      } else {
        throw ConfigError("unknown key '" + key + "' in [task]", line_no);
      }
    }
  }

  for (const char* s : {"system", "drive", "task"}) {
    if (!seen_sections.count(s)) throw ConfigError(std::string("missing section [") + s + "]");
  }
  for (const char* k : {"kappa_a", "kappa_b", "kappa_d"}) {
    if (!system_keys.count(k)) throw ConfigError(std::string("[system] is missing required key '") + k + "'");
  }
  if (cli_task && file_task && *cli_task != *file_task) {
    throw ConfigError("task '" + std::string(to_string(*cli_task)) + "' requested but the file declares '" +
                      std::string(to_string(*file_task)) + "'");
  }
  if (!cli_task && !file_task) throw ConfigError("no task given (CLI argument or [task] type)");
  c.task = cli_task ? *cli_task : *file_task;

  const bool any_sweep = sweep_task || sweep_param || sweep_values || sweep_start || sweep_stop || sweep_points;
  if (any_sweep) {
    if (!sweep_task || !sweep_param) throw ConfigError("sweep needs both sweep_task and sweep_parameter");
    SweepSpec s;
    s.task = *sweep_task;
    s.parameter = *sweep_param;
    const bool range = sweep_start || sweep_stop || sweep_points;
    if (sweep_values && range) throw ConfigError("give either sweep_values or sweep_start/stop/points, not both");
    if (sweep_values) {
      s.values = *sweep_values;
    } else if (range) {
      if (!sweep_start || !sweep_stop || !sweep_points) {
        throw ConfigError("sweep range needs sweep_start, sweep_stop and sweep_points");
      }
      if (*sweep_points < 1) throw ConfigError("sweep grid is empty");
      if (*sweep_points == 1) {
        s.values = {*sweep_start};
      } else {
        for (std::int64_t i = 0; i < *sweep_points; ++i) {
          s.values.push_back(*sweep_start + (*sweep_stop - *sweep_start) * double(i) / double(*sweep_points - 1));
        }
        s.values.back() = *sweep_stop;
      }
    }
    c.sweep = std::move(s);
  }
  validate_config(c);
  return c;
}

/// Canonical text form; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const ScenarioConfig& c) {
  std::ostringstream o;
  o << "[system]\n";
  for (const auto& f : model::kSystemFields) o << f.name << " = " << format_double(c.params.*(f.member)) << "\n";
  o << "\n[drive]\n";
  o << "eta0 = " << format_double(c.drive.eta0) << "\n";
  o << "p_amp = " << format_double(c.drive.p_amp) << "\n";
  o << "omega_mod = " << format_double(c.drive.omega_mod) << "\n";
  if (c.drive.rocking) o << "rocking = " << format_double(*c.drive.rocking) << "\n";
  o << "\n[task]\n";
  o << "type = " << to_string(c.task) << "\n";
  for (const auto& k : detail::kTaskDoubles) o << k.name << " = " << format_double(c.options.*(k.member)) << "\n";
  for (const auto& k : detail::kTaskInts) o << k.name << " = " << c.options.*(k.member) << "\n";
  for (const auto& k : detail::kTaskStrings) o << k.name << " = " << c.options.*(k.member) << "\n";
  if (c.sweep) {
    o << "sweep_task = " << to_string(c.sweep->task) << "\n";
    o << "sweep_parameter = " << c.sweep->parameter << "\n";
    o << "sweep_values = ";
    for (std::size_t i = 0; i < c.sweep->values.size(); ++i) o << (i ? ", " : "") << format_double(c.sweep->values[i]);
    o << "\n";
  }
  if (!c.output.empty()) o << "output = " << c.output << "\n";
  o << "formats = ";
  for (std::size_t i = 0; i < c.formats.size(); ++i) o << (i ? "," : "") << c.formats[i];
  o << "\n";
  return o.str();
}

}  // namespace optomech::runner

#include "vwave/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <variant>

#include "vwave/chartrace.hpp"
#include "vwave/diagnostics.hpp"
#include "vwave/errors.hpp"
#include "vwave/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vwave {

namespace {

using Slot = std::variant<double*, int*, long*, bool*, std::string*>;

std::vector<std::pair<std::string, Slot>> slots(RunConfig& c) {
  auto& s = c.scenario;
  auto& t = c.tol;
  return {
      {"scenario.name", &s.name},
      {"scenario.alpha", &s.alpha},
      {"scenario.beta", &s.beta},
      {"scenario.gamma", &s.gamma},
      {"scenario.K1", &s.K1},
      {"scenario.K2", &s.K2},
      {"scenario.g0", &s.g0},
      {"scenario.eps", &s.eps},
      {"scenario.k", &s.k},
      {"data.source", &c.data.source},
      {"data.path", &c.data.path},
      {"run.T", &c.T},
      {"run.h", &c.h},
      {"run.dx", &c.dx},
      {"run.dt", &c.dt},
      {"run.output_dir", &c.output_dir},
      {"run.isochrones", &c.isochrones},
      {"run.paths", &c.paths},
      {"run.curve_resolution", &c.curve_resolution},
      {"run.threads", &c.threads},
      {"run.seed", &c.seed},
      {"checks.oracle_compare", &c.checks.oracle_compare},
      {"checks.trace", &c.checks.trace},
      {"checks.holder", &c.checks.holder},
      {"checks.balance", &c.checks.balance},
      {"tolerances.drift", &t.drift},
      {"tolerances.oracle_rel_l2", &t.oracle_rel_l2},
      {"tolerances.trace_coeff", &t.trace_coeff},
      {"tolerances.speed_slack", &t.speed_slack},
      {"tolerances.holder_min", &t.holder_min},
      {"tolerances.balance", &t.balance},
      {"tolerances.structure", &t.structure},
      {"tolerances.eps_conc", &t.eps_conc},
      {"tolerances.cell_tol", &t.cell_tol},
      {"tolerances.cell_max_iter", &t.cell_max_iter},
      {"tolerances.fd_cfl", &t.fd_cfl},
      {"tolerances.fd_blowup_cap", &t.fd_blowup_cap},
  };
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end)
    throw ConfigError("'" + key + "': cannot read '" + v + "' as a number");
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(out)) throw ConfigError("'" + key + "': value must be finite");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "': expected on/off, got '" + v + "'");
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
    return v.substr(1, v.size() - 2);
  return v;
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  for (const auto& [k, v] : j.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object())
      flatten(v, key, out);
    else if (v.is_string())
      out.emplace_back(key, v.get<std::string>());
    else if (v.is_boolean())
      out.emplace_back(key, v.get<bool>() ? "true" : "false");
    else if (v.is_number_integer())
      out.emplace_back(key, std::to_string(v.get<long long>()));
    else if (v.is_number())
      out.emplace_back(key, num(v.get<double>()));
    else
      throw ConfigError("'" + key + "': unsupported JSON value");
  }
}

std::string hash_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw MissingArtifacts("missing " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

std::string index_name(const std::string& stem, int k, const char* ext) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", k);
  return stem + "_" + buf + ext;
}

CoefficientField make_field(const RunConfig::Scenario& s) {
  if (s.name == "linear") return CoefficientField::linear(s.alpha, s.beta, s.gamma);
  if (s.name == "liquid-crystal") return CoefficientField::liquid_crystal(s.K1, s.K2);
  if (s.name == "x-heterogeneous") return CoefficientField::x_heterogeneous(s.g0, s.eps, s.k);
  throw ConfigError("unknown scenario '" + s.name + "'");
}

InitialData make_data(const RunConfig::Data& d) {
  if (d.source == "pulse") return InitialData::pulse();
  if (d.source == "hat-steep") return InitialData::hat(-0.0125, 0.0, 0.0125, 0.1, 0.7);
  if (d.source == "gauss") return InitialData::gauss_like(0.0, 0.1, 0.3, 0.7, 256);
  if (d.source == "zero") return InitialData::zero();
  if (d.source == "file") {
    std::ifstream in(d.path);
    if (!in) throw ConfigError("cannot open initial data file '" + d.path + "'");
    try {
      InitialData data = initial_data_from_json(json::parse(in));
      data.validate();
      return data;
    } catch (const json::exception& e) {
      throw ConfigError("initial data file '" + d.path + "': " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("initial data file '" + d.path + "': " + e.what());
    }
  }
  throw ConfigError("unknown data source '" + d.source + "'");
}

// Coefficient sampling box: the curve range and a generous band of u.
Rect sampling_box(const InitialData& d, Interval range, double T) {
  double lo = 0.0, hi = 0.0, u1 = 0.0;
  for (double v : d.u0.values()) lo = std::min(lo, v), hi = std::max(hi, v);
  for (double v : d.u1.values()) u1 = std::max(u1, std::abs(v));
  const double pad = 1.0 + T * u1;
  return {range.lo, range.hi, lo - pad, hi + pad};
}

std::vector<double> start_points(const InitialData& d, int count) {
  std::vector<double> xs;
  const double len = d.support.length();
  for (int j = 0; j < count; ++j) xs.push_back(d.support.lo + (j + 0.5) / count * len);
  return xs;
}

}  // namespace

void RunConfig::validate() const {
  if (!(T > 0.0)) throw ConfigError("T must be positive");
  if (!(h > 0.0)) throw ConfigError("h must be positive");
  if (dx < 0.0 || dt < 0.0) throw ConfigError("dx and dt must be positive (0 selects h)");
  if (isochrones < 1) throw ConfigError("isochrones must be at least 1");
  if (paths < 0) throw ConfigError("paths must be nonnegative");
  if (curve_resolution < 2) throw ConfigError("curve_resolution must be at least 2");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (!(tol.trace_coeff >= 0.0)) throw ConfigError("trace_coeff must be nonnegative");
  if (!(tol.eps_conc > 0.0) || !(tol.cell_tol > 0.0) || tol.cell_max_iter < 1)
    throw ConfigError("solver tolerances must be positive");
  if (!(tol.fd_cfl > 0.0 && tol.fd_cfl <= 0.5)) throw ConfigError("fd_cfl must lie in (0, 0.5]");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

void apply_setting(RunConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = raw_key.find('.') == std::string::npos ? "run." + raw_key : raw_key;
  const std::string value = unquote(trim(raw_value));
  for (auto& [name, slot] : slots(cfg)) {
    if (name != key) continue;
    std::visit(
        [&](auto* p) {
          using T = std::remove_pointer_t<decltype(p)>;
          if constexpr (std::is_same_v<T, std::string>)
            *p = value;
          else if constexpr (std::is_same_v<T, bool>)
            *p = parse_bool(key, value);
          else
            *p = parse_number<T>(key, value);
        },
        slot);
    return;
  }
  throw ConfigError("unknown setting '" + raw_key + "'");
}

RunConfig parse_config(const std::string& text, RunConfig cfg) {
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("malformed JSON config: ") + e.what());
    }
    std::vector<std::pair<std::string, std::string>> kv;
    flatten(j, "", kv);
    for (const auto& [k, v] : kv) apply_setting(cfg, k, v);
    return cfg;
  }
  std::istringstream in(text);
  std::string line, section;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    std::string s = line;
    if (const auto hash = s.find('#'); hash != std::string::npos) s.erase(hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    try {
      apply_setting(cfg, section.empty() ? key : section + "." + key, s.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

json to_json(const RunConfig& cfg) {
  RunConfig copy = cfg;
  json j = json::object();
  for (auto& [name, slot] : slots(copy)) {
    const auto dot = name.find('.');
    json& sec = j[name.substr(0, dot)];
    std::visit([&](auto* p) { sec[name.substr(dot + 1)] = *p; }, slot);
  }
  return j;
}

bool RunResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

RunResult run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  const CoefficientField field = make_field(cfg.scenario);
  const InitialData data = make_data(cfg.data);
  const double T = cfg.T, h = cfg.h;
  const double dx = cfg.dx > 0.0 ? cfg.dx : h;
  const double dt = cfg.dt > 0.0 ? cfg.dt : h;
  const auto& tol = cfg.tol;

  const Interval range = light_cone_range(field, data, T);
  const Rect box = sampling_box(data, range, T);
  const BoundsReport bounds = validate_bounds(field, box, 10000);
  if (!bounds.ok())
    throw ConfigError("scenario violates its declared bounds at x = " +
                      num(bounds.violations.front().x) + ", u = " +
                      num(bounds.violations.front().u) + ": " + bounds.violations.front().what);

  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  const json cfg_json = to_json(cfg);
  write_file(out / "config.json", cfg_json.dump(2) + "\n");

  const BoundaryCurve curve =
      build_boundary_curve(field, data, static_cast<std::size_t>(cfg.curve_resolution), range);
  SolveOptions sopt;
  sopt.cell.tol = tol.cell_tol;
  sopt.cell.max_iter = tol.cell_max_iter;
  sopt.num_threads = cfg.threads;
  auto grid = std::make_shared<const CharGrid>(solve(curve, T, h, sopt));
  // The hash identifies the numerics only, not where or how fast they ran.
  json hashed = cfg_json;
  hashed["run"].erase("output_dir");
  hashed["run"].erase("threads");
  write_grid_dump(*grid, (out / "grid.csv").string(), (out / "grid.json").string(),
                  hash_hex(hashed.dump()));

  RunResult result;
  const double E0 = curve.state().energy_riemann();
  result.E0 = E0;
  DiagnosticsReport report;
  report.scenario = field.name();
  report.h = h;
  report.T = T;
  report.E0 = E0;
  json manifest;
  manifest["isochrones"] = json::array();
  manifest["paths"] = json::array();

  // Energy and interaction potential on the sampled slices.
  IsochroneOptions iopt;
  iopt.eps_conc = tol.eps_conc;
  double q_excess = -E0 * E0;
  for (int k = 0; k <= cfg.isochrones; ++k) {
    const double t = T * k / cfg.isochrones;
    const Isochrone iso = extract_isochrone(*grid, t, iopt);
    const std::string file = index_name("isochrone", k, ".csv");
    std::ofstream os(out / file);
    write_isochrone_csv(iso, os);
    manifest["isochrones"].push_back({{"t", t}, {"file", file}});
    const EnergyReport e = total_energy(iso, E0);
    report.energy_series.push_back(e);
    result.max_drift = std::max(result.max_drift, std::abs(e.rel_drift));
    q_excess = std::max(q_excess, e.Q - E0 * E0);
  }
  result.checks.push_back({"energy", result.max_drift <= tol.drift, result.max_drift, tol.drift,
                           "max |E(t) - E0| / max(E0, 1) over " +
                               std::to_string(cfg.isochrones + 1) + " slices"});

  const double C_hat = source_bound_constant(field, box, 10000);
  const SpaceTimeBound stb = space_time_bound(*grid, E0, C_hat);
  result.checks.push_back({"structure", q_excess <= tol.structure && stb.holds(), q_excess,
                           tol.structure,
                           "max Q - E0^2; space-time bound " + num(stb.lhs) + " <= " +
                               num(stb.rhs)});

  report.events = detect_concentration(*grid, tol.eps_conc);
  result.events = report.events.size();

  // Probes sit on the lattice lines through points of the data support.
  std::vector<int> columns;
  for (double x : start_points(data, std::max(cfg.paths, 1))) {
    const int i = std::clamp(static_cast<int>(std::lround(grid->labels().label_of_x(x))), 0,
                             grid->nX() - 1);
    if (std::find(columns.begin(), columns.end(), i) == columns.end()) columns.push_back(i);
  }

  if (cfg.checks.balance) {
    double worst = 0.0;
    for (int i : columns) {
      const double xp = grid->labels().x_of(i);
      const double r = balance_residual(*grid, 0.25 * T, 0.75 * T, xp);
      report.balance.push_back({0.25 * T, 0.75 * T, xp, r});
      worst = std::max(worst, std::abs(r) / std::max(E0, 1.0));
    }
    result.checks.push_back({"balance", worst <= tol.balance, worst, tol.balance,
                             "max |balance residual| / max(E0, 1) on [T/4, 3T/4]"});
  }

  if (cfg.checks.holder) {
    double lowest = 1.0;
    std::string detail = "smallest exponent of t -> x along probed columns";
    for (int i : columns) {
      try {
        const double a = holder_estimate_column(*grid, i);
        report.holder.push_back({grid->X(i), a});
        lowest = std::min(lowest, a);
      } catch (const InsufficientSamples&) {
        detail += "; column " + std::to_string(i) + " too short";
      }
    }
    result.checks.push_back({"holder", lowest >= tol.holder_min, lowest, tol.holder_min, detail});
  }

  if (cfg.checks.trace) {
    GridProvider provider(grid);
    double worst = 0.0;
    bool speeds_ok = true;
    const double n_lo = field.bounds().speed_lower(), n_hi = field.bounds().speed_upper();
    int k = 0;
    for (int i : columns) {
      const double y = grid->labels().x_of(i);
      for (Family fam : {Family::backward, Family::forward}) {
        const CharPath path = trace_characteristic(provider, fam, y, T, dt);
        worst = std::max(worst, compare_with_gridline(*grid, path).sup_distance);
        const SpeedRange v = path_speeds(path);
        if (v.min_speed < n_lo * (1.0 - tol.speed_slack) ||
            v.max_speed > n_hi * (1.0 + tol.speed_slack))
          speeds_ok = false;
        const char* fname = fam == Family::backward ? "backward" : "forward";
        const std::string file = index_name(std::string("path_") + fname, k, ".csv");
        std::ofstream os(out / file);
        write_path_csv(path, os);
        manifest["paths"].push_back({{"family", fname}, {"y_bar", y}, {"file", file}});
      }
      ++k;
    }
    const double bound = tol.trace_coeff * (h * h + dt * dt);
    result.checks.push_back({"trace", worst <= bound && speeds_ok, worst, bound,
                             std::string("sup |x_path - x_line|; speeds ") +
                                 (speeds_ok ? "within" : "outside") + " [N_lower, N_upper]"});
  }

  if (cfg.checks.oracle_compare) {
    // Smooth window: half the FD blowup time, or of the first grid event
    // when the FD gradients never reach the cap.
    FDRunOptions fopt{tol.fd_cfl, tol.fd_blowup_cap};
    double window = report.events.empty() ? T : std::min(T, 0.5 * report.events.front().t_min);
    std::vector<FDState> snaps;
    try {
      snaps = fd_run(field, data, window, dx, {0.5 * window, window}, fopt);
    } catch (const BlowupSuspected& e) {
      window = 0.5 * e.time();
      snaps = fd_run(field, data, window, dx, {0.5 * window, window}, fopt);
    }
    const std::vector<ErrorRow> rows = fd_compare(snaps, *grid);
    std::ostringstream csv;
    csv << "t,u_linf,u_l2,u_rel_l2,R_linf,R_l2,S_linf,S_l2,points\n";
    double worst = 0.0;
    for (const ErrorRow& r : rows) {
      csv << num(r.t) << ',' << num(r.u_linf) << ',' << num(r.u_l2) << ',' << num(r.u_rel_l2)
          << ',' << num(r.R_linf) << ',' << num(r.R_l2) << ',' << num(r.S_linf) << ','
          << num(r.S_l2) << ',' << r.points << '\n';
      worst = std::max(worst, r.u_rel_l2);
    }
    write_file(out / "oracle.csv", csv.str());
    for (std::size_t k = 0; k < snaps.size(); ++k) {
      std::ofstream os(out / index_name("fd", static_cast<int>(k), ".csv"));
      write_fd_snapshot_csv(snaps[k], os);
    }
    result.checks.push_back({"oracle_compare", worst <= tol.oracle_rel_l2, worst,
                             tol.oracle_rel_l2,
                             "relative L2 of u against the FD oracle on [0, " + num(window) + "]"});
  }

  write_file(out / "diagnostics.json", to_json(report).dump(2) + "\n");
  manifest["checks"] = json::array();
  for (const CheckResult& c : result.checks)
    manifest["checks"].push_back(
        {{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"tolerance", c.tolerance}});
  write_file(out / "manifest.json", manifest.dump(2) + "\n");

  std::ostringstream sum;
  sum << "scenario " << field.name() << ", data " << cfg.data.source << "\n"
      << "T = " << num(T) << ", h = " << num(h) << ", nodes = " << grid->node_count() << "\n"
      << "E0 = " << num(E0) << ", max relative drift = " << num(result.max_drift) << "\n"
      << "concentration events: " << report.events.size() << "\n";
  for (const ConcentrationEvent& e : report.events)
    sum << "  t in [" << num(e.t_min) << ", " << num(e.t_max) << "], x = " << num(e.x)
        << ", nodes = " << e.nodes << "\n";
  for (const CheckResult& c : result.checks)
    sum << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << num(c.value) << " (tolerance "
        << num(c.tolerance) << ") " << c.detail << "\n";
  write_file(out / "summary.txt", sum.str());
  return result;
}

std::string emit_plotdata(const std::string& run_dir, PlotKind kind) {
  const fs::path dir = run_dir;
  if (!fs::is_directory(dir)) throw MissingArtifacts("no run directory " + run_dir);
  std::ostringstream os;
  std::string name;
  switch (kind) {
    case PlotKind::energy: {
      name = "plot_energy.csv";
      const DiagnosticsReport r = report_from_json(json::parse(slurp(dir / "diagnostics.json")));
      os << "t,E,Q,drift\n";
      for (const EnergyReport& e : r.energy_series)
        os << num(e.t) << ',' << num(e.E_total) << ',' << num(e.Q) << ',' << num(e.rel_drift)
           << '\n';
      break;
    }
    case PlotKind::isochrone:
    case PlotKind::paths: {
      const bool iso = kind == PlotKind::isochrone;
      name = iso ? "plot_isochrone.csv" : "plot_paths.csv";
      const json m = json::parse(slurp(dir / "manifest.json"));
      const json& list = m.at(iso ? "isochrones" : "paths");
      if (list.empty()) throw MissingArtifacts("run has no " + std::string(iso ? "isochrones" : "paths"));
      bool header = true;
      for (const json& entry : list) {
        std::istringstream in(slurp(dir / entry.at("file").get<std::string>()));
        const std::string prefix =
            iso ? num(entry.at("t").get<double>())
                : entry.at("family").get<std::string>() + "," + num(entry.at("y_bar").get<double>());
        std::string line;
        std::getline(in, line);
        if (header) os << (iso ? "t," : "family,y_bar,") << line << '\n';
        header = false;
        while (std::getline(in, line)) os << prefix << ',' << line << '\n';
      }
      break;
    }
  }
  write_file(dir / name, os.str());
  return (dir / name).string();
}

}  // namespace vwave

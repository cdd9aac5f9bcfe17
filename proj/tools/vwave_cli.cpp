// Command line front end: `vwave run ...` and `vwave emit-plotdata ...`.
// Exit codes: 0 all checks passed, 1 a check failed, 2 bad configuration,
// 3 solver or I/O error.

#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vwave/errors.hpp"
#include "vwave/pipeline.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> scenario, data, out;
  std::optional<double> T, h, dx, dt, K1, K2;
  std::optional<long> seed;
  std::optional<int> threads;
  std::vector<std::string> checks, settings;
};

vwave::RunConfig effective_config(const Flags& f) {
  vwave::RunConfig cfg;
  if (!f.config.empty()) cfg = vwave::load_config(f.config);
  auto set = [&cfg](const char* key, const auto& v) {
    if (!v) return;
    if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, std::string>)
      vwave::apply_setting(cfg, key, *v);
    else
      vwave::apply_setting(cfg, key, std::to_string(*v));
  };
  if (f.data && f.data->rfind("file:", 0) == 0) {
    cfg.data.source = "file";
    cfg.data.path = f.data->substr(5);
  } else {
    set("data.source", f.data);
  }
  set("scenario.name", f.scenario);
  set("run.output_dir", f.out);
  set("scenario.K1", f.K1);
  set("scenario.K2", f.K2);
  set("run.seed", f.seed);
  set("run.threads", f.threads);
  // Spacings go through the shortest round-trip text, not to_string.
  for (auto [key, v] : {std::pair{"run.T", f.T}, {"run.h", f.h}, {"run.dx", f.dx}, {"run.dt", f.dt}})
    if (v) {
      std::ostringstream os;
      os.precision(17);
      os << *v;
      vwave::apply_setting(cfg, key, os.str());
    }
  for (const std::string& c : f.checks) {
    const auto eq = c.find('=');
    if (eq == std::string::npos) throw vwave::ConfigError("--check expects name=on|off, got '" + c + "'");
    vwave::apply_setting(cfg, "checks." + c.substr(0, eq), c.substr(eq + 1));
  }
  for (const std::string& s : f.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw vwave::ConfigError("--set expects key=value, got '" + s + "'");
    vwave::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-conservative solutions of the variational wave equation"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help");  // -h would clash with --h

  Flags f;
  CLI::App* run = app.add_subcommand("run", "solve, diagnose and write a run directory");
  run->add_option("--config", f.config, "TOML-style or JSON config file");
  run->add_option("--scenario", f.scenario, "linear | liquid-crystal | x-heterogeneous");
  run->add_option("--data", f.data, "pulse | hat-steep | gauss | zero | file:<path>");
  run->add_option("--T", f.T, "final time");
  run->add_option("--h", f.h, "lattice spacing");
  run->add_option("--dx", f.dx, "oracle grid spacing (default h)");
  run->add_option("--dt", f.dt, "trace step (default h)");
  run->add_option("--out", f.out, "output directory");
  run->add_option("--check", f.checks, "toggle a check: name=on|off");
  run->add_option("--seed", f.seed, "reserved; the pipeline uses no randomness");
  run->add_option("--threads", f.threads, "worker threads for the grid solve");
  run->add_option("--K1", f.K1, "liquid-crystal splay constant");
  run->add_option("--K2", f.K2, "liquid-crystal twist constant");
  run->add_option("--set", f.settings, "any config key: section.key=value");

  std::string run_dir, kind;
  CLI::App* plot = app.add_subcommand("emit-plotdata", "flat plotting files from a run directory");
  plot->add_option("run_dir", run_dir, "run directory")->required();
  plot->add_option("--kind", kind, "energy | isochrone | paths")
      ->required()
      ->check(CLI::IsMember({"energy", "isochrone", "paths"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*plot) {
      const vwave::PlotKind k = kind == "energy"      ? vwave::PlotKind::energy
                                : kind == "isochrone" ? vwave::PlotKind::isochrone
                                                      : vwave::PlotKind::paths;
      std::cout << vwave::emit_plotdata(run_dir, k) << "\n";
      return 0;
    }
    const vwave::RunConfig cfg = effective_config(f);
    const vwave::RunResult r = vwave::run_pipeline(cfg);
    for (const auto& c : r.checks)
      std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " " << c.value << " (tol "
                << c.tolerance << ")\n";
    std::cout << "events " << r.events << ", E0 " << r.E0 << ", max drift " << r.max_drift
              << "\nartifacts in " << cfg.output_dir << "\n";
    return r.passed() ? 0 : 1;
  } catch (const vwave::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const vwave::MissingArtifacts& e) {
    std::cerr << "missing artifacts: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

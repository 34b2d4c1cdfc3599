// Command-line front end: run experiments, re-render plots, verify and
// re-run bundles. Worker count comes from ERGOLAB_WORKERS only.
#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ergolab/common.hpp"
#include "ergolab/experiments.hpp"
#include "ergolab/plots.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kGuard = 3, kIncomplete = 4 };

struct RunArgs {
  std::string kind;
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::string> system;
  std::optional<std::string> n;
  std::optional<std::string> seeds;
  std::optional<std::string> seed;
  std::optional<std::string> lags;
  std::optional<std::string> samples;
  std::optional<std::string> steps;
  std::string runs_root = "runs";
  std::string out_dir;
  bool no_plots = false;
};

int report(const std::exception& e, int code) {
  std::cerr << "error: " << e.what() << '\n';
  return code;
}

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ergolab::ConfigError& e) {
    return report(e, kConfig);
  } catch (const ergolab::NumericalGuard& e) {
    return report(e, kGuard);
  } catch (const std::exception& e) {
    return report(e, kIncomplete);
  }
}

void print_bundle(const ergolab::ResultBundle& b) {
  std::cout << b.directory.string() << '\n';
  for (const auto& f : b.outputs) std::cout << "  " << f.sha256.substr(0, 16) << "  " << f.name << '\n';
}

int do_run(const RunArgs& a) {
  // Bundles of failed runs stay on disk marked incomplete; the exception
  // type picks the exit code.
  return guarded([&] {
    const auto kind = ergolab::experiment_kind_from_string(a.kind);
    ergolab::Json config = a.config_path.empty() ? ergolab::Json::object() : ergolab::load_config_file(a.config_path);
    auto shortcut = [&](const char* key, const std::optional<std::string>& v) {
      if (v) ergolab::apply_override(config, std::string(key) + "=" + *v);
    };
    shortcut("system", a.system);
    shortcut("n", a.n);
    shortcut("seeds", a.seeds);
    shortcut("seed", a.seed);
    shortcut("lags", a.lags);
    shortcut("samples", a.samples);
    shortcut("steps", a.steps);
    for (const auto& s : a.sets) ergolab::apply_override(config, s);
    ergolab::RunOptions options;
    options.runs_root = a.runs_root;
    if (!a.out_dir.empty()) options.directory = a.out_dir;
    options.plots = !a.no_plots;
    print_bundle(ergolab::run_experiment(kind, config, options));
    return int{kOk};
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ergolab: numerical experiments on partially hyperbolic skew products"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "run one experiment and write a result bundle");
  run_cmd->add_option("kind", run.kind,
                      "simulate | exponents | sigma | clt | deviation | entropy | historical | lorenz | calibrate")
      ->required();
  run_cmd->add_option("-c,--config", run.config_path, "JSON config file ('//' comments allowed)");
  run_cmd->add_option("--set", run.sets, "override, dotted.path=value (repeatable)");
  run_cmd->add_option("--system", run.system, "system preset name or inline JSON");
  run_cmd->add_option("--n", run.n, "orbit length");
  run_cmd->add_option("--seeds", run.seeds, "number of ensemble members");
  run_cmd->add_option("--seed", run.seed, "master seed");
  run_cmd->add_option("--lags", run.lags, "Green-Kubo lag cut-off");
  run_cmd->add_option("--samples", run.samples, "Green-Kubo sample count");
  run_cmd->add_option("--steps", run.steps, "simulation length");
  run_cmd->add_option("--runs-root", run.runs_root, "parent of timestamped run directories");
  run_cmd->add_option("-o,--out", run.out_dir, "explicit run directory");
  run_cmd->add_flag("--no-plots", run.no_plots, "skip SVG rendering");

  std::string dir;
  auto* plot_cmd = app.add_subcommand("plot", "re-render the SVG figures of a bundle");
  plot_cmd->add_option("dir", dir, "run directory")->required();
  auto* verify_cmd = app.add_subcommand("verify", "check a bundle's digests against the files on disk");
  verify_cmd->add_option("dir", dir, "run directory")->required();
  std::string rerun_out;
  auto* rerun_cmd = app.add_subcommand("rerun", "re-run a bundle's manifest and compare digests");
  rerun_cmd->add_option("dir", dir, "run directory")->required();
  rerun_cmd->add_option("-o,--out", rerun_out, "directory for the re-run bundle");

  CLI11_PARSE(app, argc, argv);

  if (*run_cmd) return do_run(run);
  if (*plot_cmd) {
    return guarded([&] {
      for (const auto& p : ergolab::emit_plots(dir)) std::cout << p.string() << '\n';
      return int{kOk};
    });
  }
  if (*verify_cmd) {
    return guarded([&] {
      const auto check = ergolab::verify_bundle(dir);
      for (const auto& name : check.mismatched) std::cout << "mismatch: " << name << '\n';
      std::cout << (check.ok ? "ok" : "FAILED") << '\n';
      return check.ok ? int{kOk} : int{kIncomplete};
    });
  }
  if (*rerun_cmd) {
    return guarded([&] {
      ergolab::RunOptions options;
      if (!rerun_out.empty()) options.directory = rerun_out;
      const auto bundle = ergolab::rerun_manifest(dir, options);
      const auto before = ergolab::read_digests(dir);
      const auto after = ergolab::read_digests(bundle.directory);
      int differing = 0;
      for (auto it = before.begin(); it != before.end(); ++it) {
        if (!after.contains(it.key()) || after[it.key()] != it.value()) {
          std::cout << "differs: " << it.key() << '\n';
          ++differing;
        }
      }
      std::cout << bundle.directory.string() << '\n' << (differing == 0 ? "reproduced" : "NOT reproduced") << '\n';
      return differing == 0 ? int{kOk} : int{kIncomplete};
    });
  }
  return kOk;
}

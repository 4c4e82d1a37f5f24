#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mpslam/experiment.hpp"
#include "mpslam/scenario_io.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kScenario = 3, kOutput = 4, kRuntime = 5 };

int fail(int code, const std::string& msg) {
  std::cerr << "mpslam: " << msg << "\n";
  return code;
}

bool probe_writable(const std::filesystem::path& dir, std::string& why) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    why = ec.message();
    return false;
  }
  const auto probe = dir / ".mpslam_write_probe";
  {
    std::ofstream f(probe);
    if (!f) {
      why = "cannot create files";
      return false;
    }
  }
  std::filesystem::remove(probe, ec);
  return true;
}

/// Splices the entries of `run --config FILE` in front of the remaining run flags, so flags given on the
/// command line win under the take-last policy. CLI11 only reads config files for the top-level app.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> in(argv + 1, argv + argc), out;
  const auto run_at = std::find(in.begin(), in.end(), "run");
  std::string file;
  std::vector<std::string> rest;
  for (auto it = in.begin(); it != in.end(); ++it) {
    if (run_at != in.end() && it > run_at) {
      if (*it == "--config" && it + 1 != in.end()) {
        file = *++it;
        continue;
      }
      if (it->rfind("--config=", 0) == 0) {
        file = it->substr(9);
        continue;
      }
    }
    rest.push_back(*it);
  }
  if (file.empty()) return in;
  if (!std::filesystem::exists(file)) throw CLI::FileError::Missing(file);
  for (const auto& item : CLI::ConfigTOML().from_file(file)) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
      if (item.inputs[0] == "true") out.push_back("--" + item.name);
      continue;
    }
    out.push_back("--" + item.name);
    out.insert(out.end(), item.inputs.begin(), item.inputs.end());
  }
  const auto pos = std::find(rest.begin(), rest.end(), "run");
  rest.insert(pos + 1, out.begin(), out.end());
  return rest;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multipath SLAM with dispersive features: simulate, track and score"};
  app.require_subcommand(1);

  mpslam::RunConfig cfg;
  std::string scenario_path, out_dir = "out", mode = "unknown";
  auto& tp = cfg.engine.transitions;

  auto* run = app.add_subcommand("run", "Run Monte Carlo simulations and write result CSVs");
  run->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_file;
  run->add_option("--config", config_file, "TOML or INI file with any of the options below; flags override it");
  run->add_option("--scenario", scenario_path, "Scenario file; built-in scenario when omitted");
  run->add_option("--seed", cfg.seed, "Master seed")->envname("MPSLAM_SEED");
  run->add_option("--runs", cfg.runs, "Monte Carlo runs");
  run->add_option("--particles", cfg.engine.particles, "Particles per belief")->capture_default_str();
  run->add_option("--mp-iters", cfg.engine.mp_iterations, "Data association iterations P")->capture_default_str();
  run->add_option("--steps", cfg.steps, "Time steps (0 = whole trajectory)");
  run->add_option("--pa-dispersion", mode, "PA dispersion known|unknown")
      ->check(CLI::IsMember({"known", "unknown"}))
      ->capture_default_str();
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_flag("--dump-frames", cfg.dump_frames, "Write the synthetic measurements of every run");
  run->add_option("--jobs", cfg.jobs, "Parallel runs")->capture_default_str();
  run->add_option("--p-s", tp.p_s, "Survival probability")->capture_default_str();
  run->add_option("--p-cf", cfg.engine.p_cf, "Confirmation threshold")->capture_default_str();
  run->add_option("--p-pr", cfg.engine.p_pr, "Pruning threshold")->capture_default_str();
  run->add_option("--mu-n", tp.mu_n, "Mean number of new PVAs")->capture_default_str();
  run->add_option("--sigma-a", tp.sigma_a, "PVA regularization noise, m")->capture_default_str();
  run->add_option("--sigma-w", tp.sigma_w, "Agent acceleration noise, m/s^2")->capture_default_str();
  run->add_option("--q-tau", tp.q_tau, "Gamma shape of the delay dispersion transition")->capture_default_str();
  run->add_option("--q-theta", tp.q_theta, "Gamma shape of the AoA dispersion transition")->capture_default_str();
  run->add_option("--q-vartheta", tp.q_vartheta, "Gamma shape of the AoD dispersion transition")
      ->capture_default_str();
  run->add_option("--convergence-m", cfg.convergence_threshold, "Final error marking a run converged")
      ->capture_default_str();
  bool quiet = false;
  run->add_flag("--quiet", quiet, "No progress output");

  auto* mk = app.add_subcommand("make-scenario", "Write the built-in scenario file");
  std::string mk_out;
  mk->add_option("--out", mk_out, "Destination file")->required();

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  if (mk->parsed()) {
    try {
      const std::filesystem::path dest(mk_out);
      if (dest.has_parent_path()) std::filesystem::create_directories(dest.parent_path());
      mpslam::save_scenario(mpslam::make_paper_scenario(), dest);
    } catch (const std::exception& e) {
      return fail(kOutput, std::string("cannot write scenario: ") + e.what());
    }
    return kOk;
  }

  cfg.engine.pa_mode = mode == "known" ? mpslam::PaDispersionMode::kKnown : mpslam::PaDispersionMode::kUnknown;
  cfg.scenario = scenario_path;
  cfg.out = out_dir;
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    return fail(kConfig, e.what());
  }

  mpslam::Scenario scenario;
  try {
    if (scenario_path.empty()) {
      scenario = mpslam::make_paper_scenario();
    } else {
      if (!std::filesystem::exists(scenario_path)) return fail(kScenario, "scenario file not found: " + scenario_path);
      scenario = mpslam::load_scenario(scenario_path);
    }
    scenario.validate();
  } catch (const mpslam::ParseError& e) {
    return fail(kScenario, "scenario parse error at line " + std::to_string(e.line()) + " (" + e.field() +
                               "): " + e.what());
  } catch (const std::exception& e) {
    return fail(kScenario, std::string("scenario error: ") + e.what());
  }

  std::string why;
  if (!probe_writable(cfg.out, why)) return fail(kOutput, "output directory not writable: " + out_dir + " (" + why + ")");

  try {
    const auto t0 = std::chrono::steady_clock::now();
    auto progress = [&](std::size_t k, const mpslam::RunLog& log) {
      if (quiet) return;
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::fprintf(stderr, "run %zu done: final error %.3f m, %s, %.1f s elapsed\n", k,
                   log.errors.empty() ? 0.0 : log.errors.back().pos_err, log.converged ? "converged" : "diverged", s);
    };
    const auto result = mpslam::run_experiment(scenario, cfg, progress);
    mpslam::write_outputs(result, scenario, cfg);
    if (!quiet)
      std::fprintf(stderr, "%zu/%zu runs converged, results in %s\n", result.series.runs_converged,
                   result.series.runs_total, out_dir.c_str());
  } catch (const std::exception& e) {
    return fail(kRuntime, e.what());
  }
  return kOk;
}

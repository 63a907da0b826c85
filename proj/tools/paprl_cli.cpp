// Command line front end: pretrain class transition models, run experiments,
// plot reward curves, and self-check the environment.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "paprl/errors.hpp"
#include "paprl/harness.hpp"
#include "paprl/scenario.hpp"
#include "paprl/svg_plot.hpp"

namespace {

int do_pretrain(const std::string& class_id, int interactions, int epochs,
                std::uint64_t seed, const std::string& out_path, bool quiet) {
  auto registry = paprl::make_standard_registry();
  if (!registry->find(class_id))
    throw paprl::ConfigError("unknown class '" + class_id + "'");
  paprl::Rng rng(seed);
  auto cfg = paprl::default_pretrain_config(class_id);
  cfg.fit_epochs = epochs;
  paprl::TransitionFitReport report;
  auto model = paprl::pretrain_offline(registry->get(class_id),
                                       static_cast<std::size_t>(interactions),
                                       cfg, rng, &report);
  std::ofstream out(out_path);
  if (!out) throw paprl::ConfigError("cannot open output " + out_path);
  out << model.to_json().dump(2) << "\n";
  if (!quiet)
    std::cout << "pretrained " << class_id
              << ": heldout_mse=" << report.heldout_mse << " -> " << out_path
              << "\n";
  return 0;
}

int do_run(const std::string& config_path, int seed_offset, bool quiet) {
  std::ifstream in(config_path);
  if (!in) throw paprl::ConfigError("cannot open config " + config_path);
  nlohmann::json j;
  in >> j;
  auto cfg = paprl::run_config_from_json(j);
  cfg.quiet = cfg.quiet || quiet;
  if (seed_offset != 0)
    for (auto& s : cfg.seeds) s += static_cast<std::uint64_t>(seed_offset);
  auto summary = paprl::run_experiment(cfg);
  if (!cfg.quiet) {
    for (const auto& sr : summary.seeds) {
      double mean = 0.0;
      for (double r : sr.rewards) mean += r;
      if (!sr.rewards.empty()) mean /= static_cast<double>(sr.rewards.size());
      std::cout << "seed " << sr.seed << ": mean reward " << mean << " ("
                << sr.csv_path << ")\n";
    }
    std::cout << "aggregate: " << summary.aggregate_path << "\n";
  }
  return 0;
}

int do_plot(const std::vector<std::string>& inputs, const std::string& out,
            int window, bool quiet) {
  paprl::PlotOptions options;
  options.smoothing_window = window;
  paprl::emit_plot(inputs, out, options);
  if (!quiet) std::cout << "wrote " << out << "\n";
  return 0;
}

int do_check(bool quiet) {
  // Minimal end to end exercise: build each scenario, run one short
  // episode with a random agent, verify determinism of the physics step.
  auto registry = paprl::make_standard_registry();
  const paprl::QHyper q_hyper;
  for (const auto& name : paprl::scenario_names()) {
    auto scenario = paprl::scenario_by_name(name);
    auto run_once = [&] {
      paprl::Rng setup_rng(11);
      auto scene = paprl::build_scene(scenario, registry, setup_rng, q_hyper);
      paprl::Rng policy_rng(12);
      auto policy = [&](long long, const paprl::BallState&,
                        const paprl::InteractionContext&) {
        return std::vector<double>{policy_rng.uniform(-0.3, 0.3)};
      };
      paprl::Rng ep_rng(5);
      return paprl::run_episode(scene, policy, scenario.episode, ep_rng);
    };
    auto rec1 = run_once();
    auto rec2 = run_once();
    if (rec1.to_json().dump() != rec2.to_json().dump())
      throw paprl::Error(std::string("determinism check failed for ") + name);
    if (!quiet)
      std::cout << "ok " << name << " (reward " << rec1.reward << ")\n";
  }
  if (!quiet) std::cout << "all checks passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plug and play object model simulator"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("--quiet", quiet, "suppress progress output");

  auto* pre = app.add_subcommand("pretrain",
                                 "train a class transition model offline");
  std::string class_id, out_path = "transition.ckpt.json";
  int interactions = 8000, epochs = 40;
  std::uint64_t seed = 7;
  pre->add_option("--class", class_id, "object class id")->required();
  pre->add_option("--interactions", interactions, "collision pairs to collect");
  pre->add_option("--epochs", epochs, "training epochs");
  pre->add_option("--seed", seed, "rng seed");
  pre->add_option("--out", out_path, "checkpoint output path");

  auto* run = app.add_subcommand("run", "run an experiment from a config");
  std::string config_path;
  int seed_offset = 0;
  run->add_option("--config", config_path, "json config file")->required();
  run->add_option("--seed-offset", seed_offset, "added to every seed");

  auto* plot = app.add_subcommand("plot", "render reward curves to svg");
  std::vector<std::string> plot_inputs;
  std::string plot_out = "reward.svg";
  int window = 100;
  plot->add_option("--in", plot_inputs, "input run csv files")->required();
  plot->add_option("--out", plot_out, "output svg path");
  plot->add_option("--window", window, "moving average window");

  auto* check = app.add_subcommand("check", "run built in sanity checks");
  (void)check;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (pre->parsed())
      return do_pretrain(class_id, interactions, epochs, seed, out_path, quiet);
    if (run->parsed()) return do_run(config_path, seed_offset, quiet);
    if (plot->parsed()) return do_plot(plot_inputs, plot_out, window, quiet);
    if (check->parsed()) return do_check(quiet);
  } catch (const paprl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

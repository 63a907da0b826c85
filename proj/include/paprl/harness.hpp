#ifndef PAPRL_HARNESS_HPP
#define PAPRL_HARNESS_HPP

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "paprl/agents.hpp"
#include "paprl/episode.hpp"
#include "paprl/errors.hpp"
#include "paprl/numfmt.hpp"
#include "paprl/object_model.hpp"
#include "paprl/scenario.hpp"

namespace paprl {

inline constexpr const char* kCsvVersionLine = "# paprl-csv v1";

struct PretrainSettings {
  std::size_t interactions = 8000;
  int epochs = 300;
  std::uint64_t seed = 7;
};

struct RunConfig {
  int format_version = 1;
  std::string scenario = "single-rotating-wall";
  AgentKind agent = AgentKind::PaPOnline;
  int episodes = -1;  // -1: scenario default
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string output_dir = "out";
  AgentParams params;
  std::size_t trust_window = 20;
  double trust_threshold = 0.25;
  PhysicsConfig physics;
  std::map<std::string, std::string> transition_checkpoints;
  PretrainSettings pretrain;
  bool quiet = false;
};

namespace detail {

inline void require_keys(const nlohmann::json& j,
                         const std::vector<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed)
      if (it.key() == k) { ok = true; break; }
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace detail

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  detail::require_keys(
      j,
      {"format_version", "scenario", "agent", "episodes", "seeds",
       "output_dir", "n_action_samples", "epsilon", "q_model",
       "transition_model", "trust", "physics", "transition_checkpoints",
       "pretrain", "quiet"},
      "run config");
  RunConfig cfg;
  cfg.format_version = j.value("format_version", 1);
  if (cfg.format_version != 1)
    throw ConfigError("unsupported format_version");
  if (j.contains("scenario")) {
    cfg.scenario = j.at("scenario").get<std::string>();
    scenario_by_name(cfg.scenario);  // validates the name
  }
  if (j.contains("agent"))
    cfg.agent = agent_kind_from_name(j.at("agent").get<std::string>());
  cfg.episodes = j.value("episodes", -1);
  if (j.contains("seeds"))
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (cfg.seeds.empty()) throw ConfigError("field 'seeds' must be nonempty");
  cfg.output_dir = j.value("output_dir", std::string("out"));
  if (j.contains("n_action_samples"))
    cfg.params.n_action_samples = j.at("n_action_samples").get<std::size_t>();
  if (j.contains("epsilon")) {
    const auto& e = j.at("epsilon");
    detail::require_keys(e, {"start", "end", "fraction"}, "epsilon");
    cfg.params.epsilon_start = e.value("start", 0.1);
    cfg.params.epsilon_end = e.value("end", 0.01);
    cfg.params.epsilon_fraction = e.value("fraction", 0.25);
  }
  if (j.contains("q_model")) {
    const auto& q = j.at("q_model");
    detail::require_keys(
        q, {"hidden", "learning_rate", "minibatch", "train_steps"},
        "q_model");
    if (q.contains("hidden"))
      cfg.params.q_hyper.hidden = q.at("hidden").get<std::vector<int>>();
    cfg.params.q_hyper.learning_rate =
        q.value("learning_rate", cfg.params.q_hyper.learning_rate);
    cfg.params.q_hyper.minibatch =
        q.value("minibatch", cfg.params.q_hyper.minibatch);
    cfg.params.q_hyper.train_steps =
        q.value("train_steps", cfg.params.q_hyper.train_steps);
  }
  if (j.contains("transition_model")) {
    const auto& t = j.at("transition_model");
    detail::require_keys(t, {"hidden", "learning_rate", "minibatch"},
                         "transition_model");
    if (t.contains("hidden"))
      cfg.params.transition_hyper.hidden =
          t.at("hidden").get<std::vector<int>>();
    cfg.params.transition_hyper.learning_rate = t.value(
        "learning_rate", cfg.params.transition_hyper.learning_rate);
    cfg.params.transition_hyper.minibatch =
        t.value("minibatch", cfg.params.transition_hyper.minibatch);
  }
  if (j.contains("trust")) {
    const auto& t = j.at("trust");
    detail::require_keys(t, {"K", "h"}, "trust");
    cfg.trust_window = t.value("K", cfg.trust_window);
    cfg.trust_threshold = t.value("h", cfg.trust_threshold);
  }
  if (j.contains("physics")) {
    const auto& p = j.at("physics");
    detail::require_keys(p,
                         {"gravity", "ball_radius", "dt", "time_limit",
                          "width", "height", "contact_epsilon"},
                         "physics");
    cfg.physics.gravity = p.value("gravity", cfg.physics.gravity);
    cfg.physics.ball_radius = p.value("ball_radius", cfg.physics.ball_radius);
    cfg.physics.dt = p.value("dt", cfg.physics.dt);
    cfg.physics.time_limit = p.value("time_limit", cfg.physics.time_limit);
    cfg.physics.width = p.value("width", cfg.physics.width);
    cfg.physics.height = p.value("height", cfg.physics.height);
    cfg.physics.contact_epsilon =
        p.value("contact_epsilon", cfg.physics.contact_epsilon);
  }
  if (j.contains("transition_checkpoints"))
    cfg.transition_checkpoints =
        j.at("transition_checkpoints")
            .get<std::map<std::string, std::string>>();
  if (j.contains("pretrain")) {
    const auto& p = j.at("pretrain");
    detail::require_keys(p, {"interactions", "epochs", "seed"}, "pretrain");
    cfg.pretrain.interactions =
        p.value("interactions", cfg.pretrain.interactions);
    cfg.pretrain.epochs = p.value("epochs", cfg.pretrain.epochs);
    cfg.pretrain.seed = p.value("seed", cfg.pretrain.seed);
  }
  cfg.quiet = j.value("quiet", false);
  // PAPRL_OUT environment variable wins over the config field
  if (const char* env = std::getenv("PAPRL_OUT"))
    cfg.output_dir = env;
  return cfg;
}

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<double> rewards;       // one per episode
  std::vector<int> n_active;         // per episode
  std::string csv_path;
};

struct RunSummary {
  std::string agent;
  std::string scenario;
  std::vector<SeedResult> seeds;
  std::string aggregate_path;
};

// Observer fired around each schedule event; used by tests to check that
// uninvolved objects are untouched by spawns/removals.
using ScheduleObserver =
    std::function<void(const Scene&, const ScheduleEvent&, bool before)>;

// Drives one (config, seed) run episode by episode. Granular so tests can
// step it manually.
class SeedRun {
 public:
  SeedRun(const RunConfig& config, const Scenario& scenario,
          std::uint64_t seed,
          const std::map<std::string, TransitionModel>* checkpoints)
      : config_(config),
        scenario_(scenario),
        seed_(seed),
        master_(seed),
        setup_rng_(master_.split(1)),
        episodes_(config.episodes > 0 ? config.episodes
                                      : scenario.default_episodes) {
    scene_ = std::make_unique<Scene>(
        build_scene(scenario_, make_standard_registry(), setup_rng_,
                    config_.params.q_hyper, config_.trust_window,
                    config_.trust_threshold));
    agent_ = make_agent(config_.agent, config_.params);
    if (auto* pap = dynamic_cast<PaPAgent*>(agent_.get()); pap && checkpoints)
      for (const auto& [cls, model] : *checkpoints)
        pap->inject_transition_model(model);
  }

  int episodes() const { return episodes_; }
  Scene& scene() { return *scene_; }
  Agent& agent() { return *agent_; }
  std::uint64_t seed() const { return seed_; }

  void apply_schedule(int episode, const ScheduleObserver& observer) {
    for (const auto& ev : scenario_.schedule) {
      if (ev.episode != episode) continue;
      if (observer) observer(*scene_, ev, true);
      if (ev.is_spawn) {
        Rng spawn_rng = master_.split(0x3000000000ULL + episode);
        scene_->spawn_object(ev.spawn.class_id, ev.spawn.attributes,
                             ev.spawn.active, spawn_rng, ev.spawn.placement);
      } else {
        scene_->remove_object(ev.object_id);
      }
      if (observer) observer(*scene_, ev, false);
    }
  }

  // Runs episode `e` (0-based); returns its record.
  EpisodeRecord run_one(int e) {
    agent_->set_episode(e, episodes_);
    Rng ep_rng = master_.split(0x1000000000ULL + e);
    Rng agent_rng = master_.split(0x2000000000ULL + e);
    PolicyHook policy = [&](long long object_id, const BallState& pre,
                            const InteractionContext& ctx) {
      return agent_->decide(*scene_, scene_->get(object_id), pre, ctx,
                            agent_rng);
    };
    EpisodeRecord record = run_episode(*scene_, policy, scenario_.episode,
                                       ep_rng);
    agent_->end_episode(*scene_, record, agent_rng);
    return record;
  }

 private:
  RunConfig config_;
  Scenario scenario_;
  std::uint64_t seed_;
  Rng master_;
  Rng setup_rng_;
  int episodes_;
  std::unique_ptr<Scene> scene_;
  std::unique_ptr<Agent> agent_;
};

class ExperimentRunner {
 public:
  explicit ExperimentRunner(RunConfig config)
      : config_(std::move(config)),
        scenario_(scenario_by_name(config_.scenario)) {
    scenario_.episode.physics = config_.physics;
    if (config_.agent == AgentKind::PaPOffline) prepare_checkpoints();
  }

  ScheduleObserver observer;  // optional, for tests

  // Pretrained transition models for PaP-offline: loaded from checkpoint
  // files when given, otherwise pretrained here, once, shared by all seeds.
  void prepare_checkpoints() {
    for (const auto& spec : active_classes()) {
      const std::string& id = spec->class_id;
      if (checkpoints_.count(id)) continue;
      auto path_it = config_.transition_checkpoints.find(id);
      if (path_it != config_.transition_checkpoints.end()) {
        std::ifstream in(path_it->second);
        if (!in) throw ConfigError("cannot open checkpoint " +
                                   path_it->second);
        nlohmann::json j;
        in >> j;
        checkpoints_.emplace(id, TransitionModel::from_json(j));
      } else {
        Rng rng(config_.pretrain.seed);
        PretrainConfig pc = default_pretrain_config(id);
        pc.physics = config_.physics;
        pc.fit_epochs = config_.pretrain.epochs;
        pc.hyper = config_.params.transition_hyper;
        if (id == "arc-wall") pc.hyper.velocity_range = 1500.0;
        if (!config_.quiet)
          std::cerr << "pretraining transition model for " << id << "...\n";
        checkpoints_.emplace(
            id, pretrain_offline(*find_class(id), config_.pretrain.interactions,
                                 pc, rng));
      }
    }
  }

  const std::map<std::string, TransitionModel>& checkpoints() const {
    return checkpoints_;
  }

  RunSummary run() {
    namespace fs = std::filesystem;
    fs::create_directories(config_.output_dir);
    RunSummary summary;
    summary.agent = agent_kind_name(config_.agent);
    summary.scenario = config_.scenario;
    const auto wall_ids = all_wall_object_ids();

    for (std::uint64_t seed : config_.seeds) {
      SeedRun run(config_, scenario_, seed,
                  checkpoints_.empty() ? nullptr : &checkpoints_);
      SeedResult result;
      result.seed = seed;
      const std::string csv_path =
          (fs::path(config_.output_dir) /
           (config_.scenario + "_" + summary.agent + "_seed" +
            std::to_string(seed) + ".csv"))
              .string();
      std::ofstream csv(csv_path);
      csv << kCsvVersionLine << "\n";
      csv << "episode,seed,agent,reward,outcome,n_active";
      for (long long id : wall_ids) csv << ",tf_" << id;
      csv << "\n";

      for (int e = 0; e < run.episodes(); ++e) {
        run.apply_schedule(e, observer);
        std::map<long long, long> evals_before;
        for (const auto& inst : run.scene().instances())
          if (inst->active)
            evals_before[inst->object_id] = inst->models.trust.evaluations;
        const EpisodeRecord record = run.run_one(e);
        result.rewards.push_back(record.reward);
        result.n_active.push_back(static_cast<int>(run.scene().n_active()));
        csv << e << "," << seed << "," << summary.agent << ","
            << format_double(record.reward) << ","
            << outcome_name(record.outcome) << "," << run.scene().n_active();
        for (long long id : wall_ids) {
          csv << ",";
          auto inst = run.scene().find(id);
          if (inst && inst->active) {
            auto it = evals_before.find(id);
            const long before = it == evals_before.end() ? 0 : it->second;
            if (inst->models.trust.evaluations > before)
              csv << format_double(inst->models.trust.last_tf);
          }
        }
        csv << "\n";
      }
      csv.close();
      result.csv_path = csv_path;
      summary.seeds.push_back(std::move(result));
      if (!config_.quiet)
        std::cerr << summary.agent << " seed " << seed << " done\n";
    }

    summary.aggregate_path = write_aggregate(summary);
    return summary;
  }

 private:
  std::vector<std::shared_ptr<ObjectClass>> active_classes() const {
    auto registry = make_standard_registry();
    std::vector<std::shared_ptr<ObjectClass>> out;
    auto add = [&](const std::string& id) {
      for (const auto& c : out)
        if (c->class_id == id) return;
      out.push_back(registry->find(id));
    };
    for (const auto& spec : scenario_.initial)
      if (spec.active) add(spec.class_id);
    for (const auto& ev : scenario_.schedule)
      if (ev.is_spawn && ev.spawn.active) add(ev.spawn.class_id);
    return out;
  }

  std::shared_ptr<ObjectClass> find_class(const std::string& id) const {
    return make_standard_registry()->find(id);
  }

  // Object ids are deterministic (monotone per spawn), so the trust-column
  // layout is known before any episode runs.
  std::vector<long long> all_wall_object_ids() const {
    std::vector<long long> ids;
    long long next = 0;
    for (const auto& spec : scenario_.initial) {
      if (spec.class_id != "neutral-ball") ids.push_back(next);
      ++next;
    }
    for (const auto& ev : scenario_.schedule)
      if (ev.is_spawn) ids.push_back(next++);
    return ids;
  }

  std::string write_aggregate(const RunSummary& summary) const {
    namespace fs = std::filesystem;
    const std::string path =
        (fs::path(config_.output_dir) /
         (config_.scenario + "_" + summary.agent + "_aggregate.csv"))
            .string();
    std::size_t episodes = 0;
    for (const auto& s : summary.seeds)
      episodes = std::max(episodes, s.rewards.size());
    std::ofstream out(path);
    out << kCsvVersionLine << "\n";
    out << "episode,mean_reward,ci95,n_seeds\n";
    for (std::size_t e = 0; e < episodes; ++e) {
      double sum = 0.0, sum2 = 0.0;
      int n = 0;
      for (const auto& s : summary.seeds) {
        if (e >= s.rewards.size()) continue;
        sum += s.rewards[e];
        sum2 += s.rewards[e] * s.rewards[e];
        ++n;
      }
      const double mean = sum / n;
      double ci = 0.0;
      if (n > 1) {
        const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1));
        ci = 1.96 * std::sqrt(var / n);
      }
      out << e << "," << format_double(mean) << "," << format_double(ci)
          << "," << n << "\n";
    }
    return path;
  }

  RunConfig config_;
  Scenario scenario_;
  std::map<std::string, TransitionModel> checkpoints_;
};

inline RunSummary run_experiment(RunConfig config) {
  ExperimentRunner runner(std::move(config));
  return runner.run();
}

}  // namespace paprl

#endif  // PAPRL_HARNESS_HPP

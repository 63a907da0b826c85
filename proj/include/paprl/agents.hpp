#ifndef PAPRL_AGENTS_HPP
#define PAPRL_AGENTS_HPP

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "paprl/episode.hpp"
#include "paprl/errors.hpp"
#include "paprl/object_model.hpp"
#include "paprl/reward_model.hpp"
#include "paprl/rng.hpp"
#include "paprl/scenario.hpp"
#include "paprl/transition_model.hpp"

namespace paprl {

enum class AgentKind { PaPOffline, PaPOnline, Dqn, MoDqn };

inline std::string agent_kind_name(AgentKind k) {
  switch (k) {
    case AgentKind::PaPOffline: return "pap-offline";
    case AgentKind::PaPOnline: return "pap-online";
    case AgentKind::Dqn: return "dqn";
    default: return "mo-dqn";
  }
}

inline AgentKind agent_kind_from_name(const std::string& s) {
  if (s == "pap-offline") return AgentKind::PaPOffline;
  if (s == "pap-online") return AgentKind::PaPOnline;
  if (s == "dqn") return AgentKind::Dqn;
  if (s == "mo-dqn") return AgentKind::MoDqn;
  throw ConfigError("unknown agent kind: " + s);
}

struct AgentParams {
  std::size_t n_action_samples = 10000;  // sampled-argmax budget
  double epsilon_start = 0.1;
  double epsilon_end = 0.01;
  double epsilon_fraction = 0.25;  // of the episode budget
  std::size_t online_min_pairs = 64;  // cold threshold for online models
  QHyper q_hyper;
  TransitionHyper transition_hyper;
};

// All agent kinds expose the same hook signature so the harness stays
// agent-agnostic: decide() at interaction time, end_episode() once the
// global reward is known.
class Agent {
 public:
  explicit Agent(AgentParams params) : params_(std::move(params)) {}
  virtual ~Agent() = default;

  virtual std::vector<double> decide(Scene& scene, ObjectInstance& object,
                                     const BallState& pre,
                                     const InteractionContext& ctx,
                                     Rng& rng) = 0;
  virtual void end_episode(Scene& scene, const EpisodeRecord& record,
                           Rng& rng) = 0;
  virtual std::string name() const = 0;

  void set_episode(int index, int total) {
    episode_index_ = index;
    episode_total_ = total;
  }

  const AgentParams& params() const { return params_; }

 protected:
  double epsilon() const {
    const double warm = params_.epsilon_fraction *
                        static_cast<double>(episode_total_);
    if (warm <= 0.0 || episode_index_ >= warm) return params_.epsilon_end;
    const double frac = static_cast<double>(episode_index_) / warm;
    return params_.epsilon_start +
           frac * (params_.epsilon_end - params_.epsilon_start);
  }

  static std::vector<double> random_action(const ActionSpec& spec, Rng& rng) {
    std::vector<double> a(spec.bounds.size());
    for (std::size_t d = 0; d < a.size(); ++d)
      a[d] = rng.uniform(spec.bounds[d].first, spec.bounds[d].second);
    return a;
  }

  AgentParams params_;
  int episode_index_ = 0;
  int episode_total_ = 1;
};

// PaP-RL (Algorithm-2 loop): per-class local transition model, per-object
// reward model with trust-factor swapping. Offline mode consumes
// pretrained transition checkpoints; online mode learns the transition
// models during the run and falls back to uniform random actions while a
// class model is still cold.
class PaPAgent : public Agent {
 public:
  PaPAgent(AgentKind kind, AgentParams params)
      : Agent(std::move(params)), kind_(kind) {
    if (kind_ != AgentKind::PaPOffline && kind_ != AgentKind::PaPOnline)
      throw ConfigError("PaPAgent requires a PaP agent kind");
  }

  std::string name() const override { return agent_kind_name(kind_); }

  // Inject a pretrained class transition model. Injected models are
  // frozen: online runs do not keep training a transferred model.
  void inject_transition_model(TransitionModel model) {
    const std::string id = model.class_id();
    auto& slot = classes_[id];
    slot.model = std::make_shared<TransitionModel>(std::move(model));
    slot.frozen = true;
  }

  std::shared_ptr<TransitionModel> transition_model(
      const std::string& class_id) const {
    auto it = classes_.find(class_id);
    return it == classes_.end() ? nullptr : it->second.model;
  }

  const TransitionDataset* dataset(const std::string& class_id) const {
    auto it = classes_.find(class_id);
    return it == classes_.end() ? nullptr : &it->second.dataset;
  }

  long cold_fallbacks() const { return cold_fallbacks_; }

  std::vector<double> decide(Scene& scene, ObjectInstance& object,
                             const BallState& pre,
                             const InteractionContext& ctx,
                             Rng& rng) override {
    if (!object.active || object.has_acted_this_episode)
      throw InactiveObject(object.object_id);
    auto& cls = scene.registry().get(object.class_id);
    auto& slot = class_slot(cls, rng);

    Pending pending;
    pending.context = ctx.to_vector();

    if (slot.model->cold()) {
      if (kind_ == AgentKind::PaPOffline)
        throw ColdModel();
      // online cold fallback: uniform random action
      ++cold_fallbacks_;
      pending.action = random_action(cls.action_spec, rng);
      pending.predicted_q = 0.0;
      pending.have_prediction = false;
      pending_[object.object_id] = pending;
      return pending.action;
    }

    const PostInteractionState predicted =
        slot.model->predict(pre.state4(), pending.context);
    pending.predicted_post = predicted.state4();
    pending.have_prediction = true;

    const QModel& q = object.models.active_model();
    if (rng.uniform() < epsilon()) {
      pending.action = random_action(cls.action_spec, rng);
      pending.predicted_q =
          q.value(pending.predicted_post, pending.context, pending.action);
    } else {
      pending.action =
          q.argmax_action(pending.predicted_post, pending.context,
                          params_.n_action_samples, rng, &pending.predicted_q);
    }
    pending_[object.object_id] = pending;
    return pending.action;
  }

  void end_episode(Scene& scene, const EpisodeRecord& record,
                   Rng& rng) override {
    const double reward = record.reward;
    for (const auto& rec : record.interactions) {
      auto inst = scene.find(rec.object_id);
      if (!inst) continue;
      // every observed interaction trains the class transition model
      if (kind_ == AgentKind::PaPOnline) {
        auto& cls = scene.registry().get(inst->class_id);
        auto& slot = class_slot(cls, rng);
        if (!slot.frozen) {
          InteractionContext ctx = InteractionContext{
              scene_ball_friction(scene), scene_ball_elasticity(scene),
              scene_ball_mass(scene),     rec.wall_attributes_applied,
              rec.normal_cos,             rec.normal_sin,
              rec.tangent_coord};
          slot.dataset.record_interaction(rec.pre4, ctx.to_vector(), rec.post);
          if (slot.dataset.size() >= params_.online_min_pairs)
            slot.model->train_minibatch(slot.dataset, rng);
        }
      }
      if (!rec.policy_called) continue;
      auto it = pending_.find(rec.object_id);
      if (it == pending_.end()) continue;
      const Pending& pending = it->second;
      QTriplet triplet{rec.post.state4(), pending.context, rec.action, reward};
      inst->models.update_q(triplet, rng);
      if (pending.have_prediction) {
        inst->models.trust.push_residual(reward - pending.predicted_q);
        inst->models.maybe_swap();
      }
    }
    pending_.clear();
  }

 private:
  struct Pending {
    std::vector<double> predicted_post;
    std::vector<double> context;
    std::vector<double> action;
    double predicted_q = 0.0;
    bool have_prediction = false;
  };

  struct ClassSlot {
    std::shared_ptr<TransitionModel> model;
    TransitionDataset dataset;
    bool frozen = false;
  };

  ClassSlot& class_slot(const ObjectClass& cls, Rng& rng) {
    auto& slot = classes_[cls.class_id];
    if (!slot.model) {
      if (kind_ == AgentKind::PaPOffline)
        throw ConfigError("pap-offline requires a transition checkpoint for "
                          "class " + cls.class_id);
      slot.model = std::make_shared<TransitionModel>(
          make_transition_model(cls, params_.transition_hyper, rng));
    }
    return slot;
  }

  static double scene_ball_friction(const Scene& scene) {
    return ball_attr(scene, 4, 0.5);
  }
  static double scene_ball_elasticity(const Scene& scene) {
    return ball_attr(scene, 5, 0.7);
  }
  static double scene_ball_mass(const Scene& scene) {
    return ball_attr(scene, 6, 10.0);
  }
  static double ball_attr(const Scene& scene, std::size_t i, double fallback) {
    for (const auto& inst : scene.instances())
      if (scene.registry().get(inst->class_id).body == BodyKind::Ball)
        return inst->attributes[i];
    return fallback;
  }

  AgentKind kind_;
  std::map<std::string, ClassSlot> classes_;
  std::map<long long, Pending> pending_;
  long cold_fallbacks_ = 0;
};

// PHYRE-style DQN baseline: a Q-network over the neutral ball's
// pre-interaction state and the candidate action, no transition model
// anywhere. MO-DQN is the same policy with one independent network per
// active object (which is also what Dqn degenerates to; in single-object
// scenes the two coincide).
class DqnAgent : public Agent {
 public:
  DqnAgent(AgentKind kind, AgentParams params)
      : Agent(std::move(params)), kind_(kind) {
    if (kind_ != AgentKind::Dqn && kind_ != AgentKind::MoDqn)
      throw ConfigError("DqnAgent requires a DQN agent kind");
  }

  std::string name() const override { return agent_kind_name(kind_); }

  const QModel* model_for(long long object_id) const {
    auto it = slots_.find(object_id);
    return it == slots_.end() ? nullptr : &it->second.q;
  }

  std::vector<double> decide(Scene& scene, ObjectInstance& object,
                             const BallState& pre,
                             const InteractionContext& ctx, Rng& rng) override {
    (void)ctx;  // the DQN baseline sees only the ball's own state
    auto& cls = scene.registry().get(object.class_id);
    auto& slot = object_slot(object, cls, rng);
    const std::vector<double> consts{pre.friction, pre.elasticity, pre.mass};
    if (rng.uniform() < epsilon()) return random_action(cls.action_spec, rng);
    return slot.q.argmax_action(pre.state4(), consts,
                                params_.n_action_samples, rng);
  }

  void end_episode(Scene& scene, const EpisodeRecord& record,
                   Rng& rng) override {
    const double reward = record.reward;
    for (const auto& rec : record.interactions) {
      if (!rec.policy_called) continue;
      auto inst = scene.find(rec.object_id);
      if (!inst) continue;
      auto it = slots_.find(rec.object_id);
      if (it == slots_.end()) continue;
      auto& slot = it->second;
      const std::vector<double> consts{ball_attr(scene, 4),
                                       ball_attr(scene, 5),
                                       ball_attr(scene, 6)};
      slot.buffer.push({rec.pre4, consts, rec.action, reward});
      for (int s = 0; s < slot.q.hyper().train_steps; ++s)
        slot.q.train_minibatch(slot.buffer, rng);
    }
  }

 private:
  struct Slot {
    QModel q;
    ReplayBuffer<QTriplet> buffer{10000};
  };

  Slot& object_slot(const ObjectInstance& object, const ObjectClass& cls,
                    Rng& rng) {
    auto it = slots_.find(object.object_id);
    if (it != slots_.end()) return it->second;
    // state layout: ball 4-state + ball constants + action
    auto ranges = ball_constant_ranges();
    const std::size_t dim = ranges.size();
    QModel q(cls.action_spec, dim, std::move(ranges),
             params_.q_hyper, rng);
    auto [ins, _] = slots_.emplace(object.object_id,
                                   Slot{std::move(q),
                                        ReplayBuffer<QTriplet>(10000)});
    return ins->second;
  }

  static double ball_attr(const Scene& scene, std::size_t i) {
    for (const auto& inst : scene.instances())
      if (scene.registry().get(inst->class_id).body == BodyKind::Ball)
        return inst->attributes[i];
    return i == 6 ? 10.0 : 0.5;
  }

  AgentKind kind_;
  std::map<long long, Slot> slots_;
};

inline std::unique_ptr<Agent> make_agent(AgentKind kind, AgentParams params) {
  if (kind == AgentKind::PaPOffline || kind == AgentKind::PaPOnline)
    return std::make_unique<PaPAgent>(kind, std::move(params));
  return std::make_unique<DqnAgent>(kind, std::move(params));
}

}  // namespace paprl

#endif  // PAPRL_AGENTS_HPP

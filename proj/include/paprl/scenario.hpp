#ifndef PAPRL_SCENARIO_HPP
#define PAPRL_SCENARIO_HPP

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "paprl/episode.hpp"
#include "paprl/errors.hpp"
#include "paprl/object_model.hpp"
#include "paprl/physics.hpp"
#include "paprl/rng.hpp"
#include "paprl/transition_model.hpp"

namespace paprl {

inline constexpr double kWallTiltLimit = M_PI / 10.0;

inline ObjectClass rotating_wall_class() {
  ObjectClass cls;
  cls.class_id = "rotating-wall";
  cls.name = "Rotating Wall";
  cls.schema = AttributeSchema({{"f_w", 0.4, 0.9, "friction"},
                                {"e_w", 0.4, 0.9, "elasticity"},
                                {"theta_w", -kWallTiltLimit, kWallTiltLimit,
                                 "rad"}});
  cls.action_spec.dim = 1;
  cls.action_spec.bounds = {{-kWallTiltLimit, kWallTiltLimit}};
  cls.body = BodyKind::Segment;
  cls.actuated_indices = {2};
  return cls;
}

inline ObjectClass arc_wall_class() {
  ObjectClass cls;
  cls.class_id = "arc-wall";
  cls.name = "Arc Wall";
  cls.schema = AttributeSchema({{"f_a", 0.4, 0.9, "friction"},
                                {"e_a", 0.4, 0.9, "elasticity"},
                                {"v_a_dot", -50.0, 50.0, "rad/s"}});
  cls.action_spec.dim = 1;
  cls.action_spec.bounds = {{-50.0, 50.0}};
  cls.body = BodyKind::Arc;
  cls.actuated_indices = {2};
  return cls;
}

inline ObjectClass neutral_ball_class() {
  ObjectClass cls;
  cls.class_id = "neutral-ball";
  cls.name = "Neutral Ball";
  cls.schema = AttributeSchema({{"v_x", -2000.0, 2000.0, "units/s"},
                                {"v_y", -2000.0, 2000.0, "units/s"},
                                {"v_b_dot", -200.0, 200.0, "rad/s"},
                                {"theta_b", -M_PI, M_PI, "rad"},
                                {"f_b", 0.4, 0.9, "friction"},
                                {"e_b", 0.4, 0.9, "elasticity"},
                                {"m_b", 5.0, 25.0, "mass"}});
  cls.action_spec.dim = 0;
  cls.body = BodyKind::Ball;
  return cls;
}

inline std::shared_ptr<ClassRegistry> make_standard_registry() {
  auto registry = std::make_shared<ClassRegistry>();
  registry->register_class(rotating_wall_class());
  registry->register_class(arc_wall_class());
  registry->register_class(neutral_ball_class());
  return registry;
}

// Default per-class attribute values used by the scenario catalog.
inline std::vector<double> default_wall_attributes() { return {0.5, 0.7, 0.0}; }
inline std::vector<double> default_ball_attributes() {
  return {0.0, 0.0, 0.0, 0.0, 0.5, 0.7, 10.0};
}

struct SpawnSpec {
  std::string class_id;
  std::vector<double> attributes;
  bool active = true;
  Placement placement;
};

struct ScheduleEvent {
  int episode = 0;
  bool is_spawn = true;
  SpawnSpec spawn;          // spawn only
  long long object_id = -1; // remove only
};

// A scenario: the initial scene, episode settings and optional add/remove
// schedule. Wall and basket placements approximate the paper's figures;
// the exact constants here are artifact choices.
struct Scenario {
  std::string name;
  std::vector<SpawnSpec> initial;
  EpisodeConfig episode;
  std::vector<ScheduleEvent> schedule;
  int default_episodes = 2000;
};

inline Placement rotating_wall_placement() {
  Placement p;
  p.anchor = {140.0, 300.0};
  p.half_length = 75.0;
  return p;
}

inline Placement arc_wall_placement() {
  Placement p;
  p.anchor = {150.0, 240.0};
  p.radius = 45.0;
  p.span = 2.0;
  p.span_center = M_PI / 2.0;
  return p;
}

inline std::vector<std::string> scenario_names() {
  return {"single-rotating-wall", "single-arc-wall", "two-rotating-walls",
          "two-arc-walls", "add-remove-arc-walls"};
}

inline Scenario scenario_by_name(const std::string& name) {
  Scenario sc;
  sc.name = name;
  const SpawnSpec ball{"neutral-ball", default_ball_attributes(), false, {}};
  auto wall = [](const std::string& cls, Vec2 anchor) {
    SpawnSpec s;
    s.class_id = cls;
    s.attributes = default_wall_attributes();
    s.active = true;
    if (cls == "rotating-wall") {
      s.placement = rotating_wall_placement();
    } else {
      s.placement = arc_wall_placement();
    }
    s.placement.anchor = anchor;
    return s;
  };

  if (name == "single-rotating-wall") {
    sc.initial = {ball, wall("rotating-wall", {140.0, 300.0})};
    sc.episode.spawn_x_lo = 90.0;
    sc.episode.spawn_x_hi = 190.0;
    sc.default_episodes = 2000;
  } else if (name == "single-arc-wall") {
    sc.initial = {ball, wall("arc-wall", {150.0, 240.0})};
    sc.episode.spawn_x_lo = 110.0;
    sc.episode.spawn_x_hi = 190.0;
    sc.default_episodes = 2000;
  } else if (name == "two-rotating-walls") {
    sc.initial = {ball, wall("rotating-wall", {140.0, 300.0}),
                  wall("rotating-wall", {360.0, 300.0})};
    sc.episode.spawn_x_lo = 80.0;
    sc.episode.spawn_x_hi = 420.0;
    sc.default_episodes = 2000;
  } else if (name == "two-arc-walls") {
    sc.initial = {ball, wall("arc-wall", {150.0, 240.0}),
                  wall("arc-wall", {350.0, 240.0})};
    sc.episode.spawn_x_lo = 100.0;
    sc.episode.spawn_x_hi = 400.0;
    sc.default_episodes = 2000;
  } else if (name == "add-remove-arc-walls") {
    sc.initial = {ball, wall("arc-wall", {150.0, 240.0})};
    sc.episode.spawn_x_lo = 100.0;
    sc.episode.spawn_x_hi = 400.0;
    sc.default_episodes = 5000;
    ScheduleEvent e1{1000, true, wall("arc-wall", {350.0, 240.0}), -1};
    ScheduleEvent e2{2000, true, wall("arc-wall", {150.0, 360.0}), -1};
    ScheduleEvent e3{3000, true, wall("arc-wall", {350.0, 360.0}), -1};
    // objects get ids in spawn order: ball=0, first wall=1, adds=2,3,4
    ScheduleEvent r1{4000, false, {}, 2};
    ScheduleEvent r2{4000, false, {}, 3};
    sc.schedule = {e1, e2, e3, r1, r2};
  } else {
    throw ConfigError("unknown scenario: " + name);
  }
  return sc;
}

inline Scene build_scene(const Scenario& sc,
                         std::shared_ptr<ClassRegistry> registry, Rng& rng,
                         const QHyper& q_hyper, std::size_t trust_window = 20,
                         double trust_threshold = 0.25) {
  Scene scene(std::move(registry), q_hyper);
  scene.set_trust_params(trust_window, trust_threshold);
  for (const auto& spec : sc.initial)
    scene.spawn_object(spec.class_id, spec.attributes, spec.active, rng,
                       spec.placement);
  return scene;
}

// --- reward-free offline pretraining ---------------------------------------

struct PretrainConfig {
  PhysicsConfig physics;
  Placement placement;  // canonical placement for the class
  int fit_epochs = 300;
  TransitionHyper hyper;
  double max_trial_seconds = 3.0;
};

inline PretrainConfig default_pretrain_config(const std::string& class_id) {
  PretrainConfig cfg;
  cfg.placement = class_id == "arc-wall" ? arc_wall_placement()
                                         : rotating_wall_placement();
  cfg.placement.anchor = {250.0, 250.0};
  if (class_id == "arc-wall") cfg.hyper.velocity_range = 1500.0;
  return cfg;
}

// Collects (pre, post) pairs by raining randomized balls onto a single
// wall with randomized attributes, then fits the class transition model.
// No reward is ever computed on this path.
inline TransitionModel pretrain_offline(const ObjectClass& cls,
                                        std::size_t n_interactions,
                                        const PretrainConfig& cfg, Rng& rng,
                                        TransitionFitReport* report = nullptr) {
  if (n_interactions == 0) throw Error("n_interactions must be > 0");
  TransitionDataset dataset;
  TransitionModel model = [&] {
    auto ranges = context_ranges_for(cls);
    const std::size_t dim = ranges.size();
    return TransitionModel(cls.class_id, dim, std::move(ranges),
                           cfg.hyper, rng);
  }();

  while (dataset.size() < n_interactions) {
    World world;
    world.cfg = cfg.physics;
    // randomized wall
    std::vector<double> wall_attrs;
    for (const auto& e : cls.schema.entries())
      wall_attrs.push_back(rng.uniform(e.lo, e.hi));
    ObjectInstance tmp;
    tmp.attributes = wall_attrs;
    tmp.placement = cfg.placement;
    WallBody body;
    body.geom = tmp.geometry(cls);
    world.walls.push_back(body);
    // randomized ball
    world.ball.friction = rng.uniform(0.4, 0.9);
    world.ball.elasticity = rng.uniform(0.4, 0.9);
    world.ball.mass = rng.uniform(5.0, 25.0);
    const double reach = cls.body == BodyKind::Arc
                             ? cfg.placement.radius + 60.0
                             : cfg.placement.half_length + 20.0;
    world.ball.pos = {cfg.placement.anchor.x + rng.uniform(-reach, reach),
                      cfg.placement.anchor.y + rng.uniform(120.0, 220.0)};
    world.ball.vx = rng.uniform(-250.0, 250.0);
    world.ball.vy = rng.uniform(-350.0, 0.0);
    world.ball.spin = rng.uniform(-50.0, 50.0);
    world.ball.sync_theta();
    world.reset_tracking();

    std::vector<double> pre4;
    InteractionContext ctx;
    World::PreResolveHook pre_hook = [&](int wi, const BallState& pre) {
      const Contact c = contact_probe(pre, world.walls[0].geom);
      pre4 = pre.state4();
      ctx.ball_friction = pre.friction;
      ctx.ball_elasticity = pre.elasticity;
      ctx.ball_mass = pre.mass;
      ctx.wall_attributes = wall_attrs;
      ctx.normal_cos = c.normal.x;
      ctx.normal_sin = c.normal.y;
      ctx.tangent_coord = c.tangent_coord;
      (void)wi;
    };
    World::PostResolveHook post_hook = [&](int, const BallState& post) {
      if (dataset.size() >= n_interactions) return;
      dataset.record_interaction(
          pre4, ctx.to_vector(),
          PostInteractionState{post.vx, post.vy, post.spin, post.theta});
    };
    while (!world.done && world.time < cfg.max_trial_seconds &&
           dataset.size() < n_interactions)
      world.step(cfg.physics.dt, pre_hook, post_hook);
  }

  model.fit(dataset, cfg.fit_epochs, rng, report);
  return model;
}

}  // namespace paprl

#endif  // PAPRL_SCENARIO_HPP

#ifndef PAPRL_EPISODE_HPP
#define PAPRL_EPISODE_HPP

#include <functional>
#include <memory>
#include <vector>

#include "paprl/errors.hpp"
#include "paprl/object_model.hpp"
#include "paprl/physics.hpp"
#include "paprl/rng.hpp"
#include "paprl/transition_model.hpp"

namespace paprl {

struct EpisodeConfig {
  PhysicsConfig physics;
  double spawn_x_lo = 120.0;
  double spawn_x_hi = 260.0;
  double spawn_y = 460.0;
  double spawn_vx_lo = -40.0;
  double spawn_vx_hi = 40.0;
  double spawn_spin_lo = -5.0;
  double spawn_spin_hi = 5.0;
  bool compute_episode_reward = true;  // off for reward-free pretraining
};

// Asked once per active object per episode, at its first contact with the
// ball, before the collision is resolved.
using PolicyHook = std::function<std::vector<double>(
    long long object_id, const BallState& pre, const InteractionContext& ctx)>;

// Runs one "wait and see" episode: each active object commits one action
// at interaction time; every later contact with it uses its now-fixed
// attributes and the null action.
inline EpisodeRecord run_episode(Scene& scene, const PolicyHook& policy,
                                 const EpisodeConfig& config, Rng& rng) {
  if (scene.n_active() == 0) throw NoActiveObjects();

  std::shared_ptr<ObjectInstance> ball_inst;
  std::vector<std::shared_ptr<ObjectInstance>> wall_insts;
  std::vector<std::shared_ptr<ObjectClass>> wall_classes;
  for (const auto& inst : scene.instances()) {
    auto cls = scene.registry().find(inst->class_id);
    if (cls->body == BodyKind::Ball) {
      if (ball_inst) throw Error("scene must contain exactly one ball");
      ball_inst = inst;
    } else {
      wall_insts.push_back(inst);
      wall_classes.push_back(cls);
    }
  }
  if (!ball_inst) throw Error("scene must contain exactly one ball");

  World world;
  world.cfg = config.physics;
  world.ball.friction = ball_inst->attributes[4];
  world.ball.elasticity = ball_inst->attributes[5];
  world.ball.mass = ball_inst->attributes[6];
  world.ball.pos = {rng.uniform(config.spawn_x_lo, config.spawn_x_hi),
                    config.spawn_y};
  world.ball.vx = rng.uniform(config.spawn_vx_lo, config.spawn_vx_hi);
  world.ball.vy = 0.0;
  world.ball.spin = rng.uniform(config.spawn_spin_lo, config.spawn_spin_hi);
  world.ball.sync_theta();

  for (std::size_t i = 0; i < wall_insts.size(); ++i) {
    auto& inst = *wall_insts[i];
    inst.attributes = inst.default_attributes;  // pre-action state
    WallBody body;
    body.object_id = inst.object_id;
    body.geom = inst.geometry(*wall_classes[i]);
    body.active = inst.active;
    world.walls.push_back(body);
  }
  world.reset_tracking();

  EpisodeRecord record;
  InteractionRecord* open_record = nullptr;

  World::PreResolveHook pre_hook = [&](int wi, const BallState& pre) {
    auto& inst = *wall_insts[static_cast<std::size_t>(wi)];
    const Contact c = contact_probe(pre, world.walls[static_cast<std::size_t>(wi)].geom);
    InteractionRecord rec;
    rec.object_id = inst.object_id;
    rec.pre4 = pre.state4();
    rec.sim_time = world.time;
    rec.wall_attributes_pre = inst.attributes;
    rec.wall_attributes_applied = inst.attributes;
    rec.normal_cos = c.normal.x;
    rec.normal_sin = c.normal.y;
    rec.tangent_coord = c.tangent_coord;
    if (inst.active && !inst.has_acted_this_episode) {
      InteractionContext ctx;
      ctx.ball_friction = pre.friction;
      ctx.ball_elasticity = pre.elasticity;
      ctx.ball_mass = pre.mass;
      ctx.wall_attributes = inst.attributes;
      ctx.normal_cos = c.normal.x;
      ctx.normal_sin = c.normal.y;
      ctx.tangent_coord = c.tangent_coord;
      auto action = policy(inst.object_id, pre, ctx);
      action = scene.registry().get(inst.class_id).action_spec.clamp(
          std::move(action));
      const auto& cls = scene.registry().get(inst.class_id);
      for (std::size_t d = 0; d < action.size(); ++d)
        inst.attributes[static_cast<std::size_t>(cls.actuated_indices[d])] =
            action[d];
      inst.has_acted_this_episode = true;
      world.walls[static_cast<std::size_t>(wi)].geom =
          inst.geometry(*wall_classes[static_cast<std::size_t>(wi)]);
      world.walls[static_cast<std::size_t>(wi)].has_acted = true;
      rec.action = std::move(action);
      rec.wall_attributes_applied = inst.attributes;
      rec.policy_called = true;
    }
    record.interactions.push_back(std::move(rec));
    open_record = &record.interactions.back();
  };

  World::PostResolveHook post_hook = [&](int, const BallState& post) {
    if (!open_record) return;
    open_record->post = {post.vx, post.vy, post.spin, post.theta};
    open_record = nullptr;
  };

  while (!world.done) {
    world.step(config.physics.dt, pre_hook, post_hook);
    ++record.frames;
  }

  record.outcome = world.outcome;
  record.fault = world.fault;
  record.min_basket_distance = world.min_basket_distance;
  record.duration = world.time;
  record.reward = config.compute_episode_reward
                      ? compute_reward(EpisodeOutcomeInfo{
                            world.outcome, world.min_basket_distance})
                      : 0.0;

  // sync the ball instance's dynamic attributes with the final world state
  ball_inst->attributes[0] = world.ball.vx;
  ball_inst->attributes[1] = world.ball.vy;
  ball_inst->attributes[2] = world.ball.spin;
  ball_inst->attributes[3] = world.ball.theta;

  scene.reset_has_acted();
  return record;
}

}  // namespace paprl

#endif  // PAPRL_EPISODE_HPP

#ifndef PAPRL_PHYSICS_HPP
#define PAPRL_PHYSICS_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "paprl/errors.hpp"

namespace paprl {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
  Vec2 normalized() const {
    const double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
  }
  Vec2 perp() const { return {-y, x}; }
};

// Arena, integrator and contact constants. Defaults give visually
// plausible trajectories and sub-millisecond episode stepping.
struct PhysicsConfig {
  double width = 500.0;
  double height = 500.0;
  double gravity = 300.0;  // units/s^2, downward
  double ball_radius = 10.0;
  double dt = 1.0 / 60.0;
  double time_limit = 10.0;  // seconds
  double contact_epsilon = 0.5;
  double basket_center_x = 250.0;
  double basket_width = 40.0;   // cup opening on the floor
  double basket_height = 20.0;  // vertical extent of the cup region
  double spin_coupling = 0.1;   // kappa in the contact-spin rule

  Vec2 basket_center() const { return {basket_center_x, 0.0}; }
};

struct BallState {
  Vec2 pos;
  double vx = 0.0;
  double vy = 0.0;
  double spin = 0.0;   // angular velocity, rad/s
  double theta = 0.0;  // movement angle, derived from (vx, vy)
  double friction = 0.5;
  double elasticity = 0.7;
  double mass = 10.0;

  // Movement angle stays consistent with the velocity whenever moving.
  void sync_theta() {
    if (vx != 0.0 || vy != 0.0) theta = std::atan2(vy, vx);
  }

  double speed() const { return std::sqrt(vx * vx + vy * vy); }

  // The 4-vector the transition models work on.
  std::vector<double> state4() const { return {vx, vy, spin, theta}; }

  // Full attribute vector per the neutral-ball schema ordering.
  std::vector<double> attributes() const {
    return {vx, vy, spin, theta, friction, elasticity, mass};
  }
};

struct PostInteractionState {
  double vx = 0.0;
  double vy = 0.0;
  double spin = 0.0;
  double theta = 0.0;

  std::vector<double> state4() const { return {vx, vy, spin, theta}; }
};

struct WallGeometry {
  enum class Kind { Segment, Arc };
  Kind kind = Kind::Segment;
  Vec2 anchor;                // segment midpoint / arc center
  double half_length = 80.0;  // segment only
  double orientation = 0.0;   // segment tilt, rad
  double radius = 50.0;       // arc only
  double span = 1.0;          // arc angular span, rad
  double span_center = 1.5707963267948966;  // arc faces up by default
  double sweep_velocity = 0.0;  // arc surface angular velocity, rad/s
  double friction = 0.5;
  double elasticity = 0.7;
};

// Geometric contact query result. normal points from the wall surface
// toward the ball center; tangent_coord is the surface coordinate of the
// contact point, normalized to [-1, 1].
struct Contact {
  bool valid = false;
  double distance = 0.0;
  Vec2 normal;
  Vec2 surface_velocity;
  double tangent_coord = 0.0;
};

inline Contact contact_probe(const BallState& ball, const WallGeometry& wall) {
  Contact c;
  if (wall.kind == WallGeometry::Kind::Segment) {
    const Vec2 axis{std::cos(wall.orientation), std::sin(wall.orientation)};
    double along = (ball.pos - wall.anchor).dot(axis);
    if (along > wall.half_length) along = wall.half_length;
    if (along < -wall.half_length) along = -wall.half_length;
    const Vec2 closest = wall.anchor + axis * along;
    const Vec2 offset = ball.pos - closest;
    c.valid = true;
    c.distance = offset.norm();
    c.normal = c.distance > 0.0 ? offset.normalized() : axis.perp();
    c.tangent_coord = wall.half_length > 0.0 ? along / wall.half_length : 0.0;
    return c;
  }
  // Arc: a section of a circular shell spinning about its own center, so
  // the geometry is time-invariant and the spin shows up only as surface
  // velocity at the contact point.
  const Vec2 rel = ball.pos - wall.anchor;
  const double rho = rel.norm();
  double phi = std::atan2(rel.y, rel.x);
  double delta = phi - wall.span_center;
  while (delta > M_PI) delta -= 2.0 * M_PI;
  while (delta < -M_PI) delta += 2.0 * M_PI;
  const double half_span = wall.span * 0.5;
  if (delta > half_span) delta = half_span;
  if (delta < -half_span) delta = -half_span;
  const double phi_c = wall.span_center + delta;
  const Vec2 radial{std::cos(phi_c), std::sin(phi_c)};
  const Vec2 closest = wall.anchor + radial * wall.radius;
  const Vec2 offset = ball.pos - closest;
  c.valid = true;
  c.distance = offset.norm();
  c.normal = c.distance > 0.0 ? offset.normalized() : radial;
  c.tangent_coord = half_span > 0.0 ? delta / half_span : 0.0;
  // omega x r for a shell spinning about its center
  c.surface_velocity = Vec2{-radial.y, radial.x} * (wall.sweep_velocity *
                                                    wall.radius);
  return c;
}

inline bool detect_interaction(const BallState& ball, const WallGeometry& wall,
                               const PhysicsConfig& cfg) {
  const Contact c = contact_probe(ball, wall);
  return c.valid && c.distance <= cfg.ball_radius + cfg.contact_epsilon;
}

// Single-impulse contact: normal component reflected and scaled by the
// combined restitution, tangential component scaled by (1 - mu_eff) in the
// surface frame, spin coupled to the tangential slip.
inline PostInteractionState resolve_collision_unchecked(
    const BallState& ball, const WallGeometry& wall, const PhysicsConfig& cfg) {
  const Contact c = contact_probe(ball, wall);
  const Vec2 n = c.normal;
  const Vec2 t = n.perp();
  const Vec2 v{ball.vx, ball.vy};
  const Vec2 v_rel = v - c.surface_velocity;
  const double vn = v_rel.dot(n);
  const double vt = v_rel.dot(t);
  const double e_eff = ball.elasticity * wall.elasticity;
  const double mu_eff = ball.friction * wall.friction;
  const double vn_out = vn < 0.0 ? -e_eff * vn : vn;
  const double vt_out = (1.0 - mu_eff) * vt;
  const Vec2 v_out = n * vn_out + t * vt_out + c.surface_velocity;
  PostInteractionState post;
  post.vx = v_out.x;
  post.vy = v_out.y;
  post.spin = ball.spin * (1.0 - mu_eff) +
              cfg.spin_coupling * vt / cfg.ball_radius;
  post.theta = (post.vx != 0.0 || post.vy != 0.0)
                   ? std::atan2(post.vy, post.vx)
                   : ball.theta;
  return post;
}

inline PostInteractionState resolve_collision(const BallState& ball,
                                              const WallGeometry& wall,
                                              const PhysicsConfig& cfg) {
  if (!detect_interaction(ball, wall, cfg)) throw ContactFault();
  return resolve_collision_unchecked(ball, wall, cfg);
}

enum class EventType { Interaction, BasketEntry, BoundaryExit };

struct Event {
  EventType type;
  int wall_index = -1;  // Interaction only
};

enum class Outcome { InBasket, OutOfBounds, TimeLimit };

inline std::string outcome_name(Outcome o) {
  switch (o) {
    case Outcome::InBasket: return "InBasket";
    case Outcome::OutOfBounds: return "OutOfBounds";
    default: return "TimeLimit";
  }
}

// Instrumentation hook: counts every reward evaluation so reward-freedom
// of the offline pretraining path can be checked.
inline std::atomic<long>& reward_call_count() {
  static std::atomic<long> count{0};
  return count;
}

struct EpisodeOutcomeInfo {
  Outcome outcome = Outcome::TimeLimit;
  double min_basket_distance = 0.0;
};

inline double compute_reward(const EpisodeOutcomeInfo& info) {
  reward_call_count().fetch_add(1, std::memory_order_relaxed);
  if (info.outcome == Outcome::InBasket) return 1.0;
  // Eq.-style 1/min(d), clamped into [0,1]; distances under one unit would
  // otherwise exceed the stated maximum.
  if (info.min_basket_distance <= 1.0) return 1.0;
  return 1.0 / info.min_basket_distance;
}

struct WallBody {
  long long object_id = -1;
  WallGeometry geom;
  bool active = false;
  bool has_acted = false;
};

// One ball, a set of walls, a basket. Single-threaded; many worlds may run
// concurrently with independent rng streams.
class World {
 public:
  PhysicsConfig cfg;
  BallState ball;
  std::vector<WallBody> walls;
  double time = 0.0;
  bool done = false;
  bool fault = false;
  Outcome outcome = Outcome::TimeLimit;
  double min_basket_distance = 0.0;

  // Called at contact start, before resolution, with the pre-contact ball
  // state; gives the episode loop a chance to apply the wall's action.
  using PreResolveHook =
      std::function<void(int wall_index, const BallState& pre)>;
  // Called right after a contact has been resolved, with the post state.
  using PostResolveHook =
      std::function<void(int wall_index, const BallState& post)>;

  void reset_tracking() {
    time = 0.0;
    done = false;
    fault = false;
    outcome = Outcome::TimeLimit;
    contact_flags_.assign(walls.size(), false);
    min_basket_distance = (ball.pos - cfg.basket_center()).norm();
  }

  std::vector<Event> step(double dt, const PreResolveHook& hook = nullptr,
                          const PostResolveHook& post_hook = nullptr) {
    if (dt <= 0.0) throw Error("dt must be > 0");
    std::vector<Event> events;
    if (done) return events;
    if (contact_flags_.size() != walls.size())
      contact_flags_.assign(walls.size(), false);

    // semi-implicit Euler
    ball.vy -= cfg.gravity * dt;
    ball.pos.x += ball.vx * dt;
    ball.pos.y += ball.vy * dt;
    ball.sync_theta();
    time += dt;

    for (std::size_t i = 0; i < walls.size(); ++i) {
      const Contact c = contact_probe(ball, walls[i].geom);
      const double reach = cfg.ball_radius + cfg.contact_epsilon;
      if (c.distance <= reach) {
        const Vec2 v_rel =
            Vec2{ball.vx, ball.vy} - c.surface_velocity;
        const bool approaching = v_rel.dot(c.normal) < 0.0;
        if (!contact_flags_[i] && approaching) {
          contact_flags_[i] = true;
          if (hook) hook(static_cast<int>(i), ball);
          // the hook may have re-tilted the wall, so resolve against the
          // updated geometry without re-running detection
          const PostInteractionState post =
              resolve_collision_unchecked(ball, walls[i].geom, cfg);
          ball.vx = post.vx;
          ball.vy = post.vy;
          ball.spin = post.spin;
          ball.theta = post.theta;
          // push out to the surface so one physical contact stays one event
          const Contact after = contact_probe(ball, walls[i].geom);
          const double pen = cfg.ball_radius - after.distance;
          if (pen > 0.0) {
            ball.pos.x += after.normal.x * pen;
            ball.pos.y += after.normal.y * pen;
          }
          if (post_hook) post_hook(static_cast<int>(i), ball);
          events.push_back({EventType::Interaction, static_cast<int>(i)});
        }
      } else if (c.distance > reach + cfg.contact_epsilon) {
        contact_flags_[i] = false;
      }
    }

    if (!std::isfinite(ball.pos.x) || !std::isfinite(ball.pos.y) ||
        !std::isfinite(ball.vx) || !std::isfinite(ball.vy) ||
        !std::isfinite(ball.spin)) {
      // simulation fault: abort as OutOfBounds with diagnostic flag
      fault = true;
      done = true;
      outcome = Outcome::OutOfBounds;
      events.push_back({EventType::BoundaryExit, -1});
      return events;
    }

    const double d = (ball.pos - cfg.basket_center()).norm();
    if (d < min_basket_distance) min_basket_distance = d;

    if (std::fabs(ball.pos.x - cfg.basket_center_x) <=
            cfg.basket_width * 0.5 &&
        ball.pos.y <= cfg.basket_height) {
      done = true;
      outcome = Outcome::InBasket;
      events.push_back({EventType::BasketEntry, -1});
      return events;
    }
    if (ball.pos.x < 0.0 || ball.pos.x > cfg.width || ball.pos.y < 0.0 ||
        ball.pos.y > cfg.height) {
      done = true;
      outcome = Outcome::OutOfBounds;
      events.push_back({EventType::BoundaryExit, -1});
      return events;
    }
    if (time >= cfg.time_limit) {
      done = true;
      outcome = Outcome::TimeLimit;
    }
    return events;
  }

 private:
  std::vector<bool> contact_flags_;
};

// One recorded ball/active-object interaction, with the contact context
// needed by the learned models.
struct InteractionRecord {
  long long object_id = -1;
  std::vector<double> pre4;    // [vx, vy, spin, theta] before contact
  std::vector<double> action;  // empty = null action
  PostInteractionState post;
  double sim_time = 0.0;
  bool policy_called = false;
  std::vector<double> wall_attributes_pre;      // acting object, pre-action
  std::vector<double> wall_attributes_applied;  // in effect at resolution
  double normal_cos = 0.0;
  double normal_sin = 0.0;
  double tangent_coord = 0.0;
};

struct EpisodeRecord {
  std::vector<InteractionRecord> interactions;
  double min_basket_distance = 0.0;
  Outcome outcome = Outcome::TimeLimit;
  double reward = 0.0;
  double duration = 0.0;
  int frames = 0;
  bool fault = false;

  nlohmann::json to_json() const {
    nlohmann::json ji = nlohmann::json::array();
    for (const auto& r : interactions) {
      ji.push_back({{"object_id", r.object_id},
                    {"pre", r.pre4},
                    {"action", r.action},
                    {"post", r.post.state4()},
                    {"t", r.sim_time},
                    {"policy_called", r.policy_called},
                    {"wall_attributes", r.wall_attributes_pre},
                    {"normal", {r.normal_cos, r.normal_sin}},
                    {"tangent_coord", r.tangent_coord}});
    }
    return {{"interactions", ji},
            {"min_basket_distance", min_basket_distance},
            {"outcome", outcome_name(outcome)},
            {"reward", reward},
            {"duration", duration},
            {"frames", frames},
            {"fault", fault}};
  }
};

inline double compute_reward(const EpisodeRecord& record) {
  return compute_reward(
      EpisodeOutcomeInfo{record.outcome, record.min_basket_distance});
}

}  // namespace paprl

#endif  // PAPRL_PHYSICS_HPP

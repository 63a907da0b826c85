// Acceptance gate: nine end-to-end criteria, one pass/fail line each.
// Criteria 7 and 8 run full experiment grids; seeds execute in parallel
// (each seed is fully isolated), so wall time stays inside the budgets.

#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <functional>
#include <numeric>
#include <thread>

#include "paprl/agents.hpp"
#include "paprl/harness.hpp"

using namespace paprl;
namespace fs = std::filesystem;

namespace {

void report(int criterion, const std::string& what, bool ok) {
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << criterion
            << ": " << what << std::endl;
  REQUIRE(ok);
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double final_window_mean(const std::vector<double>& rewards, std::size_t w) {
  std::vector<double> tail(rewards.end() - std::min(w, rewards.size()),
                           rewards.end());
  return mean(tail);
}

// Exact one-sided rank-sum (Mann-Whitney) p-value for H1: a > b, by full
// enumeration of the pooled relabelings. Fine for the 5-vs-5 seed sweeps
// used here (C(10,5) = 252 splits).
double rank_sum_p_greater(const std::vector<double>& a,
                          const std::vector<double>& b) {
  auto u_stat = [](const std::vector<double>& x, const std::vector<double>& y) {
    double u = 0.0;
    for (double xi : x)
      for (double yj : y) u += xi > yj ? 1.0 : (xi == yj ? 0.5 : 0.0);
    return u;
  };
  const double observed = u_stat(a, b);
  std::vector<double> pool(a);
  pool.insert(pool.end(), b.begin(), b.end());
  const std::size_t n = a.size(), total = pool.size();
  long ge = 0, all = 0;
  std::vector<std::size_t> pick(n);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t from,
                                                          std::size_t depth) {
    if (depth == n) {
      std::vector<double> x, y;
      std::vector<bool> used(total, false);
      for (std::size_t i : pick) { x.push_back(pool[i]); used[i] = true; }
      for (std::size_t i = 0; i < total; ++i)
        if (!used[i]) y.push_back(pool[i]);
      ++all;
      if (u_stat(x, y) >= observed - 1e-12) ++ge;
      return;
    }
    for (std::size_t i = from; i <= total - (n - depth); ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return static_cast<double>(ge) / static_cast<double>(all);
}

// Shared pretrained transition checkpoints: one per wall class, 5,000
// recorded collisions each, trained once and reused (in memory for the
// oracle checks, as files for the experiment runs).
struct SharedCheckpoints {
  std::map<std::string, TransitionModel> models;
  std::map<std::string, TransitionFitReport> reports;
  std::map<std::string, std::string> paths;
};

const SharedCheckpoints& shared_checkpoints() {
  static SharedCheckpoints cp = [] {
    SharedCheckpoints out;
    auto registry = make_standard_registry();
    const fs::path dir = fs::temp_directory_path() / "paprl_accept_ckpt";
    fs::create_directories(dir);
    for (const std::string id : {"rotating-wall", "arc-wall"}) {
      PretrainConfig cfg = default_pretrain_config(id);
      Rng rng(7);
      TransitionFitReport rep;
      TransitionModel model =
          pretrain_offline(registry->get(id), 5000, cfg, rng, &rep);
      const std::string path = (dir / (id + ".json")).string();
      std::ofstream(path) << model.to_json().dump();
      out.reports.emplace(id, rep);
      out.models.emplace(id, std::move(model));
      out.paths.emplace(id, path);
    }
    return out;
  }();
  return cp;
}

struct Cell {
  std::string scenario;
  AgentKind agent;
  std::uint64_t seed;
  int episodes;
  bool byte_check = false;  // snapshot uninvolved models around events
  // results
  double final_mean = 0.0;
  bool ok = false;
  std::string issue;
};

void run_cell(Cell& cell) {
  try {
    RunConfig cfg;
    cfg.scenario = cell.scenario;
    cfg.agent = cell.agent;
    cfg.episodes = cell.episodes;
    cfg.seeds = {cell.seed};
    cfg.quiet = true;
    const fs::path dir = fs::temp_directory_path() / "paprl_accept" /
                         (cell.scenario + "_" + agent_kind_name(cell.agent) +
                          "_" + std::to_string(cell.seed));
    fs::create_directories(dir);
    cfg.output_dir = dir.string();
    if (cell.agent == AgentKind::PaPOffline)
      cfg.transition_checkpoints = shared_checkpoints().paths;

    ExperimentRunner runner(std::move(cfg));
    std::map<long long, std::string> snapshot;
    if (cell.byte_check) {
      runner.observer = [&](const Scene& scene, const ScheduleEvent& ev,
                            bool before) {
        if (before) {
          snapshot.clear();
          for (const auto& inst : scene.instances())
            if (inst->active)
              snapshot[inst->object_id] = inst->models.own_q.to_json().dump();
        } else {
          for (const auto& inst : scene.instances()) {
            if (!inst->active) continue;
            auto it = snapshot.find(inst->object_id);
            if (it == snapshot.end()) continue;  // the spawned object
            if (!ev.is_spawn && inst->object_id == ev.object_id) continue;
            if (inst->models.own_q.to_json().dump() != it->second)
              cell.issue = "model of uninvolved object " +
                           std::to_string(inst->object_id) +
                           " changed across a schedule event";
          }
        }
      };
    }
    const RunSummary summary = runner.run();
    cell.final_mean = final_window_mean(summary.seeds.at(0).rewards, 500);
    cell.ok = cell.issue.empty();
  } catch (const std::exception& e) {
    cell.issue = e.what();
    cell.ok = false;
  }
}

void run_cells(std::vector<Cell>& cells) {
  std::atomic<std::size_t> next{0};
  const std::size_t n_threads =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()),
                            cells.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cells.size(); i = next++)
        run_cell(cells[i]);
    });
  for (auto& th : pool) th.join();
}

std::vector<double> collect(const std::vector<Cell>& cells, AgentKind agent) {
  std::vector<double> out;
  for (const auto& c : cells)
    if (c.agent == agent) out.push_back(c.final_mean);
  return out;
}

}  // namespace

TEST_CASE("criterion 1: reward function exactness") {
  EpisodeOutcomeInfo in_basket{Outcome::InBasket, 0.0};
  EpisodeOutcomeInfo near{Outcome::TimeLimit, 4.0};
  bool ok = compute_reward(in_basket) == 1.0 && compute_reward(near) == 0.25;

  // clamp bound over 1,000 random episodes with a random-action policy
  auto registry = make_standard_registry();
  Scenario sc = scenario_by_name("single-rotating-wall");
  Rng setup(31);
  Scene scene = build_scene(sc, registry, setup, QHyper{});
  Rng policy_rng(32);
  PolicyHook policy = [&](long long, const BallState&,
                          const InteractionContext&) {
    return std::vector<double>{policy_rng.uniform(-kWallTiltLimit,
                                                  kWallTiltLimit)};
  };
  Rng ep_rng(33);
  for (int e = 0; e < 1000 && ok; ++e) {
    const EpisodeRecord rec = run_episode(scene, policy, sc.episode, ep_rng);
    ok = rec.reward >= 0.0 && rec.reward <= 1.0;
  }
  report(1, "in-basket reward 1.0, min distance 4 gives 0.25, reward within "
            "[0, 1] over 1000 random episodes",
         ok);
}

TEST_CASE("criterion 2: trust factor exactness") {
  auto tf_of = [](std::vector<double> residuals) {
    TrustState t;
    t.window = residuals.size();
    for (double r : residuals) t.push_residual(r);
    return t.trust_factor();
  };
  const bool ok = tf_of(std::vector<double>(20, 0.0)) == 1.0 &&
                  tf_of({1.0}) == 0.5 &&
                  tf_of({0.25, 0.25, 0.25, 0.25}) == 0.5;
  report(2, "TF(all-zero window) = 1, TF(K=1, r=1) = 0.5, TF(K=4, sum=1) "
            "= 0.5, exactly",
         ok);
}

TEST_CASE("criterion 3: gradient correctness on 100 random networks") {
  Rng rng(41);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int in = 1 + static_cast<int>(rng.uniform_index(5));
    const int hidden = 2 + static_cast<int>(rng.uniform_index(15));
    const int out = 1 + static_cast<int>(rng.uniform_index(3));
    Mlp net({in, hidden, out});
    net.init_uniform(rng, 0.8);
    std::vector<double> input(in), target(out);
    for (auto& x : input) x = rng.uniform(-2.0, 2.0);
    for (auto& y : target) y = rng.uniform(-2.0, 2.0);
    worst = std::max(worst, net.gradient_check(input, target));
  }
  report(3, "analytic vs central-difference gradients agree within 1e-4 "
            "(worst relative error " + format_double(worst) + ")",
         worst < 1e-4);
}

TEST_CASE("criterion 4: physics oracle properties") {
  bool ok = true;

  // dissipation over 10,000 random collisions, including spinning arcs:
  // lab-frame speed can only grow by what the moving surface feeds in
  Rng rng(51);
  PhysicsConfig cfg;
  for (int trial = 0; trial < 10000 && ok; ++trial) {
    BallState ball;
    ball.friction = rng.uniform(0.4, 0.9);
    ball.elasticity = rng.uniform(0.4, 0.9);
    ball.spin = rng.uniform(-100.0, 100.0);
    WallGeometry wall;
    Vec2 surface_pt;
    if (rng.uniform() < 0.5) {
      wall.kind = WallGeometry::Kind::Segment;
      wall.anchor = {250.0, 250.0};
      wall.half_length = rng.uniform(40.0, 120.0);
      wall.orientation = rng.uniform(-M_PI, M_PI);
      const Vec2 axis{std::cos(wall.orientation), std::sin(wall.orientation)};
      surface_pt = wall.anchor +
                   axis * rng.uniform(-wall.half_length, wall.half_length);
    } else {
      wall.kind = WallGeometry::Kind::Arc;
      wall.anchor = {250.0, 250.0};
      wall.radius = rng.uniform(30.0, 80.0);
      wall.span = rng.uniform(0.5, 3.0);
      wall.span_center = rng.uniform(-M_PI, M_PI);
      wall.sweep_velocity = rng.uniform(-50.0, 50.0);
      const double phi =
          wall.span_center + rng.uniform(-wall.span / 2, wall.span / 2);
      surface_pt =
          wall.anchor + Vec2{std::cos(phi), std::sin(phi)} * wall.radius;
    }
    wall.friction = rng.uniform(0.4, 0.9);
    wall.elasticity = rng.uniform(0.4, 0.9);
    const double angle = rng.uniform(-M_PI, M_PI);
    ball.pos = surface_pt +
               Vec2{std::cos(angle), std::sin(angle)} * (cfg.ball_radius - 0.1);
    ball.vx = rng.uniform(-400.0, 400.0);
    ball.vy = rng.uniform(-400.0, 400.0);
    ball.sync_theta();
    const auto post = resolve_collision_unchecked(ball, wall, cfg);
    const double surface_speed =
        wall.kind == WallGeometry::Kind::Arc
            ? std::fabs(wall.sweep_velocity) * wall.radius
            : 0.0;
    ok = std::hypot(post.vx, post.vy) <=
         ball.speed() + 2.0 * surface_speed + 1e-9;
  }

  // perfect-elastic frictionless specular reflection within 1e-9
  if (ok) {
    BallState ball;
    ball.pos = {240.0, 210.5};
    ball.vx = 37.0;
    ball.vy = -81.0;
    ball.friction = 0.0;
    ball.elasticity = 1.0;
    WallGeometry wall;
    wall.kind = WallGeometry::Kind::Segment;
    wall.anchor = {250.0, 200.0};
    wall.half_length = 100.0;
    wall.orientation = 0.0;
    wall.friction = 0.7;
    wall.elasticity = 1.0;
    const auto post = resolve_collision(ball, wall, cfg);
    ok = std::fabs(post.vx - 37.0) < 1e-9 && std::fabs(post.vy - 81.0) < 1e-9;
  }

  // determinism: byte-identical episode records per seed
  if (ok) {
    auto one = [](std::uint64_t seed) {
      auto registry = make_standard_registry();
      Scenario sc = scenario_by_name("two-arc-walls");
      Rng setup(seed);
      Scene scene = build_scene(sc, registry, setup, QHyper{});
      Rng policy_rng(seed + 1);
      PolicyHook policy = [&](long long, const BallState&,
                              const InteractionContext&) {
        return std::vector<double>{policy_rng.uniform(-50.0, 50.0)};
      };
      Rng ep_rng(seed + 2);
      nlohmann::json out = nlohmann::json::array();
      for (int e = 0; e < 20; ++e)
        out.push_back(run_episode(scene, policy, sc.episode, ep_rng).to_json());
      return out.dump();
    };
    ok = one(61) == one(61);
  }
  report(4, "10000-collision dissipation bound, specular reflection within "
            "1e-9, byte-identical episode records per seed",
         ok);
}

TEST_CASE("criterion 5: transition learning from 5000 collisions per class") {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& cp = shared_checkpoints();
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  bool ok = elapsed < 2.0 * 60.0 * 2;  // < 2 min per class
  std::string detail;
  for (const auto& [id, rep] : cp.reports) {
    detail += " " + id + " R2 = [";
    for (std::size_t d = 0; d < rep.heldout_r2.size(); ++d) {
      if (rep.heldout_r2[d] <= 0.9) ok = false;
      detail += (d ? ", " : "") + format_double(rep.heldout_r2[d]);
    }
    detail += "]";
  }
  report(5, "held-out per-dimension R2 > 0.9 for both wall classes:" + detail,
         ok);
}

TEST_CASE("criterion 6: trust swap loop under forced residuals") {
  Rng rng(71);
  auto registry = make_standard_registry();
  const ObjectClass& cls = registry->get("rotating-wall");
  RewardModelSlot slot{make_q_model(cls, QHyper{}, rng)};
  slot.class_q = std::make_shared<const QModel>(
      make_q_model(cls, QHyper{}, rng));
  slot.trust.window = 20;
  slot.trust.threshold = 0.25;

  bool ok = true;
  const QModel* before = &slot.active_model();
  ok = ok && before == &slot.own_q;

  // one full window of residuals forcing TF = 1/(1+4) <= h: exactly one
  // swap fires at the window boundary and the active handle flips
  for (std::size_t i = 0; i < slot.trust.window; ++i) {
    slot.trust.push_residual(0.2);
    const bool swapped = slot.maybe_swap();
    ok = ok && (swapped == (i + 1 == slot.trust.window));
  }
  ok = ok && slot.trust.swaps == 1 && slot.trust.evaluations == 1;
  ok = ok && &slot.active_model() != before;
  ok = ok && slot.trust.in_use == ModelInUse::ClassModel;
  ok = ok && slot.trust.residuals.empty();  // clean window for the newcomer

  // next window forces the swap straight back
  for (std::size_t i = 0; i < slot.trust.window; ++i) {
    slot.trust.push_residual(0.5);
    slot.maybe_swap();
  }
  ok = ok && slot.trust.swaps == 2 && slot.trust.evaluations == 2;
  ok = ok && &slot.active_model() == before;

  // a healthy window evaluates without swapping
  for (std::size_t i = 0; i < slot.trust.window; ++i) {
    slot.trust.push_residual(0.01);
    slot.maybe_swap();
  }
  ok = ok && slot.trust.swaps == 2 && slot.trust.evaluations == 3;
  report(6, "TF <= h triggers exactly one swap per evaluation window and "
            "the active model handle flips",
         ok);
}

TEST_CASE("criterion 7: learning-curve ordering on single-rotating-wall") {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Cell> cells;
  for (AgentKind agent :
       {AgentKind::PaPOffline, AgentKind::PaPOnline, AgentKind::Dqn})
    for (std::uint64_t seed : {1, 2, 3, 5, 6})
      cells.push_back({"single-rotating-wall", agent, seed, 2000});
  shared_checkpoints();  // pretrain outside the threaded region
  run_cells(cells);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  bool ok = true;
  for (const auto& c : cells)
    if (!c.ok) { ok = false; std::cerr << "cell failed: " << c.issue << "\n"; }
  const auto off = collect(cells, AgentKind::PaPOffline);
  const auto on = collect(cells, AgentKind::PaPOnline);
  const auto dqn = collect(cells, AgentKind::Dqn);
  const double p = rank_sum_p_greater(off, dqn);
  ok = ok && mean(off) >= mean(on) && mean(on) >= mean(dqn) && p < 0.05;
  ok = ok && elapsed < 15.0 * 60.0;
  report(7, "final-500 mean reward obeys offline " + format_double(mean(off)) +
            " >= online " + format_double(mean(on)) + " >= dqn " +
            format_double(mean(dqn)) + ", rank-sum p = " + format_double(p) +
            " < 0.05, in " + format_double(elapsed) + "s",
         ok);
}

TEST_CASE("criterion 8: add/remove schedule with model isolation") {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Cell> cells;
  for (AgentKind agent : {AgentKind::PaPOffline, AgentKind::MoDqn})
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
      Cell c{"add-remove-arc-walls", agent, seed, 5000};
      c.byte_check = agent == AgentKind::PaPOffline;
      cells.push_back(c);
    }
  shared_checkpoints();
  run_cells(cells);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  bool ok = true;
  for (const auto& c : cells)
    if (!c.ok) { ok = false; std::cerr << "cell failed: " << c.issue << "\n"; }
  const auto off = collect(cells, AgentKind::PaPOffline);
  const auto modqn = collect(cells, AgentKind::MoDqn);
  ok = ok && mean(off) >= mean(modqn);
  ok = ok && elapsed < 20.0 * 60.0;
  report(8, "schedule ran faultless with uninvolved models byte-identical "
            "across events, final-500 mean offline " +
            format_double(mean(off)) + " >= mo-dqn " +
            format_double(mean(modqn)) + ", in " + format_double(elapsed) +
            "s",
         ok);
}

TEST_CASE("criterion 9: zero-shot action for a new object of a known class") {
  auto registry = make_standard_registry();
  Scenario sc = scenario_by_name("single-rotating-wall");
  Rng setup(91);
  Scene scene = build_scene(sc, registry, setup, QHyper{});

  AgentParams params;
  PaPAgent agent(AgentKind::PaPOffline, params);
  agent.inject_transition_model(shared_checkpoints().models.at(
      "rotating-wall"));
  const long steps_at_injection =
      agent.transition_model("rotating-wall")->fit_steps();

  // a second wall of the already-pretrained class joins mid-run
  Rng spawn_rng(92);
  Placement p = rotating_wall_placement();
  p.anchor = {360.0, 300.0};
  auto newcomer = scene.spawn_object("rotating-wall",
                                     default_wall_attributes(), true,
                                     spawn_rng, p);

  Rng agent_rng(93);
  Rng ep_rng(94);
  bool acted = false;
  EpisodeConfig episode = sc.episode;
  episode.spawn_x_hi = 420.0;  // let the ball reach the new wall
  for (int e = 0; e < 200 && !acted; ++e) {
    agent.set_episode(e, 200);
    PolicyHook policy = [&](long long id, const BallState& pre,
                            const InteractionContext& ctx) {
      return agent.decide(scene, scene.get(id), pre, ctx, agent_rng);
    };
    const EpisodeRecord rec = run_episode(scene, policy, episode, ep_rng);
    for (const auto& i : rec.interactions)
      if (i.policy_called && i.object_id == newcomer->object_id) acted = true;
    agent.end_episode(scene, rec, agent_rng);
  }
  const long steps_at_first_action =
      agent.transition_model("rotating-wall")->fit_steps();
  const bool ok = acted && steps_at_first_action == steps_at_injection;
  report(9, "newly spawned wall of a pretrained class acted through the "
            "full pipeline with zero additional transition gradient steps",
         ok);
}

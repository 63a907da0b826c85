#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "paprl/object_model.hpp"
#include "paprl/scenario.hpp"

using namespace paprl;

namespace {

Scene make_scene(std::shared_ptr<ClassRegistry> registry) {
  return Scene(std::move(registry), QHyper{});
}

}  // namespace

TEST_CASE("registry rejects duplicates and resolves classes by id") {
  auto registry = std::make_shared<ClassRegistry>();
  registry->register_class(rotating_wall_class());
  registry->register_class(neutral_ball_class());
  REQUIRE_THROWS_AS(registry->register_class(rotating_wall_class()),
                    DuplicateClass);
  REQUIRE(registry->find("rotating-wall") != nullptr);
  REQUIRE(registry->find("no-such-class") == nullptr);
  REQUIRE_THROWS_AS(registry->get("no-such-class"), UnknownClass);
  REQUIRE(registry->get("rotating-wall").body == BodyKind::Segment);
  REQUIRE(arc_wall_class().body == BodyKind::Arc);
}

TEST_CASE("attribute schemas validate names, bounds and values") {
  const auto& schema = rotating_wall_class().schema;
  REQUIRE(schema.size() == 3);
  REQUIRE(schema.index_of("f_w") == 0);
  REQUIRE(schema.index_of("e_w") == 1);
  REQUIRE(schema.index_of("theta_w") == 2);
  REQUIRE_NOTHROW(schema.validate({0.5, 0.7, 0.0}));
  REQUIRE_THROWS_AS(schema.validate({0.1, 0.7, 0.0}), OutOfRangeAttribute);
  REQUIRE_THROWS_AS(schema.validate({0.5, 0.7}), DimensionMismatch);
  REQUIRE_THROWS_AS(
      AttributeSchema({{"a", 0, 1, ""}, {"a", 0, 1, ""}}), Error);
  REQUIRE_THROWS_AS(AttributeSchema({{"a", 2, 1, ""}}), Error);
}

TEST_CASE("spawn assigns monotone ids and validates attributes") {
  auto scene = make_scene(make_standard_registry());
  Rng rng(1);
  auto a = scene.spawn_object("neutral-ball", default_ball_attributes(), false,
                              rng);
  auto b = scene.spawn_object("rotating-wall", default_wall_attributes(), true,
                              rng, rotating_wall_placement());
  REQUIRE(a->object_id == 0);
  REQUIRE(b->object_id == 1);
  REQUIRE(scene.class_of(1) == "rotating-wall");
  REQUIRE_THROWS_AS(scene.spawn_object("rotating-wall", {2.0, 0.7, 0.0}, true,
                                       rng),
                    OutOfRangeAttribute);
  REQUIRE_THROWS_AS(scene.spawn_object("bogus", {}, true, rng), UnknownClass);

  scene.remove_object(1);
  REQUIRE_THROWS_AS(scene.get(1), UnknownObject);
  REQUIRE_THROWS_AS(scene.remove_object(1), UnknownObject);
  // ids are never reused
  auto c = scene.spawn_object("rotating-wall", default_wall_attributes(), true,
                              rng, rotating_wall_placement());
  REQUIRE(c->object_id == 2);
}

TEST_CASE("global state lists every object in insertion order") {
  auto scene = make_scene(make_standard_registry());
  Rng rng(2);
  scene.spawn_object("neutral-ball", default_ball_attributes(), false, rng);
  scene.spawn_object("rotating-wall", default_wall_attributes(), true, rng,
                     rotating_wall_placement());
  const auto gs = scene.global_state();
  REQUIRE(gs.per_object_states.size() == 2);
  REQUIRE(gs.per_object_states[0].first == 0);
  REQUIRE(gs.per_object_states[0].second == default_ball_attributes());
  REQUIRE(gs.per_object_states[1].second == default_wall_attributes());
}

TEST_CASE("an active object observes neutral objects and itself only") {
  auto scene = make_scene(make_standard_registry());
  Rng rng(3);
  scene.spawn_object("neutral-ball", default_ball_attributes(), false, rng);
  auto w1 = scene.spawn_object("rotating-wall", default_wall_attributes(),
                               true, rng, rotating_wall_placement());
  auto w2 = scene.spawn_object("rotating-wall", {0.6, 0.8, 0.1}, true, rng,
                               rotating_wall_placement());
  const auto obs = scene.observation_for(w1->object_id);
  REQUIRE(obs.size() == 2);  // the ball and itself
  REQUIRE(obs[0].first == 0);
  REQUIRE(obs[1].first == w1->object_id);
  for (const auto& [id, state] : obs) REQUIRE(id != w2->object_id);
}

TEST_CASE("spawned instances deep-copy the inherited class model") {
  auto registry = std::make_shared<ClassRegistry>();
  auto cls = rotating_wall_class();
  Rng model_rng(77);
  cls.class_q = std::make_shared<QModel>(
      make_q_model(cls, QHyper{}, model_rng));
  registry->register_class(std::move(cls));
  registry->register_class(neutral_ball_class());

  auto scene = make_scene(registry);
  Rng rng(4);
  auto inst = scene.spawn_object("rotating-wall", default_wall_attributes(),
                                 true, rng, rotating_wall_placement());
  const auto& shared = *registry->get("rotating-wall").class_q;
  // byte-identical copy at spawn, and the object starts on the class model
  REQUIRE(inst->models.own_q.to_json().dump() == shared.to_json().dump());
  REQUIRE(inst->models.trust.in_use == ModelInUse::ClassModel);
  REQUIRE(inst->models.class_copy.has_value());

  // training the private copy leaves the registry copy untouched
  const std::string before = shared.to_json().dump();
  Rng train_rng(5);
  for (int i = 0; i < 40; ++i)
    inst->models.update_q({{10, -20, 1, 0.5},
                           std::vector<double>(9, 0.5),
                           {0.1},
                           0.8},
                          train_rng);
  REQUIRE(shared.to_json().dump() == before);
  REQUIRE(inst->models.class_copy->to_json().dump() != before);
}

TEST_CASE("objects of the same class keep isolated own models") {
  auto scene = make_scene(make_standard_registry());
  Rng rng(6);
  auto w1 = scene.spawn_object("rotating-wall", default_wall_attributes(),
                               true, rng, rotating_wall_placement());
  auto w2 = scene.spawn_object("rotating-wall", default_wall_attributes(),
                               true, rng, rotating_wall_placement());
  const std::string w2_before = w2->models.own_q.to_json().dump();
  Rng train_rng(7);
  for (int i = 0; i < 10; ++i)
    w1->models.update_q({{0, 0, 0, 0}, std::vector<double>(9, 0.5), {0.0},
                         0.3},
                        train_rng);
  REQUIRE(w2->models.own_q.to_json().dump() == w2_before);
  REQUIRE(w1->models.own_q.to_json().dump() != w2_before);
}

TEST_CASE("wall geometry tracks the actuated attribute") {
  auto registry = make_standard_registry();
  ObjectInstance inst;
  inst.attributes = {0.6, 0.8, 0.25};
  inst.placement = rotating_wall_placement();
  auto g = inst.geometry(registry->get("rotating-wall"));
  REQUIRE(g.kind == WallGeometry::Kind::Segment);
  REQUIRE(g.friction == 0.6);
  REQUIRE(g.elasticity == 0.8);
  REQUIRE(g.orientation == 0.25);

  inst.placement = arc_wall_placement();
  inst.attributes = {0.6, 0.8, 12.0};
  auto ga = inst.geometry(registry->get("arc-wall"));
  REQUIRE(ga.kind == WallGeometry::Kind::Arc);
  REQUIRE(ga.sweep_velocity == 12.0);
  REQUIRE(ga.radius == arc_wall_placement().radius);
}

TEST_CASE("scene description round-trips through json") {
  auto scene = make_scene(make_standard_registry());
  Rng rng(8);
  scene.spawn_object("neutral-ball", default_ball_attributes(), false, rng);
  scene.spawn_object("rotating-wall", {0.55, 0.65, -0.1}, true, rng,
                     rotating_wall_placement());
  scene.spawn_object("arc-wall", {0.5, 0.7, 3.0}, true, rng,
                     arc_wall_placement());
  const auto j = scene_to_json(scene);
  Rng rng2(9);
  auto back = scene_from_json(j, rng2);
  REQUIRE(scene_to_json(back).dump() == j.dump());
  REQUIRE(back.n_active() == 2);
  REQUIRE(back.get(2).attributes == std::vector<double>{0.5, 0.7, 3.0});
}

TEST_CASE("conditioning layout has a fixed documented shape") {
  const auto cls = rotating_wall_class();
  // 3 ball constants + 3 class attributes + contact normal + tangent coord
  REQUIRE(context_ranges_for(cls).size() == 9);
  const auto ball = ball_constant_ranges();
  REQUIRE(ball.size() == 3);
  REQUIRE(ball[2] == std::pair{5.0, 25.0});
}

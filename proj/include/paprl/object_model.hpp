#ifndef PAPRL_OBJECT_MODEL_HPP
#define PAPRL_OBJECT_MODEL_HPP

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "paprl/attributes.hpp"
#include "paprl/errors.hpp"
#include "paprl/physics.hpp"
#include "paprl/reward_model.hpp"
#include "paprl/rng.hpp"
#include "paprl/transition_model.hpp"

namespace paprl {

// Where a wall sits in the arena. Placement is scenario geometry, not part
// of the class attribute schema.
struct Placement {
  Vec2 anchor;
  double half_length = 80.0;  // segment
  double radius = 50.0;       // arc
  double span = 2.0;          // arc
  double span_center = 1.5707963267948966;

  nlohmann::json to_json() const {
    return {{"anchor", {anchor.x, anchor.y}},
            {"half_length", half_length},
            {"radius", radius},
            {"span", span},
            {"span_center", span_center}};
  }
  static Placement from_json(const nlohmann::json& j) {
    Placement p;
    p.anchor = {j.at("anchor").at(0).get<double>(),
                j.at("anchor").at(1).get<double>()};
    p.half_length = j.at("half_length").get<double>();
    p.radius = j.at("radius").get<double>();
    p.span = j.at("span").get<double>();
    p.span_center = j.at("span_center").get<double>();
    return p;
  }
};

enum class BodyKind { Segment, Arc, Ball };

inline std::string body_kind_name(BodyKind k) {
  switch (k) {
    case BodyKind::Segment: return "segment";
    case BodyKind::Arc: return "arc";
    default: return "ball";
  }
}

inline BodyKind body_kind_from_name(const std::string& s) {
  if (s == "segment") return BodyKind::Segment;
  if (s == "arc") return BodyKind::Arc;
  if (s == "ball") return BodyKind::Ball;
  throw ConfigError("unknown body kind: " + s);
}

struct ObjectClass {
  std::string class_id;
  std::string name;
  AttributeSchema schema;
  ActionSpec action_spec;
  BodyKind body = BodyKind::Segment;
  // Attribute indices the action writes to (one per action dimension).
  std::vector<int> actuated_indices;
  std::shared_ptr<const QModel> class_q;            // inherited c.Q
  std::shared_ptr<TransitionModel> class_transition;
};

// Ball-constant ranges used in the model conditioning, per the neutral
// ball schema.
inline std::vector<std::pair<double, double>> ball_constant_ranges() {
  return {{0.4, 0.9}, {0.4, 0.9}, {5.0, 25.0}};
}

// Conditioning layout: ball constants + the acting class's attributes +
// contact normal (cos, sin) + normalized tangential contact coordinate.
inline std::vector<std::pair<double, double>> context_ranges_for(
    const ObjectClass& cls) {
  auto ranges = ball_constant_ranges();
  for (const auto& r : cls.schema.ranges()) ranges.push_back(r);
  ranges.emplace_back(-1.0, 1.0);
  ranges.emplace_back(-1.0, 1.0);
  ranges.emplace_back(-1.0, 1.0);
  return ranges;
}

inline QModel make_q_model(const ObjectClass& cls, const QHyper& hyper,
                           Rng& rng) {
  auto ranges = context_ranges_for(cls);
  const std::size_t dim = ranges.size();
  return QModel(cls.action_spec, dim, std::move(ranges), hyper, rng);
}

inline TransitionModel make_transition_model(const ObjectClass& cls,
                                             const TransitionHyper& hyper,
                                             Rng& rng) {
  auto ranges = context_ranges_for(cls);
  const std::size_t dim = ranges.size();
  return TransitionModel(cls.class_id, dim, std::move(ranges),
                         hyper, rng);
}

class ClassRegistry {
 public:
  std::string register_class(ObjectClass cls) {
    if (cls.class_id.empty()) throw Error("class_id must be nonempty");
    cls.action_spec.validate();
    if (find(cls.class_id)) throw DuplicateClass(cls.class_id);
    if (cls.class_q) {
      const std::size_t expected =
          4 + context_ranges_for(cls).size() +
          static_cast<std::size_t>(cls.action_spec.dim);
      if (static_cast<std::size_t>(cls.class_q->net().input_dim()) != expected)
        throw DimensionMismatch(expected, cls.class_q->net().input_dim());
    }
    auto id = cls.class_id;
    classes_.push_back(std::make_shared<ObjectClass>(std::move(cls)));
    return id;
  }

  std::shared_ptr<ObjectClass> find(const std::string& id) const {
    for (const auto& c : classes_)
      if (c->class_id == id) return c;
    return nullptr;
  }

  ObjectClass& get(const std::string& id) const {
    auto c = find(id);
    if (!c) throw UnknownClass(id);
    return *c;
  }

  const std::vector<std::shared_ptr<ObjectClass>>& classes() const {
    return classes_;
  }

 private:
  std::vector<std::shared_ptr<ObjectClass>> classes_;
};

struct ObjectInstance {
  long long object_id = -1;
  std::string class_id;
  std::vector<double> attributes;
  std::vector<double> default_attributes;  // spawn values, restored per episode
  bool active = false;  // the z flag
  Placement placement;
  bool has_acted_this_episode = false;
  RewardModelSlot models;  // meaningful only when active

  WallGeometry geometry(const ObjectClass& cls) const {
    WallGeometry g;
    g.anchor = placement.anchor;
    g.friction = attributes[0];
    g.elasticity = attributes[1];
    if (cls.body == BodyKind::Segment) {
      g.kind = WallGeometry::Kind::Segment;
      g.half_length = placement.half_length;
      g.orientation = attributes[2];
    } else {
      g.kind = WallGeometry::Kind::Arc;
      g.radius = placement.radius;
      g.span = placement.span;
      g.span_center = placement.span_center;
      g.sweep_velocity = attributes[2];
    }
    return g;
  }
};

struct GlobalState {
  std::vector<std::pair<long long, std::vector<double>>> per_object_states;
};

// The scene: present objects in insertion order. Single-writer; instances
// handed out as snapshots are safe to move across threads.
class Scene {
 public:
  explicit Scene(std::shared_ptr<ClassRegistry> registry,
                 QHyper q_hyper = {})
      : registry_(std::move(registry)), q_hyper_(q_hyper) {}

  ClassRegistry& registry() { return *registry_; }
  const ClassRegistry& registry() const { return *registry_; }

  std::shared_ptr<ObjectInstance> spawn_object(
      const std::string& class_id, const std::vector<double>& attribute_values,
      bool active, Rng& rng, const Placement& placement = {}) {
    auto cls = registry_->find(class_id);
    if (!cls) throw UnknownClass(class_id);
    cls->schema.validate(attribute_values);
    auto inst = std::make_shared<ObjectInstance>();
    inst->object_id = next_id_++;
    inst->class_id = class_id;
    inst->attributes = attribute_values;
    inst->default_attributes = attribute_values;
    inst->active = active;
    inst->placement = placement;
    if (active) {
      if (cls->class_q) {
        // inherit: own model starts as a deep copy, and the object starts
        // out trusting the inherited class model
        inst->models.own_q = *cls->class_q;
        inst->models.class_q = cls->class_q;
        inst->models.class_copy = *cls->class_q;
        inst->models.trust.in_use = ModelInUse::ClassModel;
      } else {
        inst->models.own_q = make_q_model(*cls, q_hyper_, rng);
        inst->models.trust.in_use = ModelInUse::OwnModel;
      }
      inst->models.trust.window = trust_window_;
      inst->models.trust.threshold = trust_threshold_;
    }
    instances_.push_back(inst);
    return inst;
  }

  void remove_object(long long object_id) {
    for (std::size_t i = 0; i < instances_.size(); ++i) {
      if (instances_[i]->object_id == object_id) {
        instances_.erase(instances_.begin() + static_cast<long>(i));
        return;
      }
    }
    throw UnknownObject(object_id);
  }

  std::shared_ptr<ObjectInstance> find(long long object_id) const {
    for (const auto& inst : instances_)
      if (inst->object_id == object_id) return inst;
    return nullptr;
  }

  ObjectInstance& get(long long object_id) const {
    auto inst = find(object_id);
    if (!inst) throw UnknownObject(object_id);
    return *inst;
  }

  std::string class_of(long long object_id) const {
    return get(object_id).class_id;
  }

  GlobalState global_state() const {
    GlobalState gs;
    for (const auto& inst : instances_)
      gs.per_object_states.emplace_back(inst->object_id, inst->attributes);
    return gs;
  }

  // What an active object is allowed to see: neutral-object states plus
  // its own attributes. No other active object's entries.
  std::vector<std::pair<long long, std::vector<double>>> observation_for(
      long long object_id) const {
    const ObjectInstance& self = get(object_id);
    std::vector<std::pair<long long, std::vector<double>>> obs;
    for (const auto& inst : instances_)
      if (!inst->active) obs.emplace_back(inst->object_id, inst->attributes);
    obs.emplace_back(self.object_id, self.attributes);
    return obs;
  }

  const std::vector<std::shared_ptr<ObjectInstance>>& instances() const {
    return instances_;
  }

  std::size_t n_active() const {
    std::size_t n = 0;
    for (const auto& inst : instances_)
      if (inst->active) ++n;
    return n;
  }

  void set_trust_params(std::size_t window, double threshold) {
    trust_window_ = window;
    trust_threshold_ = threshold;
  }
  void reset_has_acted() {
    for (auto& inst : instances_) inst->has_acted_this_episode = false;
  }

 private:
  std::shared_ptr<ClassRegistry> registry_;
  std::vector<std::shared_ptr<ObjectInstance>> instances_;
  long long next_id_ = 0;
  QHyper q_hyper_;
  std::size_t trust_window_ = 20;
  double trust_threshold_ = 0.25;
};

// --- scene description file -------------------------------------------------

inline nlohmann::json class_to_json(const ObjectClass& cls) {
  return {{"class_id", cls.class_id},
          {"name", cls.name},
          {"schema", cls.schema.to_json()},
          {"action_spec", cls.action_spec.to_json()},
          {"body", body_kind_name(cls.body)},
          {"actuated_indices", cls.actuated_indices}};
}

inline ObjectClass class_from_json(const nlohmann::json& j) {
  ObjectClass cls;
  cls.class_id = j.at("class_id").get<std::string>();
  cls.name = j.at("name").get<std::string>();
  cls.schema = AttributeSchema::from_json(j.at("schema"));
  cls.action_spec = ActionSpec::from_json(j.at("action_spec"));
  cls.body = body_kind_from_name(j.at("body").get<std::string>());
  cls.actuated_indices = j.at("actuated_indices").get<std::vector<int>>();
  return cls;
}

inline nlohmann::json scene_to_json(const Scene& scene) {
  nlohmann::json jc = nlohmann::json::array();
  for (const auto& cls : scene.registry().classes())
    jc.push_back(class_to_json(*cls));
  nlohmann::json ji = nlohmann::json::array();
  for (const auto& inst : scene.instances())
    ji.push_back({{"object_id", inst->object_id},
                  {"class", inst->class_id},
                  {"attributes", inst->attributes},
                  {"active", inst->active},
                  {"placement", inst->placement.to_json()}});
  return {{"format_version", 1}, {"classes", jc}, {"instances", ji}};
}

inline Scene scene_from_json(const nlohmann::json& j, Rng& rng,
                             QHyper q_hyper = {}) {
  auto registry = std::make_shared<ClassRegistry>();
  for (const auto& jc : j.at("classes"))
    registry->register_class(class_from_json(jc));
  Scene scene(std::move(registry), q_hyper);
  for (const auto& ji : j.at("instances"))
    scene.spawn_object(ji.at("class").get<std::string>(),
                       ji.at("attributes").get<std::vector<double>>(),
                       ji.at("active").get<bool>(), rng,
                       Placement::from_json(ji.at("placement")));
  return scene;
}

}  // namespace paprl

#endif  // PAPRL_OBJECT_MODEL_HPP

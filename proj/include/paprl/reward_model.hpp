#ifndef PAPRL_REWARD_MODEL_HPP
#define PAPRL_REWARD_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "paprl/attributes.hpp"
#include "paprl/errors.hpp"
#include "paprl/mlp.hpp"
#include "paprl/normalizer.hpp"
#include "paprl/replay_buffer.hpp"
#include "paprl/rng.hpp"

namespace paprl {

// One observation for the reward regression: the observed post-interaction
// state, the interaction context, the action taken and the episode reward.
struct QTriplet {
  std::vector<double> post4;
  std::vector<double> context;
  std::vector<double> action;
  double reward = 0.0;
};

struct QHyper {
  std::vector<int> hidden{32, 32};
  double learning_rate = 2e-2;
  std::size_t minibatch = 32;
  int train_steps = 1;  // minibatch steps per update_q call
  double velocity_range = 900.0;
  double spin_range = 150.0;
  // fresh-model init: uniform weights, zero biases. Values much below the
  // glorot scale leave the tanh layers near-linear and the fit degenerates
  // to linear regression.
  double init_scale = 0.5;
};

// One-step reward regressor over <post-interaction state, context, action>.
// Not a bootstrapped value function: episodes are single-action, so the
// network models the reward directly.
class QModel {
 public:
  QModel() = default;

  QModel(ActionSpec action_spec, std::size_t context_dim,
         std::vector<std::pair<double, double>> context_ranges,
         const QHyper& hyper, Rng& rng)
      : action_spec_(std::move(action_spec)), hyper_(hyper) {
    action_spec_.validate();
    if (context_ranges.size() != context_dim)
      throw DimensionMismatch(context_dim, context_ranges.size());
    std::vector<std::pair<double, double>> in_ranges{
        {-hyper.velocity_range, hyper.velocity_range},
        {-hyper.velocity_range, hyper.velocity_range},
        {-hyper.spin_range, hyper.spin_range},
        {-M_PI, M_PI}};
    in_ranges.insert(in_ranges.end(), context_ranges.begin(),
                     context_ranges.end());
    for (const auto& b : action_spec_.bounds) in_ranges.push_back(b);
    in_norm_ = AffineNormalizer(std::move(in_ranges));
    std::vector<int> sizes{static_cast<int>(in_norm_.dim())};
    sizes.insert(sizes.end(), hyper.hidden.begin(), hyper.hidden.end());
    sizes.push_back(1);
    net_ = Mlp(std::move(sizes));
    net_.init_uniform(rng, hyper.init_scale);
  }

  const ActionSpec& action_spec() const { return action_spec_; }
  const Mlp& net() const { return net_; }
  long call_count() const { return call_count_; }

  double value(const std::vector<double>& post4,
               const std::vector<double>& context,
               const std::vector<double>& action) const {
    ++call_count_;
    MlpWorkspace ws;
    return net_.forward_scalar(encode(post4, context, action), ws);
  }

  // Sampled argmax over n uniform candidate actions; ties broken by the
  // lowest sample index. Returns the winning action.
  std::vector<double> argmax_action(const std::vector<double>& post4,
                                    const std::vector<double>& context,
                                    std::size_t n_samples, Rng& rng,
                                    double* best_value = nullptr) const {
    if (n_samples == 0) throw Error("n_samples must be > 0");
    std::vector<double> input(in_norm_.dim());
    const std::size_t fixed = 4 + context.size();
    {
      std::vector<double> head = post4;
      head.insert(head.end(), context.begin(), context.end());
      if (head.size() != fixed || fixed + action_spec_.bounds.size() != input.size())
        throw DimensionMismatch(in_norm_.dim(),
                                head.size() + action_spec_.bounds.size());
      for (std::size_t i = 0; i < fixed; ++i)
        input[i] = in_norm_.encode_one(i, head[i]);
    }
    MlpWorkspace ws;
    std::vector<double> best_action(action_spec_.bounds.size());
    double best = 0.0;
    std::vector<double> candidate(action_spec_.bounds.size());
    for (std::size_t s = 0; s < n_samples; ++s) {
      for (std::size_t d = 0; d < candidate.size(); ++d) {
        candidate[d] = rng.uniform(action_spec_.bounds[d].first,
                                   action_spec_.bounds[d].second);
        input[fixed + d] = in_norm_.encode_one(fixed + d, candidate[d]);
      }
      ++call_count_;
      const double q = net_.forward_scalar(input, ws);
      if (s == 0 || q > best) {
        best = q;
        best_action = candidate;
      }
    }
    if (best_value) *best_value = best;
    return best_action;
  }

  double train_minibatch(const ReplayBuffer<QTriplet>& buffer, Rng& rng) {
    if (buffer.empty()) throw EmptyBuffer();
    std::vector<TrainSample> batch;
    batch.reserve(hyper_.minibatch);
    for (std::size_t i = 0; i < hyper_.minibatch; ++i) {
      const QTriplet& t = buffer[rng.uniform_index(buffer.size())];
      batch.push_back({encode(t.post4, t.context, t.action), {t.reward}});
    }
    return net_.train_minibatch(batch, hyper_.learning_rate);
  }

  nlohmann::json to_json() const {
    return {{"format_version", 1},
            {"kind", "q"},
            {"net", net_.to_json()},
            {"in_norm", in_norm_.to_json()},
            {"action_spec", action_spec_.to_json()},
            {"hyper",
             {{"hidden", hyper_.hidden},
              {"learning_rate", hyper_.learning_rate},
              {"minibatch", hyper_.minibatch},
              {"train_steps", hyper_.train_steps},
              {"velocity_range", hyper_.velocity_range},
              {"spin_range", hyper_.spin_range},
              {"init_scale", hyper_.init_scale}}}};
  }

  static QModel from_json(const nlohmann::json& j) {
    QModel m;
    m.net_ = Mlp::from_json(j.at("net"));
    m.in_norm_ = AffineNormalizer::from_json(j.at("in_norm"));
    m.action_spec_ = ActionSpec::from_json(j.at("action_spec"));
    const auto& h = j.at("hyper");
    m.hyper_.hidden = h.at("hidden").get<std::vector<int>>();
    m.hyper_.learning_rate = h.at("learning_rate").get<double>();
    m.hyper_.minibatch = h.at("minibatch").get<std::size_t>();
    m.hyper_.train_steps = h.at("train_steps").get<int>();
    m.hyper_.velocity_range = h.at("velocity_range").get<double>();
    m.hyper_.spin_range = h.at("spin_range").get<double>();
    m.hyper_.init_scale = h.at("init_scale").get<double>();
    return m;
  }

  const QHyper& hyper() const { return hyper_; }

 private:
  std::vector<double> encode(const std::vector<double>& post4,
                             const std::vector<double>& context,
                             const std::vector<double>& action) const {
    std::vector<double> in = post4;
    in.insert(in.end(), context.begin(), context.end());
    in.insert(in.end(), action.begin(), action.end());
    return in_norm_.encode(in);
  }

  Mlp net_;
  AffineNormalizer in_norm_;
  ActionSpec action_spec_;
  QHyper hyper_;
  mutable long call_count_ = 0;
};

enum class ModelInUse { OwnModel, ClassModel };

inline std::string model_in_use_name(ModelInUse m) {
  return m == ModelInUse::OwnModel ? "own" : "class";
}

// Trust-factor bookkeeping: a sliding window of the last K absolute
// reward-prediction residuals, evaluated every K episodes.
struct TrustState {
  std::size_t window = 20;  // K
  double threshold = 0.25;  // h
  std::vector<double> residuals;
  ModelInUse in_use = ModelInUse::OwnModel;
  long evaluations = 0;
  long swaps = 0;
  long missing_class_model = 0;  // swap wanted but no class model present
  std::size_t episodes_since_eval = 0;
  double last_tf = -1.0;  // most recently evaluated TF, <0 if never

  void push_residual(double r) {
    residuals.push_back(std::fabs(r));
    if (residuals.size() > window) residuals.erase(residuals.begin());
    ++episodes_since_eval;
  }

  double trust_factor() const {
    if (residuals.size() != window)
      throw WindowNotFull(residuals.size(), window);
    double sum = 0.0;
    for (double r : residuals) sum += r;
    return 1.0 / (1.0 + sum);
  }

  nlohmann::json to_json() const {
    return {{"K", window},
            {"h", threshold},
            {"in_use", model_in_use_name(in_use)},
            {"residuals", residuals},
            {"evaluations", evaluations},
            {"swaps", swaps}};
  }
};

// An active object's reward-model slot: its own Q, an optional inherited
// class Q, and the trust state deciding which one answers queries.
struct RewardModelSlot {
  QModel own_q;
  std::shared_ptr<const QModel> class_q;  // shared registry copy, read-only
  std::optional<QModel> class_copy;       // private trainable copy
  ReplayBuffer<QTriplet> buffer{10000};
  TrustState trust;

  QModel& active_model() {
    if (trust.in_use == ModelInUse::ClassModel && class_copy)
      return *class_copy;
    return own_q;
  }
  const QModel& active_model() const {
    if (trust.in_use == ModelInUse::ClassModel && class_copy)
      return *class_copy;
    return own_q;
  }

  // Appends the triplet and takes gradient steps on the currently trusted
  // model. Returns the last minibatch loss.
  double update_q(const QTriplet& triplet, Rng& rng) {
    if (triplet.reward < 0.0 || triplet.reward > 1.0)
      throw RewardOutOfRange(triplet.reward);
    buffer.push(triplet);
    QModel& model = active_model();
    double loss = 0.0;
    for (int s = 0; s < model.hyper().train_steps; ++s)
      loss = model.train_minibatch(buffer, rng);
    return loss;
  }

  // Non-overlapping trust evaluation: once the window holds K fresh
  // residuals, compute TF and swap models when TF <= h. The window clears
  // on swap so the incoming model gets a clean evaluation.
  bool maybe_swap() {
    if (trust.residuals.size() < trust.window) return false;
    if (trust.episodes_since_eval < trust.window) return false;
    trust.episodes_since_eval = 0;
    ++trust.evaluations;
    const double tf = trust.trust_factor();
    trust.last_tf = tf;
    if (tf > trust.threshold) return false;
    if (trust.in_use == ModelInUse::OwnModel) {
      if (!class_q) {
        ++trust.missing_class_model;
        return false;
      }
      class_copy = *class_q;  // private copy taken at swap time
      trust.in_use = ModelInUse::ClassModel;
    } else {
      trust.in_use = ModelInUse::OwnModel;
    }
    trust.residuals.clear();
    ++trust.swaps;
    return true;
  }
};

}  // namespace paprl

#endif  // PAPRL_REWARD_MODEL_HPP

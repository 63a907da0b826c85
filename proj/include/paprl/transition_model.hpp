#ifndef PAPRL_TRANSITION_MODEL_HPP
#define PAPRL_TRANSITION_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "paprl/errors.hpp"
#include "paprl/mlp.hpp"
#include "paprl/normalizer.hpp"
#include "paprl/physics.hpp"
#include "paprl/rng.hpp"

namespace paprl {

// Conditioning inputs shared by the transition and reward models: the
// ball's constant attributes, the acting object's pre-action attributes,
// and the contact geometry observed at interaction time.
struct InteractionContext {
  double ball_friction = 0.5;
  double ball_elasticity = 0.7;
  double ball_mass = 10.0;
  std::vector<double> wall_attributes;  // pre-action values
  double normal_cos = 0.0;
  double normal_sin = 1.0;
  double tangent_coord = 0.0;

  std::vector<double> to_vector() const {
    std::vector<double> v{ball_friction, ball_elasticity, ball_mass};
    v.insert(v.end(), wall_attributes.begin(), wall_attributes.end());
    v.push_back(normal_cos);
    v.push_back(normal_sin);
    v.push_back(tangent_coord);
    return v;
  }

  static InteractionContext from_record(const InteractionRecord& r,
                                        const BallState& ball) {
    InteractionContext ctx;
    ctx.ball_friction = ball.friction;
    ctx.ball_elasticity = ball.elasticity;
    ctx.ball_mass = ball.mass;
    ctx.wall_attributes = r.wall_attributes_pre;
    ctx.normal_cos = r.normal_cos;
    ctx.normal_sin = r.normal_sin;
    ctx.tangent_coord = r.tangent_coord;
    return ctx;
  }
};

struct TransitionPair {
  std::vector<double> pre4;     // [vx, vy, spin, theta]
  std::vector<double> context;  // InteractionContext::to_vector()
  std::vector<double> post3;    // [vx', vy', spin']; theta' is derived
};

class TransitionDataset {
 public:
  void record_interaction(const std::vector<double>& pre4,
                          const std::vector<double>& context,
                          const PostInteractionState& post) {
    if (pre4.size() != 4) throw DimensionMismatch(4, pre4.size());
    auto finite = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(),
                         [](double x) { return std::isfinite(x); });
    };
    const std::vector<double> post3{post.vx, post.vy, post.spin};
    if (!finite(pre4) || !finite(context) || !finite(post3))
      throw NonFiniteState();
    pairs_.push_back({pre4, context, post3});
  }

  std::size_t size() const { return pairs_.size(); }
  const TransitionPair& operator[](std::size_t i) const { return pairs_[i]; }
  const std::vector<TransitionPair>& pairs() const { return pairs_; }

 private:
  std::vector<TransitionPair> pairs_;
};

struct TransitionFitReport {
  double heldout_mse = 0.0;          // normalized space
  std::vector<double> heldout_r2;    // raw space, per output dimension
};

struct TransitionHyper {
  std::vector<int> hidden{64, 64};
  double learning_rate = 1e-2;
  std::size_t minibatch = 32;
  double velocity_range = 900.0;
  double spin_range = 150.0;
};

// Per-class local dynamics model: predicts the ball's post-interaction
// velocities from its pre-interaction 4-state plus the interaction
// context. The movement angle is recomputed from the predicted velocities
// rather than regressed, to avoid the wrap-around at +-pi.
class TransitionModel {
 public:
  TransitionModel() = default;

  TransitionModel(std::string class_id, std::size_t context_dim,
                  std::vector<std::pair<double, double>> context_ranges,
                  const TransitionHyper& hyper, Rng& rng)
      : class_id_(std::move(class_id)), hyper_(hyper) {
    if (context_ranges.size() != context_dim)
      throw DimensionMismatch(context_dim, context_ranges.size());
    std::vector<std::pair<double, double>> in_ranges{
        {-hyper.velocity_range, hyper.velocity_range},
        {-hyper.velocity_range, hyper.velocity_range},
        {-hyper.spin_range, hyper.spin_range},
        {-M_PI, M_PI}};
    in_ranges.insert(in_ranges.end(), context_ranges.begin(),
                     context_ranges.end());
    // two derived features: the velocity components along the contact
    // normal and tangent, computed from the state and the context tail
    in_ranges.emplace_back(-hyper.velocity_range, hyper.velocity_range);
    in_ranges.emplace_back(-hyper.velocity_range, hyper.velocity_range);
    in_norm_ = AffineNormalizer(std::move(in_ranges));
    out_norm_ = AffineNormalizer(
        {{-hyper.velocity_range, hyper.velocity_range},
         {-hyper.velocity_range, hyper.velocity_range},
         {-hyper.spin_range, hyper.spin_range}});
    std::vector<int> sizes{static_cast<int>(4 + context_dim + 2)};
    sizes.insert(sizes.end(), hyper.hidden.begin(), hyper.hidden.end());
    sizes.push_back(3);
    net_ = Mlp(std::move(sizes));
    net_.init_glorot(rng);
  }

  const std::string& class_id() const { return class_id_; }
  long trained_samples() const { return trained_samples_; }
  long fit_steps() const { return fit_steps_; }
  std::size_t context_dim() const { return in_norm_.dim() - 6; }
  const Mlp& net() const { return net_; }

  bool cold() const { return trained_samples_ == 0; }

  PostInteractionState predict(const std::vector<double>& pre4,
                               const std::vector<double>& context,
                               bool strict = false) const {
    if (strict && cold()) throw ColdModel();
    MlpWorkspace ws;
    const auto raw =
        out_norm_.decode(net_.forward_into(encode_input(pre4, context), ws));
    PostInteractionState post;
    post.vx = pre4[0] + raw[0];
    post.vy = pre4[1] + raw[1];
    post.spin = pre4[2] + raw[2];
    post.theta = (post.vx != 0.0 || post.vy != 0.0)
                     ? std::atan2(post.vy, post.vx)
                     : pre4[3];
    return post;
  }

  // One SGD minibatch sampled from the tail of the dataset; used by the
  // online agent, one call per recorded interaction.
  double train_minibatch(const TransitionDataset& dataset, Rng& rng) {
    if (dataset.size() == 0) throw EmptyBuffer();
    std::vector<TrainSample> batch;
    batch.reserve(hyper_.minibatch);
    for (std::size_t i = 0; i < hyper_.minibatch; ++i)
      batch.push_back(to_sample(dataset[rng.uniform_index(dataset.size())]));
    const double loss = net_.train_minibatch(batch, hyper_.learning_rate);
    fit_steps_ += 1;
    trained_samples_ += static_cast<long>(hyper_.minibatch);
    return loss;
  }

  // Full fit with a 10% held-out split. Returns held-out MSE in the
  // normalized space; R^2 per raw output dimension via `report`.
  double fit(const TransitionDataset& dataset, int epochs, Rng& rng,
             TransitionFitReport* report = nullptr) {
    if (dataset.size() < hyper_.minibatch)
      throw InsufficientData(hyper_.minibatch, dataset.size());
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i-- > 1;)
      std::swap(order[i], order[rng.uniform_index(i + 1)]);
    const std::size_t heldout = std::max<std::size_t>(1, order.size() / 10);
    const std::size_t train_n = order.size() - heldout;

    std::vector<TrainSample> batch;
    for (int epoch = 0; epoch < epochs; ++epoch) {
      for (std::size_t start = 0; start + hyper_.minibatch <= train_n;
           start += hyper_.minibatch) {
        batch.clear();
        for (std::size_t i = 0; i < hyper_.minibatch; ++i)
          batch.push_back(to_sample(dataset[order[start + i]]));
        net_.train_minibatch(batch, hyper_.learning_rate);
        fit_steps_ += 1;
      }
    }
    trained_samples_ += static_cast<long>(train_n) * epochs;

    double mse = 0.0;
    std::vector<double> mean(3, 0.0), ss_res(3, 0.0), ss_tot(3, 0.0);
    MlpWorkspace ws;
    for (std::size_t k = train_n; k < order.size(); ++k)
      for (int d = 0; d < 3; ++d)
        mean[d] += dataset[order[k]].post3[d] / static_cast<double>(heldout);
    for (std::size_t k = train_n; k < order.size(); ++k) {
      const auto& pair = dataset[order[k]];
      const auto sample = to_sample(pair);
      const auto pred = net_.forward_into(sample.input, ws);
      for (int d = 0; d < 3; ++d) {
        const double err_norm = pred[d] - sample.target[d];
        mse += err_norm * err_norm / (3.0 * heldout);
        const double raw_pred = pair.pre4[d] + out_norm_.decode_one(d, pred[d]);
        const double raw_err = raw_pred - pair.post3[d];
        ss_res[d] += raw_err * raw_err;
        const double dev = pair.post3[d] - mean[d];
        ss_tot[d] += dev * dev;
      }
    }
    if (report) {
      report->heldout_mse = mse;
      report->heldout_r2.assign(3, 0.0);
      for (int d = 0; d < 3; ++d)
        report->heldout_r2[d] =
            ss_tot[d] > 0.0 ? 1.0 - ss_res[d] / ss_tot[d] : 1.0;
    }
    return mse;
  }

  nlohmann::json to_json() const {
    return {{"format_version", 1},
            {"kind", "transition"},
            {"class_id", class_id_},
            {"context_dim", context_dim()},
            {"trained_samples", trained_samples_},
            {"net", net_.to_json()},
            {"in_norm", in_norm_.to_json()},
            {"out_norm", out_norm_.to_json()},
            {"hyper",
             {{"hidden", hyper_.hidden},
              {"learning_rate", hyper_.learning_rate},
              {"minibatch", hyper_.minibatch},
              {"velocity_range", hyper_.velocity_range},
              {"spin_range", hyper_.spin_range}}}};
  }

  static TransitionModel from_json(const nlohmann::json& j) {
    TransitionModel m;
    m.class_id_ = j.at("class_id").get<std::string>();
    m.trained_samples_ = j.at("trained_samples").get<long>();
    m.net_ = Mlp::from_json(j.at("net"));
    m.in_norm_ = AffineNormalizer::from_json(j.at("in_norm"));
    m.out_norm_ = AffineNormalizer::from_json(j.at("out_norm"));
    const auto& h = j.at("hyper");
    m.hyper_.hidden = h.at("hidden").get<std::vector<int>>();
    m.hyper_.learning_rate = h.at("learning_rate").get<double>();
    m.hyper_.minibatch = h.at("minibatch").get<std::size_t>();
    m.hyper_.velocity_range = h.at("velocity_range").get<double>();
    m.hyper_.spin_range = h.at("spin_range").get<double>();
    return m;
  }

 private:
  // The context layout ends with [normal_cos, normal_sin, tangent_coord];
  // the normal and tangential velocity components are appended as derived
  // input features so the net does not have to form those products itself.
  std::vector<double> encode_input(const std::vector<double>& pre4,
                                   const std::vector<double>& context) const {
    if (context.size() < 3) throw DimensionMismatch(3, context.size());
    std::vector<double> in = pre4;
    in.insert(in.end(), context.begin(), context.end());
    const double nc = context[context.size() - 3];
    const double ns = context[context.size() - 2];
    in.push_back(pre4[0] * nc + pre4[1] * ns);   // normal component
    in.push_back(pre4[0] * -ns + pre4[1] * nc);  // tangential component
    return in_norm_.encode(in);
  }

  // The net regresses the collision-induced deltas; the identity part of
  // the map comes for free and the targets stay well-scaled.
  TrainSample to_sample(const TransitionPair& pair) const {
    std::vector<double> target(3);
    for (int d = 0; d < 3; ++d)
      target[d] = out_norm_.encode_one(d, pair.post3[d] - pair.pre4[d]);
    return {encode_input(pair.pre4, pair.context), std::move(target)};
  }

  std::string class_id_;
  Mlp net_;
  AffineNormalizer in_norm_;
  AffineNormalizer out_norm_;
  TransitionHyper hyper_;
  long trained_samples_ = 0;
  long fit_steps_ = 0;
};

}  // namespace paprl

#endif  // PAPRL_TRANSITION_MODEL_HPP

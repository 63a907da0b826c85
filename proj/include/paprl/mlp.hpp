#ifndef PAPRL_MLP_HPP
#define PAPRL_MLP_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "paprl/errors.hpp"
#include "paprl/rng.hpp"

namespace paprl {

struct TrainSample {
  std::vector<double> input;
  std::vector<double> target;
};

// Scratch buffers for repeated forward passes (argmax loops). Reusing the
// activations avoids per-call allocation.
struct MlpWorkspace {
  std::vector<std::vector<double>> activations;
};

// Fully connected network, tanh on hidden layers, identity on the output
// layer. Trained by plain SGD on mean squared error.
class Mlp {
 public:
  Mlp() = default;

  explicit Mlp(std::vector<int> layer_sizes)
      : layer_sizes_(std::move(layer_sizes)) {
    if (layer_sizes_.size() < 2)
      throw Error("mlp needs at least an input and an output layer");
    weights_.resize(num_layers());
    biases_.resize(num_layers());
    for (std::size_t l = 0; l < num_layers(); ++l) {
      weights_[l].assign(static_cast<std::size_t>(rows(l)) * cols(l), 0.0);
      biases_[l].assign(static_cast<std::size_t>(rows(l)), 0.0);
    }
  }

  // Weights uniform in [-scale, scale], biases zero.
  void init_uniform(Rng& rng, double scale) {
    for (auto& w : weights_)
      for (auto& v : w) v = rng.uniform(-scale, scale);
    for (auto& b : biases_)
      for (auto& v : b) v = 0.0;
  }

  // Glorot-style uniform init, used where the network actually has to fit
  // something nontrivial.
  void init_glorot(Rng& rng) {
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const double limit = std::sqrt(6.0 / (cols(l) + rows(l)));
      for (auto& v : weights_[l]) v = rng.uniform(-limit, limit);
      for (auto& v : biases_[l]) v = 0.0;
    }
  }

  std::size_t num_layers() const { return layer_sizes_.size() - 1; }
  int input_dim() const { return layer_sizes_.front(); }
  int output_dim() const { return layer_sizes_.back(); }
  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  std::vector<std::vector<double>>& weights() { return weights_; }
  std::vector<std::vector<double>>& biases() { return biases_; }
  const std::vector<std::vector<double>>& weights() const { return weights_; }
  const std::vector<std::vector<double>>& biases() const { return biases_; }

  std::vector<double> forward(const std::vector<double>& input) const {
    MlpWorkspace ws;
    return forward_into(input, ws);
  }

  // Forward pass using caller-owned scratch; returns the output activation
  // by value (it lives in the workspace, copying keeps the interface safe).
  std::vector<double> forward_into(const std::vector<double>& input,
                                   MlpWorkspace& ws) const {
    run_forward(input, ws);
    return ws.activations.back();
  }

  // Forward returning only the first output component, for scalar heads in
  // hot argmax loops.
  double forward_scalar(const std::vector<double>& input,
                        MlpWorkspace& ws) const {
    run_forward(input, ws);
    return ws.activations.back()[0];
  }

  // One SGD step on the mean squared error over the batch. Returns the
  // batch loss *before* the step.
  double train_minibatch(std::span<const TrainSample> batch,
                         double learning_rate) {
    if (batch.empty()) throw Error("empty minibatch");
    ensure_grad_buffers();
    for (auto& g : grad_w_) std::fill(g.begin(), g.end(), 0.0);
    for (auto& g : grad_b_) std::fill(g.begin(), g.end(), 0.0);

    double loss = 0.0;
    MlpWorkspace ws;
    for (const auto& sample : batch)
      loss += accumulate_gradient(sample, ws);
    loss /= static_cast<double>(batch.size());

    const double step = learning_rate / static_cast<double>(batch.size());
    for (std::size_t l = 0; l < num_layers(); ++l) {
      for (std::size_t i = 0; i < weights_[l].size(); ++i)
        weights_[l][i] -= step * grad_w_[l][i];
      for (std::size_t i = 0; i < biases_[l].size(); ++i)
        biases_[l][i] -= step * grad_b_[l][i];
    }
    for (const auto& w : weights_)
      for (double v : w)
        if (!std::isfinite(v)) throw Error("non-finite weight after update");
    return loss;
  }

  double batch_loss(std::span<const TrainSample> batch) const {
    double loss = 0.0;
    MlpWorkspace ws;
    for (const auto& sample : batch) {
      run_forward(sample.input, ws);
      const auto& out = ws.activations.back();
      if (sample.target.size() != out.size())
        throw DimensionMismatch(out.size(), sample.target.size());
      for (std::size_t i = 0; i < out.size(); ++i) {
        const double d = out[i] - sample.target[i];
        loss += d * d;
      }
    }
    return loss / static_cast<double>(batch.size());
  }

  // Analytic gradient vs central finite differences (h = 1e-5) over every
  // parameter, on the squared-error loss of one sample. Returns the max
  // relative error.
  double gradient_check(const std::vector<double>& input,
                        const std::vector<double>& target) {
    ensure_grad_buffers();
    for (auto& g : grad_w_) std::fill(g.begin(), g.end(), 0.0);
    for (auto& g : grad_b_) std::fill(g.begin(), g.end(), 0.0);
    MlpWorkspace ws;
    TrainSample sample{input, target};
    accumulate_gradient(sample, ws);

    const double h = 1e-5;
    const TrainSample batch[1] = {sample};
    double max_rel = 0.0;
    auto probe = [&](double& param, double analytic) {
      const double saved = param;
      param = saved + h;
      const double up = batch_loss(batch);
      param = saved - h;
      const double down = batch_loss(batch);
      param = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double denom =
          std::max({std::fabs(analytic), std::fabs(numeric), 1e-5});
      max_rel = std::max(max_rel, std::fabs(analytic - numeric) / denom);
    };
    for (std::size_t l = 0; l < num_layers(); ++l) {
      for (std::size_t i = 0; i < weights_[l].size(); ++i)
        probe(weights_[l][i], grad_w_[l][i]);
      for (std::size_t i = 0; i < biases_[l].size(); ++i)
        probe(biases_[l][i], grad_b_[l][i]);
    }
    return max_rel;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["layer_sizes"] = layer_sizes_;
    j["weights"] = weights_;
    j["biases"] = biases_;
    j["activation"] = "tanh";
    return j;
  }

  static Mlp from_json(const nlohmann::json& j) {
    Mlp m(j.at("layer_sizes").get<std::vector<int>>());
    m.weights_ = j.at("weights").get<std::vector<std::vector<double>>>();
    m.biases_ = j.at("biases").get<std::vector<std::vector<double>>>();
    return m;
  }

 private:
  int rows(std::size_t l) const { return layer_sizes_[l + 1]; }
  int cols(std::size_t l) const { return layer_sizes_[l]; }

  void run_forward(const std::vector<double>& input, MlpWorkspace& ws) const {
    if (input.size() != static_cast<std::size_t>(layer_sizes_.front()))
      throw DimensionMismatch(layer_sizes_.front(), input.size());
    ws.activations.resize(layer_sizes_.size());
    ws.activations[0] = input;
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const auto& in = ws.activations[l];
      auto& out = ws.activations[l + 1];
      out.resize(static_cast<std::size_t>(rows(l)));
      const double* w = weights_[l].data();
      const int nc = cols(l);
      for (int r = 0; r < rows(l); ++r) {
        double acc = biases_[l][static_cast<std::size_t>(r)];
        const double* wr = w + static_cast<std::size_t>(r) * nc;
        for (int c = 0; c < nc; ++c) acc += wr[c] * in[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(r)] =
            (l + 1 < num_layers()) ? std::tanh(acc) : acc;
      }
    }
  }

  void ensure_grad_buffers() {
    if (grad_w_.size() == num_layers()) return;
    grad_w_.resize(num_layers());
    grad_b_.resize(num_layers());
    for (std::size_t l = 0; l < num_layers(); ++l) {
      grad_w_[l].assign(weights_[l].size(), 0.0);
      grad_b_[l].assign(biases_[l].size(), 0.0);
    }
  }

  // Backprop for one sample; adds into grad buffers, returns sample loss.
  double accumulate_gradient(const TrainSample& sample, MlpWorkspace& ws) {
    run_forward(sample.input, ws);
    const auto& out = ws.activations.back();
    if (sample.target.size() != out.size())
      throw DimensionMismatch(out.size(), sample.target.size());

    double loss = 0.0;
    std::vector<double> delta(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double d = out[i] - sample.target[i];
      loss += d * d;
      delta[i] = 2.0 * d;  // d(sum of squares)/d(out)
    }

    for (std::size_t l = num_layers(); l-- > 0;) {
      const auto& in = ws.activations[l];
      for (int r = 0; r < rows(l); ++r) {
        const double dr = delta[static_cast<std::size_t>(r)];
        grad_b_[l][static_cast<std::size_t>(r)] += dr;
        double* gw = grad_w_[l].data() + static_cast<std::size_t>(r) * cols(l);
        for (int c = 0; c < cols(l); ++c)
          gw[c] += dr * in[static_cast<std::size_t>(c)];
      }
      if (l == 0) break;
      std::vector<double> prev(static_cast<std::size_t>(cols(l)), 0.0);
      const double* w = weights_[l].data();
      for (int r = 0; r < rows(l); ++r) {
        const double dr = delta[static_cast<std::size_t>(r)];
        const double* wr = w + static_cast<std::size_t>(r) * cols(l);
        for (int c = 0; c < cols(l); ++c)
          prev[static_cast<std::size_t>(c)] += dr * wr[c];
      }
      // through the tanh of layer l's input activation
      for (int c = 0; c < cols(l); ++c) {
        const double a = in[static_cast<std::size_t>(c)];
        prev[static_cast<std::size_t>(c)] *= (1.0 - a * a);
      }
      delta = std::move(prev);
    }
    return loss;
  }

  std::vector<int> layer_sizes_;
  std::vector<std::vector<double>> weights_;
  std::vector<std::vector<double>> biases_;
  std::vector<std::vector<double>> grad_w_;
  std::vector<std::vector<double>> grad_b_;
};

}  // namespace paprl

#endif  // PAPRL_MLP_HPP

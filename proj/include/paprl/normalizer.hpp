#ifndef PAPRL_NORMALIZER_HPP
#define PAPRL_NORMALIZER_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include <json.hpp>

#include "paprl/errors.hpp"

namespace paprl {

// Fixed affine map from known per-dimension ranges to [-1, 1]. Ranges are
// known a priori from the attribute schemas, so no running statistics.
class AffineNormalizer {
 public:
  AffineNormalizer() = default;
  explicit AffineNormalizer(std::vector<std::pair<double, double>> ranges)
      : ranges_(std::move(ranges)) {}

  std::size_t dim() const { return ranges_.size(); }

  double encode_one(std::size_t i, double x) const {
    const auto& [lo, hi] = ranges_[i];
    if (hi == lo) return 0.0;
    return 2.0 * (x - lo) / (hi - lo) - 1.0;
  }

  double decode_one(std::size_t i, double u) const {
    const auto& [lo, hi] = ranges_[i];
    return lo + (u + 1.0) * 0.5 * (hi - lo);
  }

  std::vector<double> encode(const std::vector<double>& x) const {
    if (x.size() != ranges_.size())
      throw DimensionMismatch(ranges_.size(), x.size());
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = encode_one(i, x[i]);
    return out;
  }

  std::vector<double> decode(const std::vector<double>& u) const {
    if (u.size() != ranges_.size())
      throw DimensionMismatch(ranges_.size(), u.size());
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = decode_one(i, u[i]);
    return out;
  }

  const std::vector<std::pair<double, double>>& ranges() const {
    return ranges_;
  }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [lo, hi] : ranges_) arr.push_back({lo, hi});
    return arr;
  }

  static AffineNormalizer from_json(const nlohmann::json& j) {
    std::vector<std::pair<double, double>> ranges;
    for (const auto& e : j) ranges.emplace_back(e.at(0), e.at(1));
    return AffineNormalizer(std::move(ranges));
  }

 private:
  std::vector<std::pair<double, double>> ranges_;
};

}  // namespace paprl

#endif  // PAPRL_NORMALIZER_HPP

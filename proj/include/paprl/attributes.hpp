#ifndef PAPRL_ATTRIBUTES_HPP
#define PAPRL_ATTRIBUTES_HPP

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "paprl/errors.hpp"

namespace paprl {

struct AttributeEntry {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  std::string unit;  // free-form label
};

// Ordered attribute layout of a class; entry order defines the state
// vector layout.
class AttributeSchema {
 public:
  AttributeSchema() = default;
  explicit AttributeSchema(std::vector<AttributeEntry> entries)
      : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].lo > entries_[i].hi)
        throw Error("schema entry '" + entries_[i].name +
                    "' has lower bound > upper bound");
      for (std::size_t j = i + 1; j < entries_.size(); ++j)
        if (entries_[i].name == entries_[j].name)
          throw Error("duplicate schema entry name: " + entries_[i].name);
    }
  }

  std::size_t size() const { return entries_.size(); }
  const AttributeEntry& entry(std::size_t i) const { return entries_[i]; }
  const std::vector<AttributeEntry>& entries() const { return entries_; }

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].name == name) return static_cast<int>(i);
    return -1;
  }

  void validate(const std::vector<double>& values) const {
    if (values.size() != entries_.size())
      throw DimensionMismatch(entries_.size(), values.size());
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (values[i] < entries_[i].lo || values[i] > entries_[i].hi)
        throw OutOfRangeAttribute(entries_[i].name, values[i]);
  }

  std::vector<std::pair<double, double>> ranges() const {
    std::vector<std::pair<double, double>> r;
    r.reserve(entries_.size());
    for (const auto& e : entries_) r.emplace_back(e.lo, e.hi);
    return r;
  }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : entries_)
      arr.push_back({{"name", e.name}, {"lo", e.lo}, {"hi", e.hi},
                     {"unit", e.unit}});
    return arr;
  }

  static AttributeSchema from_json(const nlohmann::json& j) {
    std::vector<AttributeEntry> entries;
    for (const auto& e : j)
      entries.push_back({e.at("name").get<std::string>(),
                         e.at("lo").get<double>(), e.at("hi").get<double>(),
                         e.value("unit", std::string{})});
    return AttributeSchema(std::move(entries));
  }

 private:
  std::vector<AttributeEntry> entries_;
};

// Continuous action box. The null action is the empty vector; neutral
// objects are only ever assigned the null action.
struct ActionSpec {
  int dim = 0;
  std::vector<std::pair<double, double>> bounds;

  static std::vector<double> null_action() { return {}; }

  void validate() const {
    if (dim < 0) throw Error("action dim must be >= 0");
    if (bounds.size() != static_cast<std::size_t>(dim))
      throw DimensionMismatch(static_cast<std::size_t>(dim), bounds.size());
    for (const auto& [lo, hi] : bounds)
      if (lo > hi) throw Error("action bound lower > upper");
  }

  std::vector<double> clamp(std::vector<double> a) const {
    if (a.size() != bounds.size())
      throw DimensionMismatch(bounds.size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] < bounds[i].first) a[i] = bounds[i].first;
      if (a[i] > bounds[i].second) a[i] = bounds[i].second;
    }
    return a;
  }

  nlohmann::json to_json() const {
    nlohmann::json jb = nlohmann::json::array();
    for (const auto& [lo, hi] : bounds) jb.push_back({lo, hi});
    return {{"dim", dim}, {"bounds", jb}};
  }

  static ActionSpec from_json(const nlohmann::json& j) {
    ActionSpec spec;
    spec.dim = j.at("dim").get<int>();
    for (const auto& b : j.at("bounds"))
      spec.bounds.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
    spec.validate();
    return spec;
  }
};

}  // namespace paprl

#endif  // PAPRL_ATTRIBUTES_HPP

#ifndef PAPRL_REPLAY_BUFFER_HPP
#define PAPRL_REPLAY_BUFFER_HPP

#include <cstddef>
#include <vector>

#include "paprl/errors.hpp"
#include "paprl/rng.hpp"

namespace paprl {

// Fixed-capacity ring with FIFO eviction; sampling is uniform with
// replacement.
template <typename T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw Error("replay buffer capacity must be > 0");
  }

  void push(T entry) {
    if (entries_.size() < capacity_) {
      entries_.push_back(std::move(entry));
    } else {
      entries_[next_] = std::move(entry);
    }
    next_ = (next_ + 1) % capacity_;
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  const T& operator[](std::size_t i) const { return entries_[i]; }

  std::vector<T> sample(std::size_t k, Rng& rng) const {
    if (entries_.empty()) throw EmptyBuffer();
    std::vector<T> batch;
    batch.reserve(k);
    for (std::size_t i = 0; i < k; ++i)
      batch.push_back(entries_[rng.uniform_index(entries_.size())]);
    return batch;
  }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<T> entries_;
};

}  // namespace paprl

#endif  // PAPRL_REPLAY_BUFFER_HPP

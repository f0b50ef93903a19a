#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gmocp/rng.hpp"

namespace gmocp {

// Append-only multiset of nonconformity scores with order statistics.
// Backing structure is a treap indexed by subtree size, giving O(log n)
// insert, k-th smallest, and strict-rank queries; both the threshold and
// the optimal-miscoverage computation are rank lookups on this index.
// Priorities come from an internal counter, so the structure is fully
// deterministic and never touches the run's RNG streams.
class ScoreIndex {
 public:
  ScoreIndex() = default;

  void reserve(std::size_t n) { nodes_.reserve(n); }

  std::size_t size() const noexcept { return root_ == kNil ? 0 : nodes_[root_].count; }

  bool empty() const noexcept { return root_ == kNil; }

  void insert(double value) {
    if (!(value == value)) throw std::invalid_argument("ScoreIndex: NaN score");
    const std::uint32_t n = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(Node{value, mix64(++prio_state_), kNil, kNil, 1});
    auto [lo, hi] = split_below(root_, value);
    root_ = merge(merge(lo, n), hi);
  }

  // k-th smallest element, 1-based.
  double kth_smallest(std::size_t k) const {
    if (k < 1 || k > size()) throw std::out_of_range("ScoreIndex::kth_smallest: k out of range");
    std::uint32_t cur = root_;
    while (true) {
      const Node& nd = nodes_[cur];
      const std::size_t left = count(nd.left);
      if (k <= left) {
        cur = nd.left;
      } else if (k == left + 1) {
        return nd.key;
      } else {
        k -= left + 1;
        cur = nd.right;
      }
    }
  }

  // Number of stored scores strictly below value.
  std::size_t count_less(double value) const {
    std::size_t acc = 0;
    std::uint32_t cur = root_;
    while (cur != kNil) {
      const Node& nd = nodes_[cur];
      if (nd.key < value) {
        acc += count(nd.left) + 1;
        cur = nd.right;
      } else {
        cur = nd.left;
      }
    }
    return acc;
  }

 private:
  static constexpr std::uint32_t kNil = 0xffffffffu;

  struct Node {
    double key;
    std::uint64_t prio;
    std::uint32_t left;
    std::uint32_t right;
    std::uint32_t count;
  };

  std::size_t count(std::uint32_t idx) const { return idx == kNil ? 0 : nodes_[idx].count; }

  void pull(std::uint32_t idx) {
    Node& nd = nodes_[idx];
    nd.count = 1 + static_cast<std::uint32_t>(count(nd.left) + count(nd.right));
  }

  // Splits into (keys < value, keys >= value).
  std::pair<std::uint32_t, std::uint32_t> split_below(std::uint32_t idx, double value) {
    if (idx == kNil) return {kNil, kNil};
    Node& nd = nodes_[idx];
    if (nd.key < value) {
      auto [lo, hi] = split_below(nd.right, value);
      nd.right = lo;
      pull(idx);
      return {idx, hi};
    }
    auto [lo, hi] = split_below(nd.left, value);
    nd.left = hi;
    pull(idx);
    return {lo, idx};
  }

  std::uint32_t merge(std::uint32_t a, std::uint32_t b) {
    if (a == kNil) return b;
    if (b == kNil) return a;
    if (nodes_[a].prio > nodes_[b].prio) {
      nodes_[a].right = merge(nodes_[a].right, b);
      pull(a);
      return a;
    }
    nodes_[b].left = merge(a, nodes_[b].left);
    pull(b);
    return b;
  }

  std::vector<Node> nodes_;
  std::uint32_t root_ = kNil;
  std::uint64_t prio_state_ = 0x6d6f63702d696478ULL;
};

}  // namespace gmocp

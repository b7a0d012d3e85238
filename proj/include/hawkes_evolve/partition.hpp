#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "hawkes_evolve/errors.hpp"
#include "hawkes_evolve/rng.hpp"

namespace hawkes_evolve {

// Population partition X_t: occupied fitness sites x in [0, 1] with counts
// k >= 1. Stored as a treap ordered by fitness with subtree sums, so insert,
// removal, weighted sampling and the L/R split all cost O(log l).
class FitnessPartition {
 public:
  struct Site {
    double fitness;
    std::int64_t count;
    friend bool operator==(const Site&, const Site&) = default;
  };

  bool empty() const noexcept { return root_ == kNil; }
  std::int64_t total() const noexcept { return root_ == kNil ? 0 : nodes_[root_].sum; }
  std::size_t site_count() const noexcept { return root_ == kNil ? 0 : nodes_[root_].sites; }

  std::int64_t count_at(double fitness) const {
    const int n = find(fitness);
    return n == kNil ? 0 : nodes_[n].count;
  }

  // Adds `count` individuals at `fitness`; an existing site is incremented.
  void add(double fitness, std::int64_t count = 1) {
    if (!(fitness >= 0.0 && fitness <= 1.0)) throw DomainError("FitnessPartition: fitness outside [0, 1]");
    if (count < 1) throw DomainError("FitnessPartition: count must be >= 1");
    if (find(fitness) != kNil) {
      adjust_path(fitness, count);
      return;
    }
    const int n = allocate(fitness, count);
    auto [lo, hi] = split_less(root_, fitness);
    root_ = merge(merge(lo, n), hi);
  }

  // Removes one individual from the lowest-fitness site. Returns the site's
  // fitness and whether the site vanished.
  std::pair<double, bool> remove_one_at_min() {
    if (empty()) throw PreconditionViolation("FitnessPartition: removal from an empty partition");
    int n = root_;
    while (nodes_[n].left != kNil) n = nodes_[n].left;
    const double x = nodes_[n].key;
    if (nodes_[n].count > 1) {
      adjust_path(x, -1);
      return {x, false};
    }
    erase(x);
    return {x, true};
  }

  std::optional<double> min_fitness() const {
    if (empty()) return std::nullopt;
    int n = root_;
    while (nodes_[n].left != kNil) n = nodes_[n].left;
    return nodes_[n].key;
  }

  // Site picked with probability k_i / N: the site whose cumulative count
  // (in fitness order) first exceeds u * N. u in [0, 1).
  double site_by_weight(double u) const {
    if (empty()) throw PreconditionViolation("FitnessPartition: sampling from an empty partition");
    if (!(u >= 0.0 && u < 1.0)) throw DomainError("FitnessPartition: u must lie in [0, 1)");
    auto target = static_cast<std::int64_t>(u * static_cast<double>(total()));
    int n = root_;
    for (;;) {
      const Node& node = nodes_[n];
      const std::int64_t left = sum_of(node.left);
      if (target < left) {
        n = node.left;
      } else if (target < left + node.count) {
        return node.key;
      } else {
        target -= left + node.count;
        n = node.right;
      }
    }
  }

  // Individuals with fitness <= f.
  std::int64_t count_at_most(double f) const {
    std::int64_t acc = 0;
    for (int n = root_; n != kNil;) {
      const Node& node = nodes_[n];
      if (node.key <= f) {
        acc += sum_of(node.left) + node.count;
        n = node.right;
      } else {
        n = node.left;
      }
    }
    return acc;
  }

  // Occupied sites with fitness <= f.
  std::size_t sites_at_most(double f) const {
    std::size_t acc = 0;
    for (int n = root_; n != kNil;) {
      const Node& node = nodes_[n];
      if (node.key <= f) {
        acc += sites_of(node.left) + 1;
        n = node.right;
      } else {
        n = node.left;
      }
    }
    return acc;
  }

  // Sites in increasing fitness order.
  std::vector<Site> sites() const {
    std::vector<Site> out;
    out.reserve(site_count());
    std::vector<int> stack;
    int n = root_;
    while (n != kNil || !stack.empty()) {
      while (n != kNil) {
        stack.push_back(n);
        n = nodes_[n].left;
      }
      n = stack.back();
      stack.pop_back();
      out.push_back({nodes_[n].key, nodes_[n].count});
      n = nodes_[n].right;
    }
    return out;
  }

 private:
  static constexpr int kNil = -1;

  struct Node {
    double key;
    std::int64_t count;
    std::uint64_t priority;
    int left = kNil;
    int right = kNil;
    std::int64_t sum = 0;
    std::size_t sites = 1;
  };

  std::int64_t sum_of(int n) const { return n == kNil ? 0 : nodes_[n].sum; }
  std::size_t sites_of(int n) const { return n == kNil ? 0 : nodes_[n].sites; }

  void pull(int n) {
    Node& node = nodes_[n];
    node.sum = node.count + sum_of(node.left) + sum_of(node.right);
    node.sites = 1 + sites_of(node.left) + sites_of(node.right);
  }

  int find(double key) const {
    int n = root_;
    while (n != kNil && nodes_[n].key != key) n = key < nodes_[n].key ? nodes_[n].left : nodes_[n].right;
    return n;
  }

  // Key must be present.
  void adjust_path(double key, std::int64_t delta) {
    int n = root_;
    for (;;) {
      nodes_[n].sum += delta;
      if (nodes_[n].key == key) {
        nodes_[n].count += delta;
        return;
      }
      n = key < nodes_[n].key ? nodes_[n].left : nodes_[n].right;
    }
  }

  int allocate(double key, std::int64_t count) {
    Node node{key, count, priorities_(), kNil, kNil, count, 1};
    if (!free_.empty()) {
      const int n = free_.back();
      free_.pop_back();
      nodes_[n] = node;
      return n;
    }
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }

  // (keys < key, keys >= key)
  std::pair<int, int> split_less(int n, double key) {
    if (n == kNil) return {kNil, kNil};
    if (nodes_[n].key < key) {
      auto [lo, hi] = split_less(nodes_[n].right, key);
      nodes_[n].right = lo;
      pull(n);
      return {n, hi};
    }
    auto [lo, hi] = split_less(nodes_[n].left, key);
    nodes_[n].left = hi;
    pull(n);
    return {lo, n};
  }

  int merge(int a, int b) {
    if (a == kNil) return b;
    if (b == kNil) return a;
    if (nodes_[a].priority > nodes_[b].priority) {
      nodes_[a].right = merge(nodes_[a].right, b);
      pull(a);
      return a;
    }
    nodes_[b].left = merge(a, nodes_[b].left);
    pull(b);
    return b;
  }

  void erase(double key) { root_ = erase_from(root_, key); }

  int erase_from(int n, double key) {
    if (nodes_[n].key == key) {
      free_.push_back(n);
      return merge(nodes_[n].left, nodes_[n].right);
    }
    if (key < nodes_[n].key) {
      nodes_[n].left = erase_from(nodes_[n].left, key);
    } else {
      nodes_[n].right = erase_from(nodes_[n].right, key);
    }
    pull(n);
    return n;
  }

  std::vector<Node> nodes_;
  std::vector<int> free_;
  int root_ = kNil;
  CounterRng priorities_{0x7265617074ULL, 0};
};

}  // namespace hawkes_evolve

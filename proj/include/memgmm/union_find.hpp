#pragma once

#include <numeric>
#include <utility>
#include <vector>

#include "memgmm/types.hpp"

namespace memgmm {

/// Disjoint sets with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(Index n) : parent_(static_cast<size_t>(n)), size_(static_cast<size_t>(n), 1), count_(n) {
    std::iota(parent_.begin(), parent_.end(), Index{0});
  }

  Index find(Index x) {
    while (parent_[static_cast<size_t>(x)] != x) {
      auto& p = parent_[static_cast<size_t>(x)];
      p = parent_[static_cast<size_t>(p)];
      x = p;
    }
    return x;
  }

  bool unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[static_cast<size_t>(a)] < size_[static_cast<size_t>(b)]) std::swap(a, b);
    parent_[static_cast<size_t>(b)] = a;
    size_[static_cast<size_t>(a)] += size_[static_cast<size_t>(b)];
    --count_;
    return true;
  }

  bool same(Index a, Index b) { return find(a) == find(b); }
  Index count() const { return count_; }

 private:
  std::vector<Index> parent_;
  std::vector<Index> size_;
  Index count_;
};

}  // namespace memgmm

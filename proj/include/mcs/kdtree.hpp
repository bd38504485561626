#pragma once

// Exact nearest-neighbour k-d tree over the rows of a matrix.
//
// Ties are resolved toward the lowest row index, so query results agree
// exactly with a linear scan that keeps the first minimiser.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "mcs/types.hpp"

namespace mcs {

class KdTree {
 public:
  struct Hit {
    Eigen::Index index = -1;
    double squared_distance = std::numeric_limits<double>::infinity();
  };

  KdTree() = default;

  explicit KdTree(RowMatrix points, Eigen::Index leaf_size = 8)
      : points_(std::move(points)), leaf_size_(std::max<Eigen::Index>(1, leaf_size)) {
    order_.resize(static_cast<std::size_t>(points_.rows()));
    std::iota(order_.begin(), order_.end(), Eigen::Index{0});
    if (points_.rows() > 0) build(0, points_.rows());
  }

  Eigen::Index size() const { return points_.rows(); }
  Eigen::Index dim() const { return points_.cols(); }

  /// Nearest row to `query`; row `exclude` (if >= 0) is skipped.
  template <typename Q>
  Hit nearest(const Q& query, Eigen::Index exclude = -1) const {
    require_dim(query.size(), points_.cols(), "KdTree::nearest");
    Hit best;
    if (nodes_.empty()) return best;
    search(0, query, exclude, best);
    return best;
  }

 private:
  struct Node {
    Eigen::Index begin, end;  // range in order_
    int axis = -1;            // -1 for leaves
    double split = 0.0;
    std::int32_t left = -1, right = -1;
  };

  std::int32_t build(Eigen::Index begin, Eigen::Index end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= leaf_size_) return id;

    // Split on the axis of widest spread.
    int axis = 0;
    double widest = -1.0;
    for (Eigen::Index c = 0; c < points_.cols(); ++c) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (Eigen::Index i = begin; i < end; ++i) {
        const double v = points_(order_[i], c);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > widest) {
        widest = hi - lo;
        axis = static_cast<int>(c);
      }
    }
    if (widest <= 0.0) return id;  // all coincident: stay a leaf

    const Eigen::Index mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](Eigen::Index a, Eigen::Index b) { return points_(a, axis) < points_(b, axis); });
    const double split = points_(order_[mid], axis);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    const auto l = build(begin, mid);
    const auto r = build(mid, end);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  template <typename Q>
  void search(std::int32_t id, const Q& q, Eigen::Index exclude, Hit& best) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (Eigen::Index i = node.begin; i < node.end; ++i) {
        const Eigen::Index idx = order_[i];
        if (idx == exclude) continue;
        const double d2 = squared_distance(points_.row(idx), q);
        if (d2 < best.squared_distance || (d2 == best.squared_distance && idx < best.index)) {
          best.index = idx;
          best.squared_distance = d2;
        }
      }
      return;
    }
    // Left subtree holds coordinates <= split, right holds >= split.
    const double diff = q[node.axis] - node.split;
    const auto near = diff <= 0.0 ? node.left : node.right;
    const auto far = diff <= 0.0 ? node.right : node.left;
    search(near, q, exclude, best);
    // Non-strict: equal bounds may still hide a lower-index tie.
    if (diff * diff <= best.squared_distance) search(far, q, exclude, best);
  }

  RowMatrix points_;
  Eigen::Index leaf_size_ = 8;
  std::vector<Eigen::Index> order_;
  std::vector<Node> nodes_;
};

/// Linear-scan exact nearest row, lowest index on ties.
template <typename M, typename Q>
inline KdTree::Hit nearest_row(const M& rows, const Q& query, Eigen::Index exclude = -1) {
  KdTree::Hit best;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    if (i == exclude) continue;
    const double d2 = squared_distance(rows.row(i), query);
    if (d2 < best.squared_distance) {
      best.index = i;
      best.squared_distance = d2;
    }
  }
  return best;
}

}  // namespace mcs

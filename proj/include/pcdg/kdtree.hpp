#pragma once

#include <vector>

#include "pcdg/types.hpp"

namespace pcdg {

/// Exact k-nearest-neighbor search over a fixed set of 3D points.
/// Median-split tree with leaf buckets; queries are read-only.
class KdTree {
  public:
    KdTree() = default;
    explicit KdTree(std::vector<Vec3> points);

    std::size_t size() const { return points_.size(); }
    const std::vector<Vec3>& points() const { return points_; }

    /// Indices of the k nearest points, sorted by increasing distance.
    std::vector<int> knn(const Vec3& query, int k) const;
    /// Indices of all points within distance r, sorted by distance.
    std::vector<int> radius_indices(const Vec3& query, double r) const;
    int nearest(const Vec3& query) const;
    double nearest_distance(const Vec3& query) const;

  private:
    struct Node {
        int left = -1, right = -1;
        int begin = 0, end = 0; // leaf range into order_
        int axis = 0;
        double split = 0.0;
    };

    int build(int begin, int end);
    void search(int node, const Vec3& query, int k,
                std::vector<std::pair<double, int>>& heap) const;
    void search_radius(int node, const Vec3& query, double r2,
                       std::vector<int>& out) const;

    std::vector<Vec3> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

} // namespace pcdg

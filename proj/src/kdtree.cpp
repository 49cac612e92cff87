#include "pcdg/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pcdg {

namespace {
constexpr int kLeafSize = 16;
}

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    if (!points_.empty()) root_ = build(0, int(points_.size()));
}

int KdTree::build(int begin, int end) {
    Node node;
    node.begin = begin;
    node.end = end;
    if (end - begin > kLeafSize) {
        Vec3 lo = points_[order_[begin]], hi = lo;
        for (int i = begin; i < end; ++i) {
            lo = lo.cwiseMin(points_[order_[i]]);
            hi = hi.cwiseMax(points_[order_[i]]);
        }
        int axis = 0;
        (hi - lo).maxCoeff(&axis);
        int mid = (begin + end) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
        node.axis = axis;
        node.split = points_[order_[mid]][axis];
        int self = int(nodes_.size());
        nodes_.push_back(node);
        int left = build(begin, mid);
        int right = build(mid, end);
        nodes_[self].left = left;
        nodes_[self].right = right;
        return self;
    }
    nodes_.push_back(node);
    return int(nodes_.size()) - 1;
}

void KdTree::search(int ni, const Vec3& query, int k,
                    std::vector<std::pair<double, int>>& heap) const {
    const Node& node = nodes_[ni];
    if (node.left < 0) {
        for (int i = node.begin; i < node.end; ++i) {
            int idx = order_[i];
            double d2 = (points_[idx] - query).squaredNorm();
            if (int(heap.size()) < k) {
                heap.emplace_back(d2, idx);
                std::push_heap(heap.begin(), heap.end());
            } else if (d2 < heap.front().first) {
                std::pop_heap(heap.begin(), heap.end());
                heap.back() = {d2, idx};
                std::push_heap(heap.begin(), heap.end());
            }
        }
        return;
    }
    double delta = query[node.axis] - node.split;
    int near = delta < 0 ? node.left : node.right;
    int far = delta < 0 ? node.right : node.left;
    search(near, query, k, heap);
    if (int(heap.size()) < k || delta * delta < heap.front().first) search(far, query, k, heap);
}

std::vector<int> KdTree::knn(const Vec3& query, int k) const {
    if (k <= 0 || std::size_t(k) > points_.size())
        throw std::invalid_argument("KdTree::knn: invalid k");
    std::vector<std::pair<double, int>> heap;
    heap.reserve(k + 1);
    search(root_, query, k, heap);
    std::sort(heap.begin(), heap.end());
    std::vector<int> out(heap.size());
    for (std::size_t i = 0; i < heap.size(); ++i) out[i] = heap[i].second;
    return out;
}

void KdTree::search_radius(int ni, const Vec3& query, double r2,
                           std::vector<int>& out) const {
    const Node& node = nodes_[ni];
    if (node.left < 0) {
        for (int i = node.begin; i < node.end; ++i) {
            int idx = order_[i];
            if ((points_[idx] - query).squaredNorm() <= r2) out.push_back(idx);
        }
        return;
    }
    double delta = query[node.axis] - node.split;
    int near = delta < 0 ? node.left : node.right;
    int far = delta < 0 ? node.right : node.left;
    search_radius(near, query, r2, out);
    if (delta * delta <= r2) search_radius(far, query, r2, out);
}

std::vector<int> KdTree::radius_indices(const Vec3& query, double r) const {
    std::vector<int> out;
    if (root_ >= 0 && r >= 0) search_radius(root_, query, r * r, out);
    std::sort(out.begin(), out.end(), [&](int a, int b) {
        return (points_[a] - query).squaredNorm() < (points_[b] - query).squaredNorm();
    });
    return out;
}

int KdTree::nearest(const Vec3& query) const { return knn(query, 1)[0]; }

double KdTree::nearest_distance(const Vec3& query) const {
    return (points_[nearest(query)] - query).norm();
}

} // namespace pcdg

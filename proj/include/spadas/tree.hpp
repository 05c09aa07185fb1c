#pragma once

// Bottom-level index of a single dataset: a binary tree whose nodes carry both
// a bounding ball (centroid, radius) and a bounding box. Built by recursive
// widest-dimension midpoint splits, optionally refined by removing points that
// sit far from their leaf's centroid.

#include <cstdint>
#include <span>
#include <vector>

#include "spadas/core.hpp"

namespace spadas {

class IndexSerializer;

struct TreeNode {
  std::uint32_t begin = 0;  // range of stored points covered by this node
  std::uint32_t end = 0;
  std::int32_t left = -1;
  std::int32_t right = -1;

  bool is_leaf() const { return left < 0; }
  std::uint32_t count() const { return end - begin; }
};

class DatasetTree {
 public:
  DatasetTree() = default;

  /// Builds over `coords` (row-major, `dims` per point). Leaves hold at most
  /// `leaf_capacity` points unless every point in them is identical. When
  /// `radius_ledger` is non-null each leaf radius is appended to it.
  DatasetTree(std::span<const double> coords, std::size_t dims,
              std::size_t metric_dims, std::size_t leaf_capacity,
              std::vector<double>* radius_ledger = nullptr);

  /// Points that a refinement with threshold `r_prime` would drop, as source
  /// indices. Only leaves with radius > r_prime lose points.
  std::vector<std::uint32_t> outliers_for(double r_prime) const;

  /// Drops the points returned by outliers_for, deletes emptied leaves and
  /// recomputes every surviving node's ball and box. When every point would
  /// go, nothing is removed. Returns the number of points removed.
  std::size_t refine(double r_prime);

  std::size_t dims() const { return dims_; }
  std::size_t metric_dims() const { return metric_dims_; }
  std::size_t size() const { return source_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  std::int32_t root() const { return root_; }

  const TreeNode& node(std::int32_t n) const { return nodes_[n]; }
  /// Ball centre (first metric_dims coordinates of the node centroid).
  std::span<const double> centre(std::int32_t n) const {
    return {centroid_.data() + n * dims_, metric_dims_};
  }
  /// Centroid over all dims.
  std::span<const double> centroid(std::int32_t n) const {
    return {centroid_.data() + n * dims_, dims_};
  }
  double radius(std::int32_t n) const { return radius_[n]; }
  std::span<const double> lo(std::int32_t n) const { return {lo_.data() + n * dims_, dims_}; }
  std::span<const double> hi(std::int32_t n) const { return {hi_.data() + n * dims_, dims_}; }
  Mbr mbr(std::int32_t n) const;

  /// Stored point j (tree order).
  std::span<const double> point(std::uint32_t j) const {
    return {coords_.data() + std::size_t{j} * dims_, dims_};
  }
  /// Index of stored point j in the dataset the tree was built from.
  std::uint32_t source_index(std::uint32_t j) const { return source_[j]; }

  /// Retained points in source order.
  std::vector<std::uint32_t> retained_sources() const;
  std::vector<double> retained_coords() const;

 private:
  friend class IndexSerializer;

  std::int32_t split(std::uint32_t begin, std::uint32_t end,
                     std::size_t leaf_capacity, std::vector<double>* ledger);
  std::int32_t add_node(std::uint32_t begin, std::uint32_t end);
  void compute_geometry(std::int32_t n);

  std::size_t dims_ = 0;
  std::size_t metric_dims_ = 0;
  std::vector<double> coords_;
  std::vector<std::uint32_t> source_;
  std::vector<TreeNode> nodes_;
  std::vector<double> centroid_;
  std::vector<double> radius_;
  std::vector<double> lo_;
  std::vector<double> hi_;
  std::int32_t root_ = -1;
};

}  // namespace spadas

#pragma once

// The two-level repository index: one DatasetTree per dataset (bottom level)
// and a ball/box tree over the dataset roots (upper level) whose nodes carry
// the union of their datasets' z-order signatures.

#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "spadas/core.hpp"
#include "spadas/grid.hpp"
#include "spadas/tree.hpp"

namespace spadas {

struct IndexParams {
  std::size_t leaf_capacity = 10;
  int theta = 5;
  std::size_t metric_dims = 2;
  bool outlier_removal = true;
};

/// Knee of a descending radius curve: the entry with the largest gap below
/// the chord from the first to the last radius. Returns radii[0] when no gap
/// is positive and +inf for an empty ledger. `radii` must be sorted descending.
double knee_threshold(std::span<const double> radii);

/// A dataset root of the bottom level plus the per-dataset metadata the
/// searches need.
struct IndexedDataset {
  DatasetId id = 0;
  std::string name;
  std::size_t original_count = 0;
  DatasetTree tree;
  ZSignature signature;

  std::size_t removed_count() const { return original_count - tree.size(); }
  std::span<const double> centre() const { return tree.centre(tree.root()); }
  double radius() const { return tree.radius(tree.root()); }
  Mbr mbr() const { return tree.mbr(tree.root()); }
};

/// Upper-level node. Leaves list dataset slots; internal nodes have exactly
/// two children.
struct RepoNode {
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<std::uint32_t> datasets;  // slots into UnifiedIndex::datasets()
  std::vector<double> centroid;         // mean of child dataset centroids, all dims
  double radius = 0.0;
  Mbr mbr;
  ZSignature signature;

  bool is_leaf() const { return left < 0; }
};

class UnifiedIndex {
 public:
  UnifiedIndex() = default;

  static UnifiedIndex build(const Repository& repo, const IndexParams& params = {});

  const IndexParams& params() const { return params_; }
  const Grid& grid() const { return grid_; }
  const Mbr& global_mbr() const { return global_mbr_; }
  std::size_t dims() const { return dims_; }
  double r_prime() const { return r_prime_; }
  std::size_t removed_points() const;
  /// Sorted descending leaf radii gathered while building the bottom level.
  const std::vector<double>& radius_ledger() const { return ledger_; }

  const std::vector<IndexedDataset>& datasets() const { return datasets_; }
  const std::vector<RepoNode>& nodes() const { return nodes_; }
  std::int32_t root() const { return root_; }

  /// Throws when the id is unknown.
  const IndexedDataset& dataset(DatasetId id) const;
  const IndexedDataset* find(DatasetId id) const;

  /// Ball centre of an upper node over metric dims.
  std::span<const double> centre(const RepoNode& n) const {
    return {n.centroid.data(), params_.metric_dims};
  }

  /// Default approximation threshold: width of one grid cell along axis 0.
  double default_epsilon() const;

 private:
  friend class IndexSerializer;

  std::int32_t split_repo(std::vector<std::uint32_t> slots);
  void compute_repo_geometry(RepoNode& node, std::span<const std::uint32_t> slots) const;
  void rebuild_lookup();

  IndexParams params_;
  Grid grid_;
  Mbr global_mbr_;
  std::size_t dims_ = 0;
  double r_prime_ = std::numeric_limits<double>::infinity();
  std::vector<double> ledger_;
  std::vector<IndexedDataset> datasets_;
  std::vector<RepoNode> nodes_;
  std::int32_t root_ = -1;
  std::unordered_map<DatasetId, std::uint32_t> slot_of_;
};

}  // namespace spadas

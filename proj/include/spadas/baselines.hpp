#pragma once

// Linear-scan reference implementations. They share no pruning code with the
// index and serve both as correctness oracles and as benchmark baselines.

#include <cstdint>
#include <span>
#include <vector>

#include "spadas/core.hpp"
#include "spadas/grid.hpp"
#include "spadas/index.hpp"
#include "spadas/search.hpp"

namespace spadas::baseline {

/// Directed Hausdorff distance by the O(|Q|*|D|) double loop.
double brute_hausdorff(const Dataset& query, const Dataset& target, std::size_t metric_dims = 2);

/// Exact top-k by intersecting area, scanning every dataset.
std::vector<DatasetHit> scan_ia_topk(const std::vector<Dataset>& datasets, const Dataset& query,
                                     std::size_t k);

/// Exact top-k by grid-based overlap, scanning every dataset's signature.
std::vector<DatasetHit> scan_gbo_topk(const std::vector<Dataset>& datasets, const Grid& grid,
                                      const Dataset& query, std::size_t k);

/// Exact top-k by directed Hausdorff. Each dataset is first bounded from below
/// using the faces of the query box against the dataset box; only datasets
/// whose bound can beat the current k-th distance get the full double loop.
std::vector<DatasetHit> scan_haus_topk(const std::vector<Dataset>& datasets, const Dataset& query,
                                       std::size_t k, std::size_t metric_dims = 2);

/// Lower bound on H(Q -> D) from the two boxes alone.
double mbr_hausdorff_lower_bound(const Mbr& query_box, const Mbr& target_box,
                                 std::size_t metric_dims);

std::vector<DatasetId> brute_range_datasets(const std::vector<Dataset>& datasets,
                                            const RangeQuery& range);

/// Indices of the points inside `range`, ascending.
std::vector<std::uint32_t> brute_range_points(const Dataset& dataset, const RangeQuery& range);

struct BruteNearest {
  std::uint32_t index = 0;
  double distance = 0.0;
};

/// For every query point the closest target point (lowest index on ties).
std::vector<BruteNearest> brute_nn(const Dataset& query, const Dataset& target,
                                   std::size_t metric_dims = 2);

/// Points with fewer than `min_neighbors` other points within `radius`.
std::vector<std::uint32_t> distance_outliers(const Dataset& dataset, double radius,
                                             std::size_t min_neighbors,
                                             std::size_t metric_dims = 2);

/// The points each dataset keeps after index construction, in original order.
std::vector<Dataset> retained_datasets(const UnifiedIndex& idx);

}  // namespace spadas::baseline

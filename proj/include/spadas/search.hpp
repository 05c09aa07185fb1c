#pragma once

// The four searches over a UnifiedIndex: range-based dataset search, top-k
// exemplar dataset search, range-based point search and nearest-neighbour
// point search.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "spadas/core.hpp"
#include "spadas/index.hpp"
#include "spadas/metrics.hpp"

namespace spadas {

struct DatasetHit {
  DatasetId id = 0;
  double score = 0.0;  // similarity for IA/GBO, distance for Haus
  std::size_t rank = 0;  // 1-based

  friend bool operator==(const DatasetHit&, const DatasetHit&) = default;
};

/// Closed rectangle on the two spatial axes.
struct RangeQuery {
  std::array<double, 2> lo{};
  std::array<double, 2> hi{};

  RangeQuery() = default;
  /// Throws when lo > hi on either axis.
  RangeQuery(std::array<double, 2> lo_corner, std::array<double, 2> hi_corner);

  bool contains(std::span<const double> p) const;
  bool intersects(std::span<const double> box_lo, std::span<const double> box_hi) const;
  bool encloses(std::span<const double> box_lo, std::span<const double> box_hi) const;
};

struct ExemplarOptions {
  /// Approximation threshold for HausApprox; defaults to one grid cell.
  std::optional<double> epsilon;
};

/// Pruning instrumentation for exemplar searches.
struct SearchStats {
  std::vector<std::int32_t> pruned_nodes;     // upper-level nodes never expanded
  std::vector<DatasetId> pruned_datasets;     // dataset roots rejected by their bound
  std::vector<DatasetId> scored_datasets;     // datasets whose exact score was computed
};

struct NearestPair {
  Point query;
  Point nearest;
  double distance = 0.0;
  std::uint32_t query_index = 0;    // position in the query dataset
  std::uint32_t nearest_index = 0;  // position in the original target dataset
};

struct NnOptions {
  /// Run the Hausdorff traversal to termination first and continue from its
  /// queues. The answer is identical either way.
  bool reuse_hausdorff_queues = true;
};

/// Ids (ascending) of datasets whose box intersects `range`.
std::vector<DatasetId> range_dataset_search(const UnifiedIndex& idx, const RangeQuery& range);

/// Top-k datasets most similar to `query` under `metric`, best first, ties by
/// ascending id.
std::vector<DatasetHit> exemplar_search(const UnifiedIndex& idx, const Dataset& query,
                                        MetricKind metric, std::size_t k,
                                        const ExemplarOptions& options = {},
                                        SearchStats* stats = nullptr);

/// Retained points of one dataset inside `range`, in original file order.
std::vector<Point> range_point_search(const UnifiedIndex& idx, DatasetId id,
                                      const RangeQuery& range);

/// Nearest retained point of dataset `id` for every query point, in query
/// order. Ties go to the lowest point index.
std::vector<NearestPair> nn_point_search(const UnifiedIndex& idx, const Dataset& query,
                                         DatasetId id, const NnOptions& options = {});

/// Bottom-level tree for a foreign query dataset, built with the index's
/// leaf capacity and metric_dims and no outlier removal.
DatasetTree query_tree(const UnifiedIndex& idx, const Dataset& query);

}  // namespace spadas

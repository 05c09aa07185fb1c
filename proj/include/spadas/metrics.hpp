#pragma once

// Dataset similarity measures: intersecting area, grid-based overlap and
// directed Hausdorff distance (exact and error-bounded approximate), together
// with the ball-based Hausdorff bounds that drive all pruning.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spadas/core.hpp"
#include "spadas/grid.hpp"
#include "spadas/tree.hpp"

namespace spadas {

/// Overlap area of two boxes on the spatial axes; 0 when disjoint.
double ia(const Mbr& a, const Mbr& b);

/// Number of shared occupied cells.
std::size_t gbo(const ZSignature& q, const ZSignature& d);

struct HausBounds {
  double lb = 0.0;
  double ub = 0.0;
};

/// Bounds on the directed Hausdorff distance from the points of ball 1 to the
/// points of ball 2. Sound when both centres are centroids of their points.
///   lb = max(|o1 o2| - r2, 0),  ub = sqrt(|o1 o2|^2 + r2^2) + r1
HausBounds haus_bounds(std::span<const double> o1, double r1,
                       std::span<const double> o2, double r2);
/// Same bounds from a precomputed centre distance.
HausBounds haus_bounds(double centre_distance, double r1, double r2);

/// Nearest neighbour in the target for one query point.
struct NearestPoint {
  std::uint32_t query = 0;   // source index in the query tree
  std::uint32_t target = 0;  // source index in the target tree
  std::uint32_t target_stored = 0;  // position in the target tree (DatasetTree::point)
  double distance = 0.0;
};

struct TraversalStats {
  std::uint64_t bound_evaluations = 0;
  std::uint64_t dequeues = 0;
};

/// Best-first joint traversal of a query tree and a target tree. A descending
/// queue orders query entities (nodes or single points) by an upper bound on
/// their nearest-neighbour distance; each entity owns an ascending candidate
/// queue of target entities keyed by the Hausdorff lower bound. The entity
/// with the larger radius is refined first.
///
/// The first entity resolved to a point pair gives the exact Hausdorff
/// distance. Draining the queue after that resolves every query point's
/// nearest neighbour, reusing all queue state built so far.
class HausdorffTraversal {
 public:
  /// Both trees must outlive the traversal and share metric_dims.
  HausdorffTraversal(const DatasetTree& query, const DatasetTree& target);

  /// Exact directed Hausdorff distance from query to target. Further calls
  /// return the cached value.
  double hausdorff();
  /// Approximation within 2 * epsilon: stops at the first pair of entities
  /// whose radii are both below epsilon and returns their centre distance.
  /// Consumes the traversal; nearest_neighbours() is unavailable afterwards.
  double approximate_hausdorff(double epsilon);
  /// One entry per query point, ordered by query source index.
  std::vector<NearestPoint> nearest_neighbours();

  const TraversalStats& stats() const { return stats_; }

 private:
  struct Ref {
    std::uint32_t id = 0;
    bool point = false;
  };
  struct Candidate {
    double lb;
    double centre_dist;  // from the owning query entity's centre
    Ref ref;
    std::uint32_t key;   // node id, or source index for points
  };
  struct Entry {
    double ub;
    std::uint64_t seq;
    Ref ref;
    std::vector<Candidate> candidates;  // min-heap on (lb, node-before-point, key)
  };
  struct CandidateAfter {
    bool operator()(const Candidate& a, const Candidate& b) const;
  };
  struct EntryBefore {
    bool operator()(const Entry& a, const Entry& b) const;
  };
  enum class Outcome { Continue, Resolved, Approximated };

  Outcome step(std::optional<double> epsilon, double& value);
  std::span<const double> centre(const DatasetTree& t, Ref r) const;
  double radius(const DatasetTree& t, Ref r) const;
  template <class Fn>
  void for_each_child(const DatasetTree& t, Ref r, Fn&& fn) const;
  void push(Entry entry);

  const DatasetTree* query_;
  const DatasetTree* target_;
  std::size_t metric_dims_;
  std::vector<Entry> queue_;  // max-heap on (ub, -seq)
  std::uint64_t next_seq_ = 0;
  std::vector<NearestPoint> resolved_;
  std::optional<double> hausdorff_;
  bool consumed_ = false;
  TraversalStats stats_;
};

double haus_exact(const DatasetTree& query, const DatasetTree& target,
                  TraversalStats* stats = nullptr);
double haus_approx(const DatasetTree& query, const DatasetTree& target, double epsilon,
                   TraversalStats* stats = nullptr);
/// max(H(a -> b), H(b -> a)).
double haus_symmetric(const DatasetTree& a, const DatasetTree& b);

/// Default epsilon: one grid cell's width along axis 0 of the repository box.
double epsilon_for(const Mbr& repository_box, int theta);

}  // namespace spadas

#include "spadas/search.hpp"

#include <algorithm>
#include <queue>

namespace spadas {

RangeQuery::RangeQuery(std::array<double, 2> lo_corner, std::array<double, 2> hi_corner)
    : lo(lo_corner), hi(hi_corner) {
  for (std::size_t i = 0; i < 2; ++i) {
    if (!(lo[i] <= hi[i])) throw Error("range corners are inverted or not finite");
  }
}

bool RangeQuery::contains(std::span<const double> p) const {
  return p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1];
}

bool RangeQuery::intersects(std::span<const double> box_lo, std::span<const double> box_hi) const {
  for (std::size_t i = 0; i < 2; ++i) {
    if (box_hi[i] < lo[i] || hi[i] < box_lo[i]) return false;
  }
  return true;
}

bool RangeQuery::encloses(std::span<const double> box_lo, std::span<const double> box_hi) const {
  for (std::size_t i = 0; i < 2; ++i) {
    if (box_lo[i] < lo[i] || box_hi[i] > hi[i]) return false;
  }
  return true;
}

DatasetTree query_tree(const UnifiedIndex& idx, const Dataset& query) {
  if (query.empty()) throw Error("query dataset is empty");
  if (query.dims() != idx.dims()) throw DimensionError("query dimensionality differs from the repository");
  return DatasetTree(query.coords(), query.dims(), idx.params().metric_dims,
                     idx.params().leaf_capacity);
}

std::vector<DatasetId> range_dataset_search(const UnifiedIndex& idx, const RangeQuery& range) {
  std::vector<DatasetId> out;
  std::vector<std::int32_t> stack{idx.root()};
  while (!stack.empty()) {
    const RepoNode& node = idx.nodes()[stack.back()];
    stack.pop_back();
    if (!range.intersects(node.mbr.lo, node.mbr.hi)) continue;
    if (!node.is_leaf()) {
      stack.push_back(node.right);
      stack.push_back(node.left);
      continue;
    }
    for (auto slot : node.datasets) {
      const auto& d = idx.datasets()[slot];
      const auto root = d.tree.root();
      if (range.intersects(d.tree.lo(root), d.tree.hi(root))) out.push_back(d.id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

class TopK {
 public:
  TopK(std::size_t k, bool similarity) : k_(k), similarity_(similarity) {}

  bool better(double a_score, DatasetId a_id, double b_score, DatasetId b_id) const {
    if (a_score != b_score) return similarity_ ? a_score > b_score : a_score < b_score;
    return a_id < b_id;
  }

  bool full() const { return hits_.size() == k_; }

  /// True when no dataset bounded by `bound` can enter the list.
  bool excludes(double bound) const {
    if (!full()) return false;
    const double kth = hits_.back().score;
    return similarity_ ? bound < kth : bound > kth;
  }

  void offer(DatasetId id, double score) {
    if (full() && !better(score, id, hits_.back().score, hits_.back().id)) return;
    DatasetHit hit{id, score, 0};
    auto pos = std::find_if(hits_.begin(), hits_.end(), [&](const DatasetHit& h) {
      return better(score, id, h.score, h.id);
    });
    hits_.insert(pos, hit);
    if (hits_.size() > k_) hits_.pop_back();
  }

  std::vector<DatasetHit> take() {
    for (std::size_t i = 0; i < hits_.size(); ++i) hits_[i].rank = i + 1;
    return std::move(hits_);
  }

 private:
  std::size_t k_;
  bool similarity_;
  std::vector<DatasetHit> hits_;
};

struct Item {
  double bound;
  bool is_dataset;
  std::uint32_t ref;  // upper node id, or dataset slot
};

}  // namespace

std::vector<DatasetHit> exemplar_search(const UnifiedIndex& idx, const Dataset& query,
                                        MetricKind metric, std::size_t k,
                                        const ExemplarOptions& options, SearchStats* stats) {
  if (k == 0) throw Error("k must be at least 1");
  if (query.empty()) throw Error("query dataset is empty");
  if (query.dims() != idx.dims()) throw DimensionError("query dimensionality differs from the repository");

  const bool similarity = is_similarity(metric);

  Mbr query_box;
  ZSignature query_sig;
  std::optional<DatasetTree> qtree;
  double epsilon = 0.0;
  switch (metric) {
    case MetricKind::IA:
      query_box = mbr_of(query);
      break;
    case MetricKind::GBO:
      query_sig = clipped_signature_of(query.coords(), query.dims(), idx.grid());
      break;
    case MetricKind::HausApprox:
      epsilon = options.epsilon.value_or(idx.default_epsilon());
      if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
      [[fallthrough]];
    case MetricKind::HausExact:
      qtree = query_tree(idx, query);
      break;
  }

  auto node_bound = [&](const RepoNode& n) -> double {
    switch (metric) {
      case MetricKind::IA: return ia(query_box, n.mbr);
      case MetricKind::GBO: return static_cast<double>(gbo(query_sig, n.signature));
      default:
        return haus_bounds(qtree->centre(qtree->root()), qtree->radius(qtree->root()),
                           idx.centre(n), n.radius).lb;
    }
  };
  auto dataset_bound = [&](const IndexedDataset& d) -> double {
    switch (metric) {
      case MetricKind::IA: return ia(query_box, d.mbr());
      case MetricKind::GBO: return static_cast<double>(gbo(query_sig, d.signature));
      default:
        return haus_bounds(qtree->centre(qtree->root()), qtree->radius(qtree->root()),
                           d.centre(), d.radius()).lb;
    }
  };
  auto dataset_score = [&](const IndexedDataset& d, double bound) -> double {
    switch (metric) {
      case MetricKind::IA:
      case MetricKind::GBO: return bound;
      case MetricKind::HausExact: return haus_exact(*qtree, d.tree);
      case MetricKind::HausApprox: return haus_approx(*qtree, d.tree, epsilon);
    }
    return 0.0;
  };

  auto id_of = [&](const Item& it) -> std::uint32_t {
    return it.is_dataset ? idx.datasets()[it.ref].id : it.ref;
  };
  // Best-first: most promising bound on top.
  auto after = [&](const Item& a, const Item& b) {
    if (a.bound != b.bound) return similarity ? a.bound < b.bound : a.bound > b.bound;
    if (a.is_dataset != b.is_dataset) return a.is_dataset;
    return id_of(a) > id_of(b);
  };
  std::priority_queue<Item, std::vector<Item>, decltype(after)> frontier(after);

  TopK top(k, similarity);
  auto record_pruned = [&](const Item& it) {
    if (!stats) return;
    if (it.is_dataset) {
      stats->pruned_datasets.push_back(idx.datasets()[it.ref].id);
    } else {
      stats->pruned_nodes.push_back(static_cast<std::int32_t>(it.ref));
    }
  };
  auto admit = [&](Item it) {
    if (top.excludes(it.bound)) {
      record_pruned(it);
    } else {
      frontier.push(it);
    }
  };

  admit({node_bound(idx.nodes()[idx.root()]), false, static_cast<std::uint32_t>(idx.root())});
  while (!frontier.empty()) {
    const Item it = frontier.top();
    frontier.pop();
    if (top.excludes(it.bound)) {
      record_pruned(it);
      continue;
    }
    if (it.is_dataset) {
      const auto& d = idx.datasets()[it.ref];
      top.offer(d.id, dataset_score(d, it.bound));
      if (stats) stats->scored_datasets.push_back(d.id);
      continue;
    }
    const RepoNode& node = idx.nodes()[it.ref];
    if (node.is_leaf()) {
      for (auto slot : node.datasets) admit({dataset_bound(idx.datasets()[slot]), true, slot});
    } else {
      admit({node_bound(idx.nodes()[node.left]), false, static_cast<std::uint32_t>(node.left)});
      admit({node_bound(idx.nodes()[node.right]), false, static_cast<std::uint32_t>(node.right)});
    }
  }
  return top.take();
}

std::vector<Point> range_point_search(const UnifiedIndex& idx, DatasetId id,
                                      const RangeQuery& range) {
  const DatasetTree& tree = idx.dataset(id).tree;
  std::vector<std::uint32_t> hits;
  std::vector<std::int32_t> stack{tree.root()};
  while (!stack.empty()) {
    const auto n = stack.back();
    stack.pop_back();
    if (!range.intersects(tree.lo(n), tree.hi(n))) continue;
    const TreeNode& node = tree.node(n);
    if (range.encloses(tree.lo(n), tree.hi(n))) {
      for (auto j = node.begin; j < node.end; ++j) hits.push_back(j);
    } else if (node.is_leaf()) {
      for (auto j = node.begin; j < node.end; ++j) {
        if (range.contains(tree.point(j))) hits.push_back(j);
      }
    } else {
      stack.push_back(node.right);
      stack.push_back(node.left);
    }
  }
  std::sort(hits.begin(), hits.end(), [&](auto a, auto b) {
    return tree.source_index(a) < tree.source_index(b);
  });
  std::vector<Point> out;
  out.reserve(hits.size());
  for (auto j : hits) {
    const auto p = tree.point(j);
    out.emplace_back(std::vector<double>(p.begin(), p.end()));
  }
  return out;
}

std::vector<NearestPair> nn_point_search(const UnifiedIndex& idx, const Dataset& query,
                                         DatasetId id, const NnOptions& options) {
  const DatasetTree& target = idx.dataset(id).tree;
  const DatasetTree qtree = query_tree(idx, query);
  HausdorffTraversal traversal(qtree, target);
  if (options.reuse_hausdorff_queues) traversal.hausdorff();
  const auto nearest = traversal.nearest_neighbours();

  std::vector<NearestPair> out;
  out.reserve(nearest.size());
  for (const auto& nn : nearest) {
    const auto q = query.point(nn.query);
    const auto p = target.point(nn.target_stored);
    out.push_back({Point(std::vector<double>(q.begin(), q.end())),
                   Point(std::vector<double>(p.begin(), p.end())), nn.distance, nn.query,
                   nn.target});
  }
  return out;
}

}  // namespace spadas

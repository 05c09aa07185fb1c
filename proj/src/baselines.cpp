#include "spadas/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace spadas::baseline {

namespace {

double dist(std::span<const double> a, std::span<const double> b, std::size_t metric_dims) {
  double sum = 0.0;
  for (std::size_t i = 0; i < metric_dims; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

Mbr box_of(const Dataset& d) {
  Mbr box{std::vector<double>(d.point(0).begin(), d.point(0).end()),
          std::vector<double>(d.point(0).begin(), d.point(0).end())};
  for (std::size_t i = 1; i < d.size(); ++i) {
    const auto p = d.point(i);
    for (std::size_t a = 0; a < d.dims(); ++a) {
      box.lo[a] = std::min(box.lo[a], p[a]);
      box.hi[a] = std::max(box.hi[a], p[a]);
    }
  }
  return box;
}

std::vector<DatasetHit> rank(std::vector<DatasetHit> all, std::size_t k, bool similarity) {
  std::sort(all.begin(), all.end(), [&](const DatasetHit& a, const DatasetHit& b) {
    if (a.score != b.score) return similarity ? a.score > b.score : a.score < b.score;
    return a.id < b.id;
  });
  if (all.size() > k) all.resize(k);
  for (std::size_t i = 0; i < all.size(); ++i) all[i].rank = i + 1;
  return all;
}

void require_k(std::size_t k) {
  if (k == 0) throw Error("k must be at least 1");
}

}  // namespace

double brute_hausdorff(const Dataset& query, const Dataset& target, std::size_t metric_dims) {
  if (query.empty() || target.empty()) throw Error("Hausdorff needs non-empty point sets");
  double worst = 0.0;
  for (std::size_t i = 0; i < query.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < target.size(); ++j) {
      best = std::min(best, dist(query.point(i), target.point(j), metric_dims));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

std::vector<DatasetHit> scan_ia_topk(const std::vector<Dataset>& datasets, const Dataset& query,
                                     std::size_t k) {
  require_k(k);
  const Mbr q = box_of(query);
  std::vector<DatasetHit> all;
  for (const auto& d : datasets) {
    const Mbr b = box_of(d);
    const double w = std::min(q.hi[0], b.hi[0]) - std::max(q.lo[0], b.lo[0]);
    const double h = std::min(q.hi[1], b.hi[1]) - std::max(q.lo[1], b.lo[1]);
    all.push_back({d.id(), (w > 0.0 && h > 0.0) ? w * h : 0.0, 0});
  }
  return rank(std::move(all), k, true);
}

std::vector<DatasetHit> scan_gbo_topk(const std::vector<Dataset>& datasets, const Grid& grid,
                                      const Dataset& query, std::size_t k) {
  require_k(k);
  auto cells = [&](const Dataset& d) {
    std::unordered_set<CellId> out;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (const auto c = grid.try_cell_of(d.point(i))) out.insert(morton_encode(c->x, c->y, grid.theta()));
    }
    return out;
  };
  const auto q = cells(query);
  std::vector<DatasetHit> all;
  for (const auto& d : datasets) {
    std::size_t shared = 0;
    for (auto c : cells(d)) shared += q.count(c);
    all.push_back({d.id(), static_cast<double>(shared), 0});
  }
  return rank(std::move(all), k, true);
}

double mbr_hausdorff_lower_bound(const Mbr& query_box, const Mbr& target_box,
                                 std::size_t metric_dims) {
  // Every face of the query box touches at least one query point, and that
  // point is at least the face-to-box distance away from any target point.
  double best = 0.0;
  for (std::size_t axis = 0; axis < metric_dims; ++axis) {
    for (int side = 0; side < 2; ++side) {
      double sum = 0.0;
      for (std::size_t a = 0; a < metric_dims; ++a) {
        double flo = query_box.lo[a], fhi = query_box.hi[a];
        if (a == axis) flo = fhi = side == 0 ? query_box.lo[a] : query_box.hi[a];
        double gap = 0.0;
        if (fhi < target_box.lo[a]) gap = target_box.lo[a] - fhi;
        else if (target_box.hi[a] < flo) gap = flo - target_box.hi[a];
        sum += gap * gap;
      }
      best = std::max(best, std::sqrt(sum));
    }
  }
  return best;
}

std::vector<DatasetHit> scan_haus_topk(const std::vector<Dataset>& datasets, const Dataset& query,
                                       std::size_t k, std::size_t metric_dims) {
  require_k(k);
  const Mbr q = box_of(query);
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    order.emplace_back(mbr_hausdorff_lower_bound(q, box_of(datasets[i]), metric_dims), i);
  }
  std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return datasets[a.second].id() < datasets[b.second].id();
  });
  std::vector<DatasetHit> kept;
  for (const auto& [bound, i] : order) {
    if (kept.size() == k && bound > kept.back().score) break;
    kept.push_back({datasets[i].id(), brute_hausdorff(query, datasets[i], metric_dims), 0});
    kept = rank(std::move(kept), k, false);
  }
  return kept;
}

std::vector<DatasetId> brute_range_datasets(const std::vector<Dataset>& datasets,
                                            const RangeQuery& range) {
  std::vector<DatasetId> out;
  for (const auto& d : datasets) {
    const Mbr b = box_of(d);
    if (b.hi[0] >= range.lo[0] && b.lo[0] <= range.hi[0] && b.hi[1] >= range.lo[1] &&
        b.lo[1] <= range.hi[1]) {
      out.push_back(d.id());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint32_t> brute_range_points(const Dataset& dataset, const RangeQuery& range) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < dataset.size(); ++i) {
    const auto p = dataset.point(i);
    if (p[0] >= range.lo[0] && p[0] <= range.hi[0] && p[1] >= range.lo[1] && p[1] <= range.hi[1]) {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<BruteNearest> brute_nn(const Dataset& query, const Dataset& target,
                                   std::size_t metric_dims) {
  std::vector<BruteNearest> out(query.size());
  for (std::size_t i = 0; i < query.size(); ++i) {
    BruteNearest best{0, std::numeric_limits<double>::infinity()};
    for (std::uint32_t j = 0; j < target.size(); ++j) {
      const double d = dist(query.point(i), target.point(j), metric_dims);
      if (d < best.distance) best = {j, d};
    }
    out[i] = best;
  }
  return out;
}

std::vector<std::uint32_t> distance_outliers(const Dataset& dataset, double radius,
                                             std::size_t min_neighbors, std::size_t metric_dims) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < dataset.size(); ++i) {
    std::size_t neighbours = 0;
    for (std::uint32_t j = 0; j < dataset.size() && neighbours < min_neighbors; ++j) {
      if (j != i && dist(dataset.point(i), dataset.point(j), metric_dims) <= radius) ++neighbours;
    }
    if (neighbours < min_neighbors) out.push_back(i);
  }
  return out;
}

std::vector<Dataset> retained_datasets(const UnifiedIndex& idx) {
  std::vector<Dataset> out;
  out.reserve(idx.datasets().size());
  for (const auto& d : idx.datasets()) {
    out.emplace_back(d.id, d.name, idx.dims(), d.tree.retained_coords());
  }
  return out;
}

}  // namespace spadas::baseline

#include "spadas/index.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>

namespace spadas {

double knee_threshold(std::span<const double> radii) {
  if (radii.empty()) return std::numeric_limits<double>::infinity();
  const double first = radii.front();
  const double n = static_cast<double>(radii.size());
  const double step = (first - radii.back()) / n;
  double best_gap = 0.0;
  std::size_t best = 0;
  for (std::size_t i = 1; i + 1 <= radii.size() - 1; ++i) {
    const double gap = first - static_cast<double>(i) * step - radii[i];
    if (gap > best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  return radii[best];
}

UnifiedIndex UnifiedIndex::build(const Repository& repo, const IndexParams& params) {
  if (params.leaf_capacity < 1) throw Error("leaf capacity must be positive");
  if (params.metric_dims < 1 || params.metric_dims > repo.dims()) {
    throw DimensionError("metric_dims must lie in [1, dims]");
  }

  UnifiedIndex idx;
  idx.params_ = params;
  idx.dims_ = repo.dims();
  idx.global_mbr_ = repo.global_mbr();
  idx.grid_ = Grid::over(repo.global_mbr(), params.theta);

  // Bottom level, collecting every leaf radius in one repository-wide ledger.
  std::vector<double> ledger;
  idx.datasets_.reserve(repo.datasets().size());
  for (const auto& d : repo.datasets()) {
    IndexedDataset entry;
    entry.id = d.id();
    entry.name = d.name();
    entry.original_count = d.size();
    entry.tree = DatasetTree(d.coords(), d.dims(), params.metric_dims, params.leaf_capacity, &ledger);
    idx.datasets_.push_back(std::move(entry));
  }
  std::sort(ledger.begin(), ledger.end(), std::greater<>());
  idx.ledger_ = ledger;

  if (params.outlier_removal) {
    idx.r_prime_ = knee_threshold(ledger);
    for (auto& entry : idx.datasets_) {
      const std::size_t before = entry.tree.size();
      if (entry.tree.refine(idx.r_prime_) == 0 && entry.tree.outliers_for(idx.r_prime_).size() == before) {
        std::clog << "warning: outlier removal would empty dataset " << entry.id
                  << " ('" << entry.name << "'); kept all points\n";
      }
    }
  }

  for (auto& entry : idx.datasets_) {
    entry.signature = signature_of(entry.tree.retained_coords(), idx.dims_, idx.grid_);
  }

  std::vector<std::uint32_t> slots(idx.datasets_.size());
  std::iota(slots.begin(), slots.end(), 0u);
  idx.root_ = idx.split_repo(std::move(slots));
  idx.rebuild_lookup();
  return idx;
}

void UnifiedIndex::rebuild_lookup() {
  slot_of_.clear();
  for (std::uint32_t s = 0; s < datasets_.size(); ++s) slot_of_[datasets_[s].id] = s;
}

void UnifiedIndex::compute_repo_geometry(RepoNode& node,
                                         std::span<const std::uint32_t> slots) const {
  node.centroid.assign(dims_, 0.0);
  node.mbr = Mbr{};
  node.signature = ZSignature{};
  for (auto s : slots) {
    const auto& d = datasets_[s];
    const auto c = d.tree.centroid(d.tree.root());
    for (std::size_t i = 0; i < dims_; ++i) node.centroid[i] += c[i];
    node.mbr.expand(d.mbr());
    node.signature = ZSignature::unite(node.signature, d.signature);
  }
  for (auto& c : node.centroid) c /= static_cast<double>(slots.size());
  node.radius = 0.0;
  for (auto s : slots) {
    const auto& d = datasets_[s];
    node.radius = std::max(node.radius,
                           euclidean(centre(node), d.centre(), params_.metric_dims) + d.radius());
  }
}

std::int32_t UnifiedIndex::split_repo(std::vector<std::uint32_t> slots) {
  const auto n = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  compute_repo_geometry(nodes_[n], slots);

  double max_width = -std::numeric_limits<double>::infinity();
  std::size_t axis = 0;
  for (std::size_t i = 0; i < dims_; ++i) {
    const double w = nodes_[n].mbr.hi[i] - nodes_[n].mbr.lo[i];
    if (w > max_width) {
      max_width = w;
      axis = i;
    }
  }
  auto value = [&](std::uint32_t s) { return datasets_[s].tree.centroid(datasets_[s].tree.root())[axis]; };
  const bool identical = std::all_of(slots.begin(), slots.end(), [&](std::uint32_t s) {
    const auto a = datasets_[s].tree.centroid(datasets_[s].tree.root());
    const auto b = datasets_[slots.front()].tree.centroid(datasets_[slots.front()].tree.root());
    return std::equal(a.begin(), a.end(), b.begin());
  });
  if (slots.size() <= params_.leaf_capacity || max_width <= 0.0 || identical) {
    nodes_[n].datasets = std::move(slots);
    return n;
  }

  const double cut = nodes_[n].mbr.lo[axis] + max_width / 2;
  auto mid = std::stable_partition(slots.begin(), slots.end(),
                                   [&](std::uint32_t s) { return value(s) > cut; });
  if (mid == slots.begin() || mid == slots.end()) {
    mid = slots.begin() + static_cast<std::ptrdiff_t>(slots.size() / 2);
    std::nth_element(slots.begin(), mid, slots.end(), [&](std::uint32_t a, std::uint32_t b) {
      const double va = value(a), vb = value(b);
      return va != vb ? va > vb : a < b;
    });
  }
  std::vector<std::uint32_t> left(slots.begin(), mid);
  std::vector<std::uint32_t> right(mid, slots.end());
  const auto l = split_repo(std::move(left));
  const auto r = split_repo(std::move(right));
  nodes_[n].left = l;
  nodes_[n].right = r;
  return n;
}

std::size_t UnifiedIndex::removed_points() const {
  std::size_t total = 0;
  for (const auto& d : datasets_) total += d.removed_count();
  return total;
}

const IndexedDataset* UnifiedIndex::find(DatasetId id) const {
  const auto it = slot_of_.find(id);
  return it == slot_of_.end() ? nullptr : &datasets_[it->second];
}

const IndexedDataset& UnifiedIndex::dataset(DatasetId id) const {
  if (const auto* d = find(id)) return *d;
  throw Error("unknown dataset id " + std::to_string(id));
}

double UnifiedIndex::default_epsilon() const {
  return (global_mbr_.hi[0] - global_mbr_.lo[0]) / std::ldexp(1.0, params_.theta);
}

}  // namespace spadas

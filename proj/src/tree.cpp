#include "spadas/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace spadas {

namespace {

double metric_distance(const double* a, const double* b, std::size_t metric_dims) {
  double sum = 0.0;
  for (std::size_t i = 0; i < metric_dims; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace

DatasetTree::DatasetTree(std::span<const double> coords, std::size_t dims,
                         std::size_t metric_dims, std::size_t leaf_capacity,
                         std::vector<double>* radius_ledger)
    : dims_(dims), metric_dims_(metric_dims) {
  if (dims_ < 2) throw DimensionError("a point needs at least 2 coordinates");
  if (metric_dims_ < 1 || metric_dims_ > dims_) throw DimensionError("metric_dims must lie in [1, dims]");
  if (leaf_capacity < 1) throw Error("leaf capacity must be positive");
  if (coords.empty() || coords.size() % dims_ != 0) throw Error("cannot index an empty point set");

  const std::size_t n = coords.size() / dims_;
  coords_.assign(coords.begin(), coords.end());
  source_.resize(n);
  std::iota(source_.begin(), source_.end(), 0u);

  // While splitting, source_ is a permutation and coords_ is in source order.
  root_ = split(0, static_cast<std::uint32_t>(n), leaf_capacity, radius_ledger);

  std::vector<double> ordered(coords_.size());
  for (std::size_t j = 0; j < n; ++j) {
    std::copy_n(coords.data() + std::size_t{source_[j]} * dims_, dims_, ordered.data() + j * dims_);
  }
  coords_ = std::move(ordered);
}

std::int32_t DatasetTree::add_node(std::uint32_t begin, std::uint32_t end) {
  const auto n = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end, -1, -1});
  centroid_.resize(centroid_.size() + dims_);
  lo_.resize(lo_.size() + dims_);
  hi_.resize(hi_.size() + dims_);
  radius_.push_back(0.0);
  return n;
}

// Geometry is always recomputed from the points under the node, so centres
// are true centroids and radii are exact.
void DatasetTree::compute_geometry(std::int32_t n) {
  const TreeNode& node = nodes_[n];
  double* c = centroid_.data() + n * dims_;
  double* lo = lo_.data() + n * dims_;
  double* hi = hi_.data() + n * dims_;
  std::fill_n(c, dims_, 0.0);
  std::fill_n(lo, dims_, std::numeric_limits<double>::infinity());
  std::fill_n(hi, dims_, -std::numeric_limits<double>::infinity());
  for (std::uint32_t j = node.begin; j < node.end; ++j) {
    const double* p = coords_.data() + std::size_t{source_[j]} * dims_;
    for (std::size_t i = 0; i < dims_; ++i) {
      c[i] += p[i];
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  }
  const double count = node.count();
  for (std::size_t i = 0; i < dims_; ++i) c[i] /= count;
  double r = 0.0;
  for (std::uint32_t j = node.begin; j < node.end; ++j) {
    r = std::max(r, metric_distance(c, coords_.data() + std::size_t{source_[j]} * dims_, metric_dims_));
  }
  radius_[n] = r;
}

std::int32_t DatasetTree::split(std::uint32_t begin, std::uint32_t end,
                                std::size_t leaf_capacity, std::vector<double>* ledger) {
  const std::int32_t n = add_node(begin, end);
  compute_geometry(n);

  double max_width = -std::numeric_limits<double>::infinity();
  std::size_t axis = 0;
  for (std::size_t i = 0; i < dims_; ++i) {
    const double w = hi_[n * dims_ + i] - lo_[n * dims_ + i];
    if (w > max_width) {
      max_width = w;
      axis = i;
    }
  }
  // All-identical points cannot be separated: forced leaf.
  if (end - begin <= leaf_capacity || max_width <= 0.0) {
    if (ledger) ledger->push_back(radius_[n]);
    return n;
  }

  const double cut = lo_[n * dims_ + axis] + max_width / 2;
  auto value = [&](std::uint32_t s) { return coords_[std::size_t{s} * dims_ + axis]; };
  auto first = source_.begin() + begin;
  auto last = source_.begin() + end;
  auto mid = std::stable_partition(first, last, [&](std::uint32_t s) { return value(s) > cut; });
  if (mid == first || mid == last) {
    // Median fallback: larger half goes left, like the midpoint rule.
    mid = first + (end - begin) / 2;
    std::nth_element(first, mid, last, [&](std::uint32_t a, std::uint32_t b) {
      const double va = value(a), vb = value(b);
      return va != vb ? va > vb : a < b;
    });
  }
  const auto split_at = static_cast<std::uint32_t>(mid - source_.begin());
  const std::int32_t left = split(begin, split_at, leaf_capacity, ledger);
  const std::int32_t right = split(split_at, end, leaf_capacity, ledger);
  nodes_[n].left = left;
  nodes_[n].right = right;
  return n;
}

std::vector<std::uint32_t> DatasetTree::outliers_for(double r_prime) const {
  std::vector<std::uint32_t> out;
  for (std::int32_t n = 0; n < static_cast<std::int32_t>(nodes_.size()); ++n) {
    const TreeNode& node = nodes_[n];
    if (!node.is_leaf() || !(radius_[n] > r_prime)) continue;
    const double* c = centroid_.data() + n * dims_;
    for (std::uint32_t j = node.begin; j < node.end; ++j) {
      if (metric_distance(c, coords_.data() + std::size_t{j} * dims_, metric_dims_) > r_prime) {
        out.push_back(source_[j]);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t DatasetTree::refine(double r_prime) {
  const auto drop = outliers_for(r_prime);
  if (drop.empty() || drop.size() == size()) return 0;

  std::vector<char> removed(size(), 0);
  {
    std::vector<char> by_source(size(), 0);
    for (auto s : drop) by_source[s] = 1;
    for (std::uint32_t j = 0; j < size(); ++j) removed[j] = by_source[source_[j]];
  }

  DatasetTree out;
  out.dims_ = dims_;
  out.metric_dims_ = metric_dims_;
  out.coords_.reserve(coords_.size());
  out.source_.reserve(size());

  // Rebuild bottom-up in the same shape, deleting emptied leaves and
  // collapsing internal nodes left with a single child. While rebuilding,
  // out.source_ indexes into out.coords_ positions (identity), so
  // compute_geometry can be reused; the real source ids are patched in after.
  std::vector<std::uint32_t> real_source;
  auto rebuild = [&](auto&& self, std::int32_t n) -> std::int32_t {
    const TreeNode& node = nodes_[n];
    if (node.is_leaf()) {
      const auto begin = static_cast<std::uint32_t>(out.source_.size());
      for (std::uint32_t j = node.begin; j < node.end; ++j) {
        if (removed[j]) continue;
        out.source_.push_back(static_cast<std::uint32_t>(out.source_.size()));
        real_source.push_back(source_[j]);
        const auto p = point(j);
        out.coords_.insert(out.coords_.end(), p.begin(), p.end());
      }
      const auto end = static_cast<std::uint32_t>(out.source_.size());
      if (begin == end) return -1;
      const auto m = out.add_node(begin, end);
      out.compute_geometry(m);
      return m;
    }
    const auto l = self(self, node.left);
    const auto r = self(self, node.right);
    if (l < 0) return r;
    if (r < 0) return l;
    const auto m = out.add_node(out.nodes_[l].begin, out.nodes_[r].end);
    out.nodes_[m].left = l;
    out.nodes_[m].right = r;
    out.compute_geometry(m);
    return m;
  };
  out.root_ = rebuild(rebuild, root_);
  out.source_ = std::move(real_source);
  *this = std::move(out);
  return drop.size();
}

Mbr DatasetTree::mbr(std::int32_t n) const {
  const auto l = lo(n);
  const auto h = hi(n);
  return Mbr{{l.begin(), l.end()}, {h.begin(), h.end()}};
}

std::vector<std::uint32_t> DatasetTree::retained_sources() const {
  auto out = source_;
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> DatasetTree::retained_coords() const {
  std::vector<std::uint32_t> order(size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return source_[a] < source_[b]; });
  std::vector<double> out;
  out.reserve(coords_.size());
  for (auto j : order) {
    const auto p = point(j);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

}  // namespace spadas

#pragma once

// Exhaustive structural checks of a built index. Returns human-readable
// violations; an empty list means the index is sound.

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spadas/index.hpp"

namespace audit {

inline std::vector<std::string> tree(const spadas::DatasetTree& t, std::size_t original_count,
                                     const std::string& label) {
  std::vector<std::string> bad;
  auto fail = [&](const std::string& what) {
    if (bad.size() < 20) bad.push_back(label + ": " + what);
  };
  const std::size_t md = t.metric_dims();

  // Partition: every stored point reached exactly once via the leaves.
  std::vector<int> seen(t.size(), 0);
  std::vector<std::int32_t> stack{t.root()};
  const auto& root = t.node(t.root());
  if (root.begin != 0 || root.end != t.size()) fail("root does not cover all points");
  while (!stack.empty()) {
    const auto n = stack.back();
    stack.pop_back();
    const auto& node = t.node(n);
    if (node.begin >= node.end) fail("empty node " + std::to_string(n));
    if (node.is_leaf()) {
      for (auto j = node.begin; j < node.end; ++j) ++seen[j];
    } else {
      const auto& l = t.node(node.left);
      const auto& r = t.node(node.right);
      if (l.begin != node.begin || l.end != r.begin || r.end != node.end) {
        fail("children of node " + std::to_string(n) + " do not split its range");
      }
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
    // Ball and box containment of every point below this node.
    const double r = t.radius(n);
    const auto c = t.centre(n);
    for (auto j = node.begin; j < node.end; ++j) {
      const auto p = t.point(j);
      double s = 0;
      for (std::size_t a = 0; a < md; ++a) s += (p[a] - c[a]) * (p[a] - c[a]);
      if (std::sqrt(s) > r + 1e-9 * r + 1e-12) fail("point outside ball of node " + std::to_string(n));
      for (std::size_t a = 0; a < t.dims(); ++a) {
        if (p[a] < t.lo(n)[a] || p[a] > t.hi(n)[a]) fail("point outside box of node " + std::to_string(n));
      }
    }
  }
  for (std::size_t j = 0; j < seen.size(); ++j) {
    if (seen[j] != 1) fail("stored point " + std::to_string(j) + " reached " + std::to_string(seen[j]) + " times");
  }
  std::set<std::uint32_t> sources;
  for (std::uint32_t j = 0; j < t.size(); ++j) {
    if (t.source_index(j) >= original_count) fail("source index out of range");
    sources.insert(t.source_index(j));
  }
  if (sources.size() != t.size()) fail("duplicate source index");
  return bad;
}

inline std::vector<std::string> index(const spadas::UnifiedIndex& idx,
                                      const std::vector<spadas::Dataset>& originals) {
  std::vector<std::string> bad;
  auto fail = [&](const std::string& what) {
    if (bad.size() < 40) bad.push_back(what);
  };
  const auto& g = idx.global_mbr();
  const oracle::Box space{g.lo[0], g.lo[1], g.hi[0], g.hi[1]};
  const int theta = idx.params().theta;

  std::vector<std::set<std::uint64_t>> dataset_cells(idx.datasets().size());
  for (std::size_t s = 0; s < idx.datasets().size(); ++s) {
    const auto& d = idx.datasets()[s];
    const auto& orig = originals.at(s);
    if (orig.id() != d.id || orig.size() != d.original_count) fail("dataset slot mismatch");
    for (auto& v : tree(d.tree, d.original_count, "dataset " + std::to_string(d.id))) fail(v);
    // Retained points are genuine points of the original dataset.
    for (std::uint32_t j = 0; j < d.tree.size(); ++j) {
      const auto p = d.tree.point(j);
      const auto q = orig.point(d.tree.source_index(j));
      if (!std::equal(p.begin(), p.end(), q.begin())) fail("stored point differs from source row");
    }
    oracle::Pts kept;
    for (std::uint32_t j = 0; j < d.tree.size(); ++j) kept.emplace_back(d.tree.point(j).begin(), d.tree.point(j).end());
    dataset_cells[s] = oracle::cells(kept, space, theta);
    const std::set<std::uint64_t> have(d.signature.ids().begin(), d.signature.ids().end());
    if (have != dataset_cells[s]) fail("signature of dataset " + std::to_string(d.id) + " differs from its cells");
  }

  // Upper level: every dataset in exactly one leaf; containment and union.
  std::vector<int> owned(idx.datasets().size(), 0);
  std::function<std::vector<std::uint32_t>(std::int32_t)> walk = [&](std::int32_t n) {
    const auto& node = idx.nodes()[n];
    std::vector<std::uint32_t> slots;
    if (node.is_leaf()) {
      slots = node.datasets;
      for (auto s : slots) ++owned[s];
    } else {
      if (!node.datasets.empty()) fail("internal upper node lists datasets");
      slots = walk(node.left);
      const auto r = walk(node.right);
      slots.insert(slots.end(), r.begin(), r.end());
    }
    if (slots.empty()) fail("empty upper node");
    std::set<std::uint64_t> uni;
    const auto c = idx.centre(node);
    const std::size_t md = idx.params().metric_dims;
    for (auto s : slots) {
      uni.insert(dataset_cells[s].begin(), dataset_cells[s].end());
      const auto& t = idx.datasets()[s].tree;
      for (std::uint32_t j = 0; j < t.size(); ++j) {
        const auto p = t.point(j);
        double d2 = 0;
        for (std::size_t a = 0; a < md; ++a) d2 += (p[a] - c[a]) * (p[a] - c[a]);
        if (std::sqrt(d2) > node.radius + 1e-9 * node.radius + 1e-12) fail("point outside upper ball");
        for (std::size_t a = 0; a < idx.dims(); ++a) {
          if (p[a] < node.mbr.lo[a] || p[a] > node.mbr.hi[a]) fail("point outside upper box");
        }
      }
    }
    const std::set<std::uint64_t> have(node.signature.ids().begin(), node.signature.ids().end());
    if (have != uni) fail("upper node signature is not the union of its datasets");
    return slots;
  };
  walk(idx.root());
  for (std::size_t s = 0; s < owned.size(); ++s) {
    if (owned[s] != 1) fail("dataset slot " + std::to_string(s) + " owned " + std::to_string(owned[s]) + " times");
  }
  return bad;
}

}  // namespace audit

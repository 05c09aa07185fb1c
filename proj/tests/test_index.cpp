#include <gtest/gtest.h>

#include <random>
#include <set>

#include "audit.hpp"
#include "oracles.hpp"
#include "spadas/index.hpp"
#include "spadas/io.hpp"

using namespace spadas;

namespace {

std::vector<double> flat(const oracle::Pts& p) {
  std::vector<double> out;
  for (const auto& q : p) out.insert(out.end(), q.begin(), q.end());
  return out;
}

std::vector<Dataset> random_datasets(std::uint64_t seed, std::size_t m, std::size_t lo, std::size_t hi) {
  std::mt19937_64 rng(seed);
  std::vector<Dataset> out;
  for (std::size_t i = 0; i < m; ++i) {
    out.push_back(oracle::to_dataset(oracle::random_points(rng, lo + rng() % (hi - lo + 1), i % 2), static_cast<DatasetId>(i)));
  }
  return out;
}

}  // namespace

TEST(SplitSpace, BelowCapacityIsOneLeaf) {
  std::vector<double> ledger;
  const std::vector<double> c{0, 0, 1, 0, 2, 2, 3, 1, 4, 4};
  const DatasetTree t(c, 2, 2, 10, &ledger);
  EXPECT_EQ(t.node_count(), 1u);
  EXPECT_TRUE(t.node(t.root()).is_leaf());
  ASSERT_EQ(ledger.size(), 1u);
  EXPECT_EQ(ledger[0], t.radius(t.root()));
}

TEST(SplitSpace, UpperHalfGoesLeft) {
  const std::vector<double> c{0, 0, 10, 0};
  const DatasetTree t(c, 2, 2, 1);
  const auto& root = t.node(t.root());
  ASSERT_FALSE(root.is_leaf());
  const auto& l = t.node(root.left);
  const auto& r = t.node(root.right);
  ASSERT_EQ(l.count(), 1u);
  ASSERT_EQ(r.count(), 1u);
  EXPECT_EQ(t.point(l.begin)[0], 10.0);
  EXPECT_EQ(t.point(r.begin)[0], 0.0);
  EXPECT_EQ(t.source_index(l.begin), 1u);
}

TEST(SplitSpace, UniformPointsAudit) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 100);
  std::vector<double> c;
  for (int i = 0; i < 1000; ++i) c.insert(c.end(), {u(rng), u(rng)});
  std::vector<double> ledger;
  const DatasetTree t(c, 2, 2, 10, &ledger);
  EXPECT_TRUE(audit::tree(t, 1000, "uniform").empty());
  std::size_t leaves = 0;
  for (std::size_t n = 0; n < t.node_count(); ++n) {
    if (t.node(n).is_leaf()) {
      ++leaves;
      EXPECT_LE(t.node(n).count(), 10u);
    }
  }
  EXPECT_EQ(ledger.size(), leaves);
  // Centroid is the mean of the contained points.
  double mx = 0, my = 0;
  for (int i = 0; i < 1000; ++i) {
    mx += c[2 * i];
    my += c[2 * i + 1];
  }
  EXPECT_NEAR(t.centre(t.root())[0], mx / 1000, 1e-9);
  EXPECT_NEAR(t.centre(t.root())[1], my / 1000, 1e-9);
}

TEST(SplitSpace, IdenticalPointsForceLeaf) {
  std::vector<double> c;
  for (int i = 0; i < 50; ++i) c.insert(c.end(), {3, 3});
  const DatasetTree t(c, 2, 2, 10);
  EXPECT_EQ(t.node_count(), 1u);
  EXPECT_EQ(t.radius(t.root()), 0.0);
}

TEST(SplitSpace, SkewedDataFallsBackToMedian) {
  // One far point plus a tight duplicate-heavy cluster: the midpoint split
  // isolates the far point, then the cluster's halves must keep progressing.
  std::vector<double> c{1000, 0};
  for (int i = 0; i < 40; ++i) c.insert(c.end(), {0, 0});
  for (int i = 0; i < 40; ++i) c.insert(c.end(), {1e-9 * i, 0});
  const DatasetTree t(c, 2, 2, 4);
  EXPECT_TRUE(audit::tree(t, 81, "skewed").empty());
}

TEST(Knee, Examples) {
  const std::vector<double> phi{10, 8, 2, 1, 0};
  EXPECT_EQ(knee_threshold(phi), 2.0);
  EXPECT_EQ(oracle::knee(phi), 2.0);
  const std::vector<double> flat_phi(20, 3.5);
  EXPECT_EQ(knee_threshold(flat_phi), 3.5);
  EXPECT_EQ(knee_threshold(std::vector<double>{1}), 1.0);
  EXPECT_TRUE(std::isinf(knee_threshold(std::vector<double>{})));
}

TEST(Knee, RandomCurvesMatchOracle) {
  std::mt19937_64 rng(12);
  std::exponential_distribution<double> e(0.3);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> r(1 + rng() % 200);
    for (auto& v : r) v = e(rng);
    std::sort(r.rbegin(), r.rend());
    EXPECT_EQ(knee_threshold(r), oracle::knee(r));
  }
}

TEST(Knee, PiecewiseCurveLandsBetweenRegimes) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> big(50, 100), small(0.5, 2);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> r;
    for (int i = 0; i < 5 + static_cast<int>(rng() % 20); ++i) r.push_back(big(rng));
    for (int i = 0; i < 200 + static_cast<int>(rng() % 300); ++i) r.push_back(small(rng));
    std::sort(r.rbegin(), r.rend());
    const double k = knee_threshold(r);
    EXPECT_LT(k, 50.0);
    EXPECT_GE(k, 0.5);
  }
}

TEST(Refine, SmallLeafUntouched) {
  const std::vector<double> c{0, 0, 0.1, 0};
  DatasetTree t(c, 2, 2, 10);
  EXPECT_EQ(t.refine(1.0), 0u);
  EXPECT_EQ(t.size(), 2u);
}

TEST(Refine, FarPointRemoved) {
  std::vector<double> c{0, 0, 0.5, 0, 0, 0.5, -0.5, 0, 50, 0};
  DatasetTree t(c, 2, 2, 10);
  const double before = t.radius(t.root());
  ASSERT_GT(before, 2.0);
  // The centroid sits at (10, 0.1), so the cluster points are also far from it;
  // with r' = 2 every point beyond 2 from the centroid goes.
  const auto out = t.outliers_for(2.0);
  std::set<std::uint32_t> want;
  const double cx = 10.0, cy = 0.1;
  for (std::uint32_t i = 0; i < 5; ++i) {
    if (std::hypot(c[2 * i] - cx, c[2 * i + 1] - cy) > 2.0) want.insert(i);
  }
  EXPECT_EQ(std::set<std::uint32_t>(out.begin(), out.end()), want);
}

TEST(Refine, FarPointRemovedFromCentredLeaf) {
  // Ten symmetric cluster points keep the centroid near the origin.
  std::vector<double> c;
  for (int i = 0; i < 9; ++i) c.insert(c.end(), {std::cos(i * 0.7), std::sin(i * 0.7)});
  c.insert(c.end(), {50, 0});
  DatasetTree t(c, 2, 2, 10);
  const double cx = t.centre(t.root())[0];
  ASSERT_LT(cx, 6.0);
  EXPECT_EQ(t.refine(45.0 - cx), 1u);
  EXPECT_EQ(t.size(), 9u);
  double spread = 0;
  for (std::uint32_t j = 0; j < t.size(); ++j) spread = std::max(spread, std::hypot(t.point(j)[0], t.point(j)[1]));
  EXPECT_LE(t.radius(t.root()), 2 * spread);
  EXPECT_TRUE(audit::tree(t, 10, "refined").empty());
}

TEST(Refine, RecomputesEveryNodeExactly) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    const auto pts = oracle::random_points(rng, 200 + rng() % 300, true);
    std::vector<double> ledger;
    DatasetTree t(flat(pts), 2, 2, 1 + rng() % 12, &ledger);
    std::sort(ledger.rbegin(), ledger.rend());
    t.refine(knee_threshold(ledger));
    for (std::size_t n = 0; n < t.node_count(); ++n) {
      const auto& node = t.node(n);
      double mx = 0, my = 0;
      for (auto j = node.begin; j < node.end; ++j) {
        mx += t.point(j)[0];
        my += t.point(j)[1];
      }
      mx /= node.count();
      my /= node.count();
      double r = 0;
      for (auto j = node.begin; j < node.end; ++j) r = std::max(r, std::hypot(t.point(j)[0] - mx, t.point(j)[1] - my));
      EXPECT_NEAR(t.centre(n)[0], mx, 1e-9 * (1 + std::abs(mx)));
      EXPECT_NEAR(t.centre(n)[1], my, 1e-9 * (1 + std::abs(my)));
      EXPECT_NEAR(t.radius(n), r, 1e-9 * (1 + r));
    }
  }
}

TEST(Refine, RemovedAreExactlyThePrunedPoints) {
  std::mt19937_64 rng(15);
  const auto pts = oracle::random_points(rng, 800, true);
  DatasetTree t(flat(pts), 2, 2, 10);
  const double rp = 1.0;
  const auto predicted = t.outliers_for(rp);
  t.refine(rp);
  std::set<std::uint32_t> kept;
  for (auto s : t.retained_sources()) kept.insert(s);
  std::set<std::uint32_t> removed;
  for (std::uint32_t i = 0; i < 800; ++i) {
    if (!kept.count(i)) removed.insert(i);
  }
  EXPECT_EQ(removed, std::set<std::uint32_t>(predicted.begin(), predicted.end()));
}

TEST(Build, SingleSmallDataset) {
  const Repository repo({Dataset(7, "one", {{0, 0}, {1, 1}, {2, 0}})});
  const auto idx = UnifiedIndex::build(repo);
  ASSERT_EQ(idx.nodes().size(), 1u);
  EXPECT_TRUE(idx.nodes()[idx.root()].is_leaf());
  EXPECT_EQ(idx.nodes()[idx.root()].datasets, (std::vector<std::uint32_t>{0}));
  EXPECT_EQ(idx.dataset(7).tree.node_count(), 1u);
  EXPECT_THROW(idx.dataset(8), Error);
}

TEST(Build, TwoHundredDatasetsAudit) {
  const auto ds = random_datasets(16, 200, 500, 500);
  const auto idx = UnifiedIndex::build(Repository(ds));
  for (const auto& d : ds) EXPECT_NE(idx.find(d.id()), nullptr);
  const auto bad = audit::index(idx, ds);
  EXPECT_TRUE(bad.empty()) << bad.front();
}

TEST(Build, VariedParametersAudit) {
  const auto ds = random_datasets(17, 40, 1, 300);
  for (std::size_t f : {1, 2, 7, 64}) {
    for (int theta : {1, 5, 12}) {
      IndexParams p;
      p.leaf_capacity = f;
      p.theta = theta;
      const auto idx = UnifiedIndex::build(Repository(ds, theta), p);
      const auto bad = audit::index(idx, ds);
      EXPECT_TRUE(bad.empty()) << "f=" << f << " theta=" << theta << ": " << bad.front();
    }
  }
}

TEST(Build, NoRemovalKeepsEveryPoint) {
  const auto ds = random_datasets(18, 30, 10, 300);
  IndexParams p;
  p.outlier_removal = false;
  const auto idx = UnifiedIndex::build(Repository(ds), p);
  EXPECT_EQ(idx.removed_points(), 0u);
  EXPECT_TRUE(std::isinf(idx.r_prime()));
}

TEST(Build, LedgerCoversEveryLeaf) {
  const auto ds = random_datasets(19, 20, 10, 300);
  IndexParams p;
  p.outlier_removal = false;
  const auto idx = UnifiedIndex::build(Repository(ds), p);
  std::vector<double> radii;
  for (const auto& d : idx.datasets()) {
    for (std::size_t n = 0; n < d.tree.node_count(); ++n) {
      if (d.tree.node(n).is_leaf()) radii.push_back(d.tree.radius(n));
    }
  }
  std::sort(radii.rbegin(), radii.rend());
  EXPECT_EQ(idx.radius_ledger(), radii);
}

TEST(Build, WholeDatasetIsNeverEmptied) {
  // Two far-apart points form a single leaf with a radius far above every
  // other leaf; removal would drop both.
  std::vector<Dataset> ds = random_datasets(20, 20, 200, 300);
  ds.push_back(Dataset(999, "pair", {{0, 0}, {900, 900}}));
  const auto idx = UnifiedIndex::build(Repository(ds));
  EXPECT_EQ(idx.dataset(999).tree.size(), 2u);
  EXPECT_TRUE(audit::index(idx, ds).empty());
}

TEST(Build, SignaturesIgnoreRemovedPoints) {
  SyntheticSpec spec;
  spec.datasets = 20;
  spec.points = 1000;
  spec.outlier_rate = 0.01;
  const auto syn = generate_synthetic(spec);
  const auto idx = UnifiedIndex::build(syn.repository);
  ASSERT_GT(idx.removed_points(), 0u);
  for (const auto& d : idx.datasets()) {
    EXPECT_EQ(d.signature, signature_of(d.tree.retained_coords(), 2, idx.grid()));
  }
}

TEST(Build, ThresholdBetweenInlierAndOutlierRegimes) {
  SyntheticSpec spec;
  spec.datasets = 50;
  spec.points = 1000;
  spec.outlier_rate = 0.01;
  spec.seed = 3;
  const auto syn = generate_synthetic(spec);
  IndexParams p;
  p.outlier_removal = false;
  const auto raw = UnifiedIndex::build(syn.repository, p);
  // Leaves of inliers only versus multi-point leaves holding a planted outlier.
  std::vector<double> inlier_leaves, outlier_leaves;
  for (std::size_t s = 0; s < raw.datasets().size(); ++s) {
    const auto& t = raw.datasets()[s].tree;
    const std::set<std::uint32_t> out(syn.outliers[s].begin(), syn.outliers[s].end());
    for (std::size_t n = 0; n < t.node_count(); ++n) {
      const auto& node = t.node(n);
      if (!node.is_leaf()) continue;
      bool has = false;
      for (auto j = node.begin; j < node.end; ++j) has |= out.count(t.source_index(j)) > 0;
      if (!has) inlier_leaves.push_back(t.radius(n));
      else if (node.count() > 1) outlier_leaves.push_back(t.radius(n));
    }
  }
  std::sort(inlier_leaves.begin(), inlier_leaves.end());
  std::sort(outlier_leaves.begin(), outlier_leaves.end());
  ASSERT_FALSE(outlier_leaves.empty());
  const double inlier_median = inlier_leaves[inlier_leaves.size() / 2];
  const double outlier_median = outlier_leaves[outlier_leaves.size() / 2];
  const auto idx = UnifiedIndex::build(syn.repository);
  EXPECT_GT(idx.r_prime(), inlier_median);
  EXPECT_LT(idx.r_prime(), outlier_median);
}

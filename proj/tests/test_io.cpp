#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "spadas/io.hpp"
#include "spadas/search.hpp"

using namespace spadas;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("spadas-io-" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& s) const { return path_ / s; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

fs::path write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(LoadDataset, Examples) {
  TempDir t;
  const auto d = load_dataset(write(t / "a.csv", "1.5,2\n-3,4e2\n"), 2).dataset;
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.point(0)[0], 1.5);
  EXPECT_EQ(d.point(1)[1], 400.0);
  EXPECT_EQ(d.name(), "a");
}

TEST(LoadDataset, HeaderSkippedAndExtraColumnsIgnored) {
  TempDir t;
  const auto l = load_dataset(write(t / "h.csv", "lon,lat,label\n1,2,x\n3,4,y\n"), 2);
  EXPECT_EQ(l.dataset.size(), 2u);
  EXPECT_TRUE(l.rejected.empty());
}

TEST(LoadDataset, BadRowsReportedWithLineNumbers) {
  TempDir t;
  const auto l = load_dataset(write(t / "b.csv", "1,2\nfoo,3\n4\n5,nan\n6,inf\n7,8\n"), 2);
  EXPECT_EQ(l.dataset.size(), 2u);
  ASSERT_EQ(l.rejected.size(), 4u);
  EXPECT_EQ(l.rejected[0].line, 2u);
  EXPECT_EQ(l.rejected[1].line, 3u);
  EXPECT_EQ(l.rejected[2].line, 4u);
  EXPECT_EQ(l.rejected[3].line, 5u);
}

TEST(LoadDataset, TabDelimited) {
  TempDir t;
  const auto d = load_dataset(write(t / "t.tsv", "1\t2\n3\t4\n"), 2).dataset;
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.point(1)[0], 3.0);
}

TEST(LoadDataset, NoValidRowThrows) {
  TempDir t;
  EXPECT_THROW(load_dataset(write(t / "e.csv", "x,y\nfoo,bar\n"), 2), Error);
  EXPECT_THROW(load_dataset(t / "missing.csv", 2), Error);
}

TEST(LoadDataset, LargeFileRoundTrip) {
  TempDir t;
  std::mt19937_64 rng(70);
  const auto pts = oracle::random_points(rng, 100000, true);
  const auto d = oracle::to_dataset(pts, 3);
  write_dataset(t / "big.csv", d);
  const auto back = load_dataset(t / "big.csv", 2).dataset;
  ASSERT_EQ(back.size(), 100000u);
  for (std::size_t i = 0; i < back.size(); i += 997) {
    EXPECT_EQ(back.point(i)[0], pts[i][0]);
    EXPECT_EQ(back.point(i)[1], pts[i][1]);
  }
}

TEST(Manifest, RoundTrip) {
  TempDir t;
  Manifest m;
  m.name = "demo";
  m.theta = 7;
  m.leaf_capacity = 4;
  m.datasets.push_back({5, "five", t / "five.csv", 2});
  m.datasets.push_back({9, "nine", t / "nine.csv", 3});
  save_manifest(t / "m.json", m);
  const auto back = load_manifest(t / "m.json");
  EXPECT_EQ(back.name, "demo");
  EXPECT_EQ(back.theta, 7);
  EXPECT_EQ(back.leaf_capacity, 4u);
  ASSERT_EQ(back.datasets.size(), 2u);
  EXPECT_EQ(back.datasets[1].id, 9u);
  EXPECT_EQ(back.datasets[1].dims, 3u);
  EXPECT_EQ(fs::weakly_canonical(back.datasets[0].path), fs::weakly_canonical(t / "five.csv"));
}

TEST(Manifest, DuplicateIdsRejected) {
  TempDir t;
  write(t / "a.csv", "1,2\n");
  write(t / "m.json", R"({"datasets":[{"id":1,"path":"a.csv"},{"id":1,"path":"a.csv"}]})");
  EXPECT_THROW(load_repository(load_manifest(t / "m.json")), Error);
  write(t / "bad.json", "{not json");
  EXPECT_THROW(load_manifest(t / "bad.json"), Error);
}

TEST(Synthetic, TenInliers) {
  SyntheticSpec s;
  s.datasets = 1;
  s.points = 10;
  const auto r = generate_synthetic(s);
  EXPECT_EQ(r.repository.datasets()[0].size(), 10u);
  EXPECT_TRUE(r.outliers[0].empty());
}

TEST(Synthetic, OutlierCountFollowsRate) {
  SyntheticSpec s;
  s.datasets = 5;
  s.points = 1000;
  s.outlier_rate = 0.01;
  for (auto dist : {Distribution::Uniform, Distribution::Clustered}) {
    s.distribution = dist;
    const auto r = generate_synthetic(s);
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_EQ(r.repository.datasets()[i].size(), 1000u);
      EXPECT_EQ(r.outliers[i].size(), 10u);
      EXPECT_TRUE(std::is_sorted(r.outliers[i].begin(), r.outliers[i].end()));
    }
  }
}

TEST(Synthetic, SameSeedSameBytes) {
  TempDir a, b;
  SyntheticSpec s;
  s.datasets = 4;
  s.points = 300;
  s.outlier_rate = 0.02;
  s.seed = 71;
  write_repository(a / "repo", generate_synthetic(s).repository);
  write_repository(b / "repo", generate_synthetic(s).repository);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a / "repo")) {
    EXPECT_EQ(slurp(e.path()), slurp(b / "repo" / e.path().filename())) << e.path();
    ++files;
  }
  EXPECT_EQ(files, 5u);
  const auto first = generate_synthetic(s).repository.datasets()[0].point(0)[0];
  s.seed = 72;
  EXPECT_NE(generate_synthetic(s).repository.datasets()[0].point(0)[0], first);
}

TEST(Synthetic, WrittenRepositoryLoadsBack) {
  TempDir t;
  SyntheticSpec s;
  s.datasets = 6;
  s.points = 200;
  const auto r = generate_synthetic(s);
  const auto loaded = load_repository(load_manifest(write_repository(t.path(), r.repository, 8)));
  ASSERT_EQ(loaded.repository.datasets().size(), 6u);
  EXPECT_EQ(loaded.rejected_rows, 0u);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto& x = r.repository.datasets()[i];
    const auto& y = loaded.repository.datasets()[i];
    EXPECT_EQ(x.id(), y.id());
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t j = 0; j < x.size(); ++j) EXPECT_EQ(x.point(j)[1], y.point(j)[1]);
  }
}

TEST(Snapshot, RoundTripAnswersIdentically) {
  SyntheticSpec s;
  s.datasets = 30;
  s.points = 300;
  s.outlier_rate = 0.01;
  const auto idx = UnifiedIndex::build(generate_synthetic(s).repository);
  const auto bytes = serialize_index(idx);
  const auto back = deserialize_index(bytes);
  EXPECT_EQ(serialize_index(back), bytes);
  EXPECT_EQ(back.r_prime(), idx.r_prime());
  const auto q = generate_synthetic(SyntheticSpec{1, 100, Distribution::Clustered, 0, 73}).repository.datasets()[0];
  for (auto m : {MetricKind::IA, MetricKind::GBO, MetricKind::HausExact, MetricKind::HausApprox}) {
    EXPECT_EQ(exemplar_search(back, q, m, 10), exemplar_search(idx, q, m, 10));
  }
  TempDir t;
  save_index(t / "i.bin", idx);
  EXPECT_EQ(serialize_index(load_index(t / "i.bin")), bytes);
}

TEST(Snapshot, CorruptionDetected) {
  SyntheticSpec s;
  s.datasets = 5;
  s.points = 100;
  const auto bytes = serialize_index(UnifiedIndex::build(generate_synthetic(s).repository));

  EXPECT_THROW(deserialize_index(bytes.substr(0, bytes.size() / 2)), IndexFormatError);
  EXPECT_THROW(deserialize_index(bytes.substr(0, 4)), IndexFormatError);

  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x40;
  EXPECT_THROW(deserialize_index(flipped), IndexFormatError);

  auto versioned = bytes;
  versioned[8] = static_cast<char>(kIndexFormatVersion + 1);
  try {
    deserialize_index(versioned);
    FAIL() << "version mismatch accepted";
  } catch (const IndexFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }

  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(deserialize_index(magic), IndexFormatError);
  TempDir t;
  EXPECT_THROW(load_index(t / "absent.bin"), Error);
}

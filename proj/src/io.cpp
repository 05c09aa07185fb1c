#include "spadas/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"

namespace spadas {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '"')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Empty string on success, else the rejection reason.
std::string parse_row(std::string_view line, char delim, std::size_t dims, std::vector<double>& out) {
  const auto fields = split(line, delim);
  if (fields.size() < dims) {
    return "expected at least " + std::to_string(dims) + " fields, found " + std::to_string(fields.size());
  }
  const std::size_t mark = out.size();
  for (std::size_t i = 0; i < dims; ++i) {
    double v = 0.0;
    const auto f = fields[i];
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty()) {
      out.resize(mark);
      return "field " + std::to_string(i + 1) + " is not numeric";
    }
    if (!std::isfinite(v)) {
      out.resize(mark);
      return "field " + std::to_string(i + 1) + " is not finite";
    }
    out.push_back(v);
  }
  return {};
}

}  // namespace

LoadedDataset load_dataset(const std::filesystem::path& path, std::size_t dims, DatasetId id,
                           std::string name, std::optional<char> delimiter) {
  if (dims < 2) throw DimensionError("a point needs at least 2 coordinates");
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  if (name.empty()) name = path.stem().string();

  std::vector<double> coords;
  std::vector<RejectedRow> rejected;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  char delim = delimiter.value_or(',');
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (first && !delimiter) {
      delim = line.find(',') == std::string::npos && line.find('\t') != std::string::npos ? '\t' : ',';
    }
    const std::string reason = parse_row(line, delim, dims, coords);
    if (first) {
      first = false;
      if (!reason.empty()) continue;  // header
    }
    if (!reason.empty()) rejected.push_back({line_no, reason});
  }
  if (coords.empty()) throw Error(path.string() + " holds no valid point");
  return {Dataset(id, std::move(name), dims, std::move(coords)), std::move(rejected)};
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  char buf[64];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto p = dataset.point(i);
    for (std::size_t a = 0; a < p.size(); ++a) {
      const auto res = std::to_chars(buf, buf + sizeof buf, p[a]);
      if (a) out << ',';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

// ---- manifests ------------------------------------------------------------

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed manifest " + path.string() + ": " + e.what());
  }
  Manifest m;
  try {
    m.name = j.value("name", path.stem().string());
    m.theta = j.value("theta", 5);
    m.metric_dims = j.value("metric_dims", std::size_t{2});
    m.leaf_capacity = j.value("leaf_capacity", std::size_t{10});
    const auto base = path.parent_path();
    for (const auto& e : j.at("datasets")) {
      ManifestEntry entry;
      entry.id = e.at("id").get<DatasetId>();
      entry.path = e.at("path").get<std::string>();
      if (entry.path.is_relative()) entry.path = base / entry.path;
      entry.name = e.value("name", entry.path.stem().string());
      entry.dims = e.value("dims", std::size_t{2});
      m.datasets.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed manifest " + path.string() + ": " + e.what());
  }
  std::vector<DatasetId> ids;
  for (const auto& e : m.datasets) ids.push_back(e.id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error("manifest " + path.string() + " repeats a dataset id");
  }
  return m;
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  nlohmann::json j;
  j["name"] = manifest.name;
  j["theta"] = manifest.theta;
  j["metric_dims"] = manifest.metric_dims;
  j["leaf_capacity"] = manifest.leaf_capacity;
  j["datasets"] = nlohmann::json::array();
  for (const auto& e : manifest.datasets) {
    j["datasets"].push_back({{"id", e.id}, {"name", e.name}, {"path", e.path.string()}, {"dims", e.dims}});
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
}

LoadedRepository load_repository(const Manifest& manifest) {
  std::vector<Dataset> datasets;
  std::size_t rejected = 0;
  for (const auto& e : manifest.datasets) {
    auto loaded = load_dataset(e.path, e.dims, e.id, e.name);
    rejected += loaded.rejected.size();
    datasets.push_back(std::move(loaded.dataset));
  }
  return {Repository(std::move(datasets), manifest.theta, manifest.metric_dims), rejected};
}

// ---- synthetic data ---------------------------------------------------------

SyntheticRepository generate_synthetic(const SyntheticSpec& spec) {
  if (spec.datasets == 0 || spec.points == 0) throw Error("synthetic spec needs datasets and points");
  if (spec.dims < 2) throw DimensionError("a point needs at least 2 coordinates");
  if (!(spec.outlier_rate >= 0.0 && spec.outlier_rate < 1.0)) throw Error("outlier_rate must lie in [0, 1)");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const double two_pi = 2.0 * std::numbers::pi;

  struct Cluster {
    double x, y, radius;
  };

  std::vector<Dataset> datasets;
  std::vector<std::vector<std::uint32_t>> labels;
  const auto n_out = static_cast<std::size_t>(std::llround(spec.outlier_rate * static_cast<double>(spec.points)));
  if (n_out > spec.points) throw Error("outlier count exceeds points");
  const std::size_t n_in = spec.points - n_out;

  for (std::size_t di = 0; di < spec.datasets; ++di) {
    std::vector<Cluster> clusters;
    std::vector<std::array<double, 2>> pts;
    pts.reserve(spec.points);
    if (spec.distribution == Distribution::Uniform) {
      const double cx = uniform(50.0, 950.0), cy = uniform(50.0, 950.0);
      const double hx = uniform(5.0, 50.0), hy = uniform(5.0, 50.0);
      for (std::size_t i = 0; i < n_in; ++i) pts.push_back({uniform(cx - hx, cx + hx), uniform(cy - hy, cy + hy)});
      clusters.push_back({cx, cy, std::hypot(hx, hy)});
    } else {
      const double cx = uniform(100.0, 900.0), cy = uniform(100.0, 900.0);
      const auto k = 1 + static_cast<std::size_t>(rng() % 4);
      for (std::size_t c = 0; c < k; ++c) {
        clusters.push_back({cx + uniform(-60.0, 60.0), cy + uniform(-60.0, 60.0), uniform(3.0, 12.0)});
      }
      for (std::size_t i = 0; i < n_in; ++i) {
        const Cluster& c = clusters[rng() % clusters.size()];
        const double r = c.radius * std::sqrt(unit(rng));
        const double a = uniform(0.0, two_pi);
        pts.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
      }
    }
    // Outliers keep at least 10 radii from every cluster centre.
    for (std::size_t i = 0; i < n_out; ++i) {
      while (true) {
        const Cluster& c = clusters[rng() % clusters.size()];
        const double r = c.radius * uniform(10.0, 15.0);
        const double a = uniform(0.0, two_pi);
        const double x = c.x + r * std::cos(a), y = c.y + r * std::sin(a);
        const bool far = std::all_of(clusters.begin(), clusters.end(), [&](const Cluster& o) {
          return std::hypot(x - o.x, y - o.y) >= 10.0 * o.radius;
        });
        if (far) {
          pts.push_back({x, y});
          break;
        }
      }
    }

    std::vector<std::uint32_t> order(pts.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<double> coords;
    coords.reserve(pts.size() * spec.dims);
    std::vector<std::uint32_t> out_idx;
    for (std::uint32_t pos = 0; pos < order.size(); ++pos) {
      const auto src = order[pos];
      coords.push_back(pts[src][0]);
      coords.push_back(pts[src][1]);
      for (std::size_t a = 2; a < spec.dims; ++a) coords.push_back(uniform(0.0, 100.0));
      if (src >= n_in) out_idx.push_back(pos);
    }
    datasets.emplace_back(static_cast<DatasetId>(di), "synthetic-" + std::to_string(di), spec.dims,
                          std::move(coords));
    labels.push_back(std::move(out_idx));
  }
  return {Repository(std::move(datasets), spec.theta, spec.metric_dims), std::move(labels)};
}

std::filesystem::path write_repository(const std::filesystem::path& dir, const Repository& repo,
                                       std::size_t leaf_capacity) {
  std::filesystem::create_directories(dir);
  Manifest m;
  m.name = dir.filename().string();
  m.theta = repo.theta();
  m.metric_dims = repo.metric_dims();
  m.leaf_capacity = leaf_capacity;
  for (const auto& d : repo.datasets()) {
    const std::string file = "dataset_" + std::to_string(d.id()) + ".csv";
    write_dataset(dir / file, d);
    m.datasets.push_back({d.id(), d.name(), file, d.dims()});
  }
  const auto path = dir / "manifest.json";
  save_manifest(path, m);
  return path;
}

}  // namespace spadas

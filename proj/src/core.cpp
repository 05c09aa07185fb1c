#include "spadas/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace spadas {

namespace {

void check_finite(std::span<const double> coords) {
  for (double c : coords) {
    if (!std::isfinite(c)) throw Error("coordinate is not finite");
  }
}

}  // namespace

Point::Point(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2) throw DimensionError("a point needs at least 2 coordinates");
  check_finite(coords_);
}

Point::Point(std::initializer_list<double> coords)
    : Point(std::vector<double>(coords)) {}

bool Mbr::contains(std::span<const double> p) const {
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (p[i] < lo[i] || p[i] > hi[i]) return false;
  }
  return true;
}

bool Mbr::intersects(const Mbr& other, std::size_t axes) const {
  for (std::size_t i = 0; i < axes; ++i) {
    if (hi[i] < other.lo[i] || other.hi[i] < lo[i]) return false;
  }
  return true;
}

bool Mbr::encloses(const Mbr& other, std::size_t axes) const {
  for (std::size_t i = 0; i < axes; ++i) {
    if (other.lo[i] < lo[i] || other.hi[i] > hi[i]) return false;
  }
  return true;
}

void Mbr::expand(std::span<const double> p) {
  if (lo.empty()) {
    lo.assign(p.begin(), p.end());
    hi.assign(p.begin(), p.end());
    return;
  }
  for (std::size_t i = 0; i < lo.size(); ++i) {
    lo[i] = std::min(lo[i], p[i]);
    hi[i] = std::max(hi[i], p[i]);
  }
}

void Mbr::expand(const Mbr& other) {
  if (other.lo.empty()) return;
  if (lo.empty()) {
    *this = other;
    return;
  }
  for (std::size_t i = 0; i < lo.size(); ++i) {
    lo[i] = std::min(lo[i], other.lo[i]);
    hi[i] = std::max(hi[i], other.hi[i]);
  }
}

Dataset::Dataset(DatasetId id, std::string name, const std::vector<Point>& points)
    : id_(id), name_(std::move(name)) {
  if (points.empty()) throw Error("dataset '" + name_ + "' has no points");
  dims_ = points.front().dims();
  coords_.reserve(points.size() * dims_);
  for (const auto& p : points) {
    if (p.dims() != dims_) throw DimensionError("dataset '" + name_ + "' mixes dimensionalities");
    coords_.insert(coords_.end(), p.coords().begin(), p.coords().end());
  }
}

Dataset::Dataset(DatasetId id, std::string name, std::size_t dims,
                 std::vector<double> coords)
    : id_(id), name_(std::move(name)), dims_(dims), coords_(std::move(coords)) {
  if (dims_ < 2) throw DimensionError("a point needs at least 2 coordinates");
  if (coords_.empty()) throw Error("dataset '" + name_ + "' has no points");
  if (coords_.size() % dims_ != 0) throw DimensionError("coordinate buffer is not a multiple of dims");
  check_finite(coords_);
}

std::vector<Point> Dataset::points() const {
  std::vector<Point> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    auto p = point(i);
    out.emplace_back(std::vector<double>(p.begin(), p.end()));
  }
  return out;
}

Repository::Repository(std::vector<Dataset> datasets, int theta,
                       std::size_t metric_dims)
    : datasets_(std::move(datasets)), theta_(theta), metric_dims_(metric_dims) {
  if (datasets_.empty()) throw Error("repository has no datasets");
  if (theta_ < 1 || theta_ > 16) throw Error("resolution theta must lie in [1, 16]");
  dims_ = datasets_.front().dims();
  if (metric_dims_ < 1 || metric_dims_ > dims_) {
    throw DimensionError("metric_dims must lie in [1, dims]");
  }
  std::vector<DatasetId> ids;
  for (const auto& d : datasets_) {
    if (d.empty()) throw Error("dataset '" + d.name() + "' has no points");
    if (d.dims() != dims_) throw DimensionError("datasets in one repository must share dims");
    global_mbr_.expand(mbr_of(d));
    ids.push_back(d.id());
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error("dataset ids must be unique");
  }
}

bool is_similarity(MetricKind kind) {
  return kind == MetricKind::IA || kind == MetricKind::GBO;
}

const char* to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::IA: return "ia";
    case MetricKind::GBO: return "gbo";
    case MetricKind::HausExact: return "haus_exact";
    case MetricKind::HausApprox: return "haus_approx";
  }
  return "?";
}

MetricKind parse_metric(const std::string& name) {
  if (name == "ia") return MetricKind::IA;
  if (name == "gbo") return MetricKind::GBO;
  if (name == "haus_exact" || name == "haus") return MetricKind::HausExact;
  if (name == "haus_approx") return MetricKind::HausApprox;
  throw Error("unknown metric '" + name + "'");
}

double euclidean(std::span<const double> p, std::span<const double> q,
                 std::size_t metric_dims) {
  if (p.size() != q.size()) throw DimensionError("points differ in dimensionality");
  if (metric_dims > p.size()) throw DimensionError("metric_dims exceeds point dimensionality");
  double sum = 0.0;
  for (std::size_t i = 0; i < metric_dims; ++i) {
    const double d = p[i] - q[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double euclidean(const Point& p, const Point& q, std::size_t metric_dims) {
  return euclidean(p.coords(), q.coords(), metric_dims);
}

Mbr mbr_of(const std::vector<Point>& points) {
  if (points.empty()) throw Error("cannot bound an empty point list");
  Mbr box;
  for (const auto& p : points) {
    if (p.dims() != points.front().dims()) throw DimensionError("points differ in dimensionality");
    box.expand(p.coords());
  }
  return box;
}

Mbr mbr_of(const Dataset& dataset) {
  if (dataset.empty()) throw Error("cannot bound an empty dataset");
  Mbr box;
  for (std::size_t i = 0; i < dataset.size(); ++i) box.expand(dataset.point(i));
  return box;
}

}  // namespace spadas

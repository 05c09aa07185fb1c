#pragma once

// Domain types shared across the engine: points, boxes, datasets and
// repositories, plus the distance primitive every search builds on.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spadas {

using DatasetId = std::uint32_t;

/// Base class for every error the engine raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Number of leading coordinates that are spatial axes. Signatures, IA and
/// range queries always look at these two.
inline constexpr std::size_t kSpatialAxes = 2;

/// A d-dimensional coordinate vector (d >= 2, all entries finite).
class Point {
 public:
  Point() = default;
  explicit Point(std::vector<double> coords);
  Point(std::initializer_list<double> coords);

  std::size_t dims() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const { return coords_; }

  friend bool operator==(const Point&, const Point&) = default;

 private:
  std::vector<double> coords_;
};

/// Axis-aligned bounding box (lower corner, upper corner).
struct Mbr {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dims() const { return lo.size(); }
  bool contains(std::span<const double> p) const;
  /// Closed-box intersection over the first `axes` coordinates.
  bool intersects(const Mbr& other, std::size_t axes = kSpatialAxes) const;
  /// True when `other` lies entirely inside this box on the first `axes`.
  bool encloses(const Mbr& other, std::size_t axes = kSpatialAxes) const;
  void expand(std::span<const double> p);
  void expand(const Mbr& other);

  friend bool operator==(const Mbr&, const Mbr&) = default;
};

/// A named set of points with uniform dimensionality. Coordinates are kept
/// row-major in a single buffer.
class Dataset {
 public:
  Dataset() = default;
  Dataset(DatasetId id, std::string name, const std::vector<Point>& points);
  Dataset(DatasetId id, std::string name, std::size_t dims,
          std::vector<double> coords);

  DatasetId id() const { return id_; }
  const std::string& name() const { return name_; }
  std::size_t dims() const { return dims_; }
  std::size_t size() const { return dims_ == 0 ? 0 : coords_.size() / dims_; }
  bool empty() const { return size() == 0; }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dims_, dims_};
  }
  std::span<const double> coords() const { return coords_; }
  std::vector<Point> points() const;

 private:
  DatasetId id_ = 0;
  std::string name_;
  std::size_t dims_ = 0;
  std::vector<double> coords_;
};

/// A collection of datasets sharing one grid resolution and one distance
/// configuration.
class Repository {
 public:
  Repository(std::vector<Dataset> datasets, int theta = 5,
             std::size_t metric_dims = 2);

  const std::vector<Dataset>& datasets() const { return datasets_; }
  const Mbr& global_mbr() const { return global_mbr_; }
  int theta() const { return theta_; }
  std::size_t metric_dims() const { return metric_dims_; }
  std::size_t dims() const { return dims_; }

 private:
  std::vector<Dataset> datasets_;
  Mbr global_mbr_;
  int theta_;
  std::size_t metric_dims_;
  std::size_t dims_ = 0;
};

/// IA and GBO are similarities (larger is better); the Hausdorff variants are
/// distances (smaller is better).
enum class MetricKind { IA, GBO, HausExact, HausApprox };

bool is_similarity(MetricKind kind);
const char* to_string(MetricKind kind);
MetricKind parse_metric(const std::string& name);

/// Euclidean distance over the first `metric_dims` coordinates.
double euclidean(std::span<const double> p, std::span<const double> q,
                 std::size_t metric_dims);
double euclidean(const Point& p, const Point& q, std::size_t metric_dims = 2);

Mbr mbr_of(const std::vector<Point>& points);
Mbr mbr_of(const Dataset& dataset);

}  // namespace spadas

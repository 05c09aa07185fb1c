#pragma once

// Point-file ingestion, repository manifests, synthetic repositories and
// index snapshots.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spadas/core.hpp"
#include "spadas/index.hpp"

namespace spadas {

// ---- point files ----------------------------------------------------------

struct RejectedRow {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct LoadedDataset {
  Dataset dataset;
  std::vector<RejectedRow> rejected;
};

/// Reads delimiter-separated numeric rows; the first `dims` fields of each row
/// form a point. The delimiter is auto-detected (comma or tab) unless given.
/// A non-numeric first line is treated as a header. Rows with non-numeric,
/// non-finite or missing fields are rejected and reported. Throws when the
/// file cannot be read or yields no valid point.
LoadedDataset load_dataset(const std::filesystem::path& path, std::size_t dims,
                           DatasetId id = 0, std::string name = {},
                           std::optional<char> delimiter = std::nullopt);

void write_dataset(const std::filesystem::path& path, const Dataset& dataset);

// ---- manifests ------------------------------------------------------------

struct ManifestEntry {
  DatasetId id = 0;
  std::string name;
  std::filesystem::path path;  // resolved against the manifest's directory
  std::size_t dims = 2;
};

struct Manifest {
  std::string name;
  int theta = 5;
  std::size_t metric_dims = 2;
  std::size_t leaf_capacity = 10;
  std::vector<ManifestEntry> datasets;
};

/// JSON manifest:
///   {"name": ..., "theta": 5, "metric_dims": 2, "leaf_capacity": 10,
///    "datasets": [{"id": 0, "name": ..., "path": ..., "dims": 2}, ...]}
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

struct LoadedRepository {
  Repository repository;
  std::size_t rejected_rows = 0;
};

LoadedRepository load_repository(const Manifest& manifest);

// ---- synthetic data ---------------------------------------------------------

enum class Distribution { Uniform, Clustered };

struct SyntheticSpec {
  std::size_t datasets = 10;
  std::size_t points = 1000;  // per dataset, outliers included
  Distribution distribution = Distribution::Clustered;
  double outlier_rate = 0.0;
  std::uint64_t seed = 1;
  std::size_t dims = 2;
  int theta = 5;
  std::size_t metric_dims = 2;
};

struct SyntheticRepository {
  Repository repository;
  /// Per dataset, ascending indices of the planted outliers.
  std::vector<std::vector<std::uint32_t>> outliers;
};

/// Datasets sit at random spots of a 1000 x 1000 square. Uniform datasets
/// fill a random box; clustered ones are made of 1-4 disk-shaped clusters.
/// round(outlier_rate * points) outliers per dataset are placed between 10
/// and 15 cluster radii from a cluster centre (uniform mode: from the box
/// centre, with half the box diagonal as the radius).
SyntheticRepository generate_synthetic(const SyntheticSpec& spec);

/// Writes one CSV per dataset plus a manifest into `dir`; returns the
/// manifest path.
std::filesystem::path write_repository(const std::filesystem::path& dir, const Repository& repo,
                                       std::size_t leaf_capacity = 10);

// ---- index snapshots ----------------------------------------------------------

class IndexFormatError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::uint32_t kIndexFormatVersion = 1;

void save_index(const std::filesystem::path& path, const UnifiedIndex& index);
/// Throws IndexFormatError on a wrong magic, version mismatch, truncation or
/// checksum failure.
UnifiedIndex load_index(const std::filesystem::path& path);

std::string serialize_index(const UnifiedIndex& index);
UnifiedIndex deserialize_index(const std::string& bytes);

}  // namespace spadas

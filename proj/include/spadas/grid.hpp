#pragma once

// Uniform 2^theta x 2^theta grid over the repository's spatial axes and the
// z-order (Morton) signatures built on it.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "spadas/core.hpp"

namespace spadas {

using CellId = std::uint64_t;

struct CellCoord {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  friend bool operator==(const CellCoord&, const CellCoord&) = default;
};

/// Morton interleave: x supplies the even bits, y the odd bits.
CellId morton_encode(std::uint32_t cx, std::uint32_t cy, int theta);
CellCoord morton_decode(CellId id, int theta);

class Grid {
 public:
  Grid() = default;
  Grid(std::span<const double> origin, std::span<const double> extent, int theta);
  static Grid over(const Mbr& box, int theta);

  int theta() const { return theta_; }
  std::uint32_t cells_per_axis() const { return 1u << theta_; }
  double origin(std::size_t axis) const { return origin_[axis]; }
  double extent(std::size_t axis) const { return extent_[axis]; }
  double cell_width(std::size_t axis) const { return extent_[axis] / cells_per_axis(); }

  /// Throws when p lies outside the grid.
  CellCoord cell_of(std::span<const double> p) const;
  /// Nullopt for points outside the grid (foreign query points).
  std::optional<CellCoord> try_cell_of(std::span<const double> p) const;

 private:
  double origin_[2] = {0.0, 0.0};
  double extent_[2] = {0.0, 0.0};
  int theta_ = 5;
};

/// Sorted, duplicate-free set of occupied cell ids.
class ZSignature {
 public:
  ZSignature() = default;
  /// Sorts and deduplicates.
  explicit ZSignature(std::vector<CellId> ids);

  const std::vector<CellId>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  static ZSignature unite(const ZSignature& a, const ZSignature& b);

  friend bool operator==(const ZSignature&, const ZSignature&) = default;

 private:
  std::vector<CellId> ids_;
};

/// Every point must lie on the grid.
ZSignature signature_of(const Dataset& dataset, const Grid& grid);
ZSignature signature_of(std::span<const double> coords, std::size_t dims,
                        const Grid& grid);
/// Query-side variant: points outside the grid occupy no cell.
ZSignature clipped_signature_of(std::span<const double> coords, std::size_t dims,
                                const Grid& grid);

std::size_t signature_intersection_size(const ZSignature& a, const ZSignature& b);

}  // namespace spadas

#include "spadas/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spadas {

namespace {

// Spread the low 32 bits of v so bit i lands on bit 2i.
std::uint64_t spread_bits(std::uint64_t v) {
  v &= 0xffffffffULL;
  v = (v | (v << 16)) & 0x0000ffff0000ffffULL;
  v = (v | (v << 8)) & 0x00ff00ff00ff00ffULL;
  v = (v | (v << 4)) & 0x0f0f0f0f0f0f0f0fULL;
  v = (v | (v << 2)) & 0x3333333333333333ULL;
  v = (v | (v << 1)) & 0x5555555555555555ULL;
  return v;
}

std::uint32_t compact_bits(std::uint64_t v) {
  v &= 0x5555555555555555ULL;
  v = (v | (v >> 1)) & 0x3333333333333333ULL;
  v = (v | (v >> 2)) & 0x0f0f0f0f0f0f0f0fULL;
  v = (v | (v >> 4)) & 0x00ff00ff00ff00ffULL;
  v = (v | (v >> 8)) & 0x0000ffff0000ffffULL;
  v = (v | (v >> 16)) & 0x00000000ffffffffULL;
  return static_cast<std::uint32_t>(v);
}

void check_theta(int theta) {
  if (theta < 1 || theta > 16) throw Error("resolution theta must lie in [1, 16]");
}

}  // namespace

CellId morton_encode(std::uint32_t cx, std::uint32_t cy, int theta) {
  check_theta(theta);
  const std::uint64_t n = 1ULL << theta;
  if (cx >= n || cy >= n) {
    throw Error("cell coordinate (" + std::to_string(cx) + ", " + std::to_string(cy) +
                ") out of range for theta " + std::to_string(theta));
  }
  return spread_bits(cx) | (spread_bits(cy) << 1);
}

CellCoord morton_decode(CellId id, int theta) {
  check_theta(theta);
  if (id >> (2 * theta) != 0) throw Error("cell id out of range");
  return {compact_bits(id), compact_bits(id >> 1)};
}

Grid::Grid(std::span<const double> origin, std::span<const double> extent, int theta)
    : theta_(theta) {
  check_theta(theta);
  if (origin.size() < 2 || extent.size() < 2) throw DimensionError("grid needs two axes");
  for (std::size_t a = 0; a < 2; ++a) {
    if (!(extent[a] >= 0.0)) throw Error("grid extent must be non-negative");
    origin_[a] = origin[a];
    extent_[a] = extent[a];
  }
}

Grid Grid::over(const Mbr& box, int theta) {
  const double extent[2] = {box.hi[0] - box.lo[0], box.hi[1] - box.lo[1]};
  return Grid(std::span<const double>(box.lo.data(), 2), extent, theta);
}

std::optional<CellCoord> Grid::try_cell_of(std::span<const double> p) const {
  std::uint32_t cell[2];
  const std::uint32_t last = cells_per_axis() - 1;
  for (std::size_t a = 0; a < 2; ++a) {
    const double offset = p[a] - origin_[a];
    if (offset < 0.0 || offset > extent_[a]) return std::nullopt;
    if (extent_[a] == 0.0) {
      cell[a] = 0;
      continue;
    }
    const double idx = std::floor(offset / cell_width(a));
    cell[a] = idx >= last ? last : static_cast<std::uint32_t>(idx);
  }
  return CellCoord{cell[0], cell[1]};
}

CellCoord Grid::cell_of(std::span<const double> p) const {
  auto c = try_cell_of(p);
  if (!c) throw Error("point lies outside the grid");
  return *c;
}

ZSignature::ZSignature(std::vector<CellId> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

ZSignature ZSignature::unite(const ZSignature& a, const ZSignature& b) {
  ZSignature out;
  out.ids_.reserve(a.size() + b.size());
  std::set_union(a.ids_.begin(), a.ids_.end(), b.ids_.begin(), b.ids_.end(),
                 std::back_inserter(out.ids_));
  return out;
}

ZSignature signature_of(std::span<const double> coords, std::size_t dims,
                        const Grid& grid) {
  std::vector<CellId> ids;
  ids.reserve(coords.size() / dims);
  for (std::size_t off = 0; off < coords.size(); off += dims) {
    const auto c = grid.cell_of(coords.subspan(off, dims));
    ids.push_back(morton_encode(c.x, c.y, grid.theta()));
  }
  return ZSignature(std::move(ids));
}

ZSignature signature_of(const Dataset& dataset, const Grid& grid) {
  return signature_of(dataset.coords(), dataset.dims(), grid);
}

ZSignature clipped_signature_of(std::span<const double> coords, std::size_t dims,
                                const Grid& grid) {
  std::vector<CellId> ids;
  for (std::size_t off = 0; off < coords.size(); off += dims) {
    if (const auto c = grid.try_cell_of(coords.subspan(off, dims))) {
      ids.push_back(morton_encode(c->x, c->y, grid.theta()));
    }
  }
  return ZSignature(std::move(ids));
}

std::size_t signature_intersection_size(const ZSignature& a, const ZSignature& b) {
  const auto& x = a.ids();
  const auto& y = b.ids();
  std::size_t i = 0, j = 0, count = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] < y[j]) {
      ++i;
    } else if (y[j] < x[i]) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

}  // namespace spadas

// Dyadic cells, partitions of [0,1]^D and point-set distances.
//
// A cell is stored as an integer pair (level, index): it covers
// index*2^-level + 2^-level*[0,1]^D. All partition arithmetic is carried out
// on the integers, so covers stay exact no matter how deep the refinement;
// floating-point corner coordinates are derived on demand. Levels are capped
// at kMaxLevel = 62 so indices fit in a signed 64-bit integer; exceeding the
// cap raises CapacityError.

#pragma once

#include <cstdint>
#include <vector>

#include "types.hpp"

namespace blasso {

constexpr int kMaxLevel = 62;

struct DyadicCell {
  int level = 0;
  std::vector<std::int64_t> index;  // one entry per axis, in [0, 2^level)

  int dim() const { return static_cast<int>(index.size()); }
  bool operator==(const DyadicCell&) const = default;
};

double edge_length(const DyadicCell& cell);   // 2^-level
double cell_diameter(const DyadicCell& cell); // sqrt(D) * 2^-level
Vec lower_corner(const DyadicCell& cell);

// The 2^D corner points, ordered by corner bit pattern (axis 0 fastest).
PointSet cell_vertices(const DyadicCell& cell);

// The 2^D children at level+1, in traversal order. CapacityError at kMaxLevel.
std::vector<DyadicCell> subdivide(const DyadicCell& cell);

// Closed-cell membership; faces shared with a neighbor belong to both.
bool cell_contains(const DyadicCell& cell, const Vec& x);

// Euclidean distance from z to the closed cell (0 if inside).
double dist_point_cell(const Vec& z, const DyadicCell& cell);

// A grid point index*2^-level in canonical form (index not all even unless
// level is 0), so that equal points compare equal across levels.
struct GridPoint {
  int level = 0;
  std::vector<std::int64_t> index;

  bool operator==(const GridPoint&) const = default;
};

GridPoint canonical_grid_point(int level, std::vector<std::int64_t> index);
Vec grid_point_coords(const GridPoint& p);
// Spatial lexicographic order on exact coordinates.
bool grid_point_less(const GridPoint& a, const GridPoint& b);

// Leaves of a 2^D-tree over [0,1]^D, kept in depth-first (z-curve) traversal
// order so that iteration over cells is deterministic and refine() can locate
// a leaf by binary search.
struct Partition {
  int dim = 0;
  std::vector<DyadicCell> leaves;
};

Partition make_initial_partition(int dim);

// Replace a leaf by its 2^D children. The cell must currently be a leaf;
// anything else is an invalid_argument.
void refine(Partition& partition, const DyadicCell& cell);

// Deduplicated union of all leaf corners, sorted spatially.
std::vector<GridPoint> partition_grid_vertices(const Partition& partition);
PointSet partition_vertices(const Partition& partition);

// min over pairs of ||x1 - x2||; +inf if either set is empty.
double dist_sets(const PointSet& x1, const PointSet& x2);

// One-sided Hausdorff distance sup_{p in x2} min_{v in x1} ||v - p||: how far
// the points of x2 can lie from the covering set x1. 0 if x2 is empty, +inf
// if x1 is empty while x2 is not.
double hausdorff(const PointSet& x1, const PointSet& x2);

}  // namespace blasso

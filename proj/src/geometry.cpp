#include "geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace blasso {

namespace {

void check_cell(const DyadicCell& cell) {
  if (cell.dim() == 0) throw std::invalid_argument("cell has no axes");
  if (cell.level < 0 || cell.level > kMaxLevel)
    throw CapacityError("cell level outside [0, 62]");
  const std::int64_t count = std::int64_t{1} << cell.level;
  for (std::int64_t i : cell.index)
    if (i < 0 || i >= count)
      throw std::invalid_argument("cell index outside [0, 2^level)");
}

// Compare exact coordinates i_a*2^-la vs i_b*2^-lb without overflow.
int compare_dyadic(std::int64_t ia, int la, std::int64_t ib, int lb) {
  const int common = std::max(la, lb);
  const __int128 va = static_cast<__int128>(ia) << (common - la);
  const __int128 vb = static_cast<__int128>(ib) << (common - lb);
  return va < vb ? -1 : (va > vb ? 1 : 0);
}

// Morton (z-curve) order: compare branch symbols level by level, ancestors
// before descendants. A cell's descendants then occupy a contiguous block at
// the cell's own position, so replacing a leaf in place by its children keeps
// the leaf array globally sorted — refine() relies on this for binary search.
bool cell_less(const DyadicCell& a, const DyadicCell& b) {
  const int depth = std::max(a.level, b.level);
  for (int t = 1; t <= depth; ++t) {
    if (t > a.level) return true;
    if (t > b.level) return false;
    unsigned sa = 0, sb = 0;
    for (int d = 0; d < a.dim(); ++d) {
      sa |= static_cast<unsigned>((a.index[d] >> (a.level - t)) & 1) << d;
      sb |= static_cast<unsigned>((b.index[d] >> (b.level - t)) & 1) << d;
    }
    if (sa != sb) return sa < sb;
  }
  return false;
}

}  // namespace

double edge_length(const DyadicCell& cell) { return std::ldexp(1.0, -cell.level); }

double cell_diameter(const DyadicCell& cell) {
  return std::sqrt(static_cast<double>(cell.dim())) * edge_length(cell);
}

Vec lower_corner(const DyadicCell& cell) {
  Vec x(cell.dim());
  for (int d = 0; d < cell.dim(); ++d)
    x[d] = std::ldexp(static_cast<double>(cell.index[d]), -cell.level);
  return x;
}

PointSet cell_vertices(const DyadicCell& cell) {
  check_cell(cell);
  const int dim = cell.dim();
  PointSet out;
  out.dim = dim;
  out.points.reserve(std::size_t{1} << dim);
  for (unsigned bits = 0; bits < (1u << dim); ++bits) {
    Vec x(dim);
    for (int d = 0; d < dim; ++d)
      x[d] = std::ldexp(static_cast<double>(cell.index[d] + ((bits >> d) & 1u)),
                        -cell.level);
    out.points.push_back(std::move(x));
  }
  return out;
}

std::vector<DyadicCell> subdivide(const DyadicCell& cell) {
  check_cell(cell);
  if (cell.level >= kMaxLevel)
    throw CapacityError("refinement beyond level 62");
  const int dim = cell.dim();
  std::vector<DyadicCell> children;
  children.reserve(std::size_t{1} << dim);
  for (unsigned bits = 0; bits < (1u << dim); ++bits) {
    DyadicCell child;
    child.level = cell.level + 1;
    child.index.resize(dim);
    for (int d = 0; d < dim; ++d)
      child.index[d] = 2 * cell.index[d] + ((bits >> d) & 1u);
    children.push_back(std::move(child));
  }
  std::sort(children.begin(), children.end(), cell_less);
  return children;
}

bool cell_contains(const DyadicCell& cell, const Vec& x) {
  check_cell(cell);
  if (x.size() != cell.dim()) throw std::invalid_argument("dimension mismatch");
  const double e = edge_length(cell);
  for (int d = 0; d < cell.dim(); ++d) {
    const double lo = std::ldexp(static_cast<double>(cell.index[d]), -cell.level);
    if (x[d] < lo || x[d] > lo + e) return false;
  }
  return true;
}

double dist_point_cell(const Vec& z, const DyadicCell& cell) {
  check_cell(cell);
  if (z.size() != cell.dim()) throw std::invalid_argument("dimension mismatch");
  const double e = edge_length(cell);
  double s = 0.0;
  for (int d = 0; d < cell.dim(); ++d) {
    const double lo = std::ldexp(static_cast<double>(cell.index[d]), -cell.level);
    const double gap = std::max({lo - z[d], z[d] - (lo + e), 0.0});
    s += gap * gap;
  }
  return std::sqrt(s);
}

GridPoint canonical_grid_point(int level, std::vector<std::int64_t> index) {
  GridPoint p{level, std::move(index)};
  auto all_even = [&] {
    for (std::int64_t i : p.index)
      if (i & 1) return false;
    return true;
  };
  while (p.level > 0 && all_even()) {
    for (auto& i : p.index) i >>= 1;
    --p.level;
  }
  return p;
}

Vec grid_point_coords(const GridPoint& p) {
  Vec x(static_cast<int>(p.index.size()));
  for (std::size_t d = 0; d < p.index.size(); ++d)
    x[static_cast<int>(d)] = std::ldexp(static_cast<double>(p.index[d]), -p.level);
  return x;
}

bool grid_point_less(const GridPoint& a, const GridPoint& b) {
  for (std::size_t d = 0; d < a.index.size(); ++d) {
    const int c = compare_dyadic(a.index[d], a.level, b.index[d], b.level);
    if (c != 0) return c < 0;
  }
  return false;
}

Partition make_initial_partition(int dim) {
  if (dim < 1 || dim >= kMaxDim)
    throw std::invalid_argument("dimension must be 1, 2 or 3");
  Partition p;
  p.dim = dim;
  p.leaves.push_back(DyadicCell{0, std::vector<std::int64_t>(dim, 0)});
  return p;
}

void refine(Partition& partition, const DyadicCell& cell) {
  auto it = std::lower_bound(partition.leaves.begin(), partition.leaves.end(),
                             cell, cell_less);
  if (it == partition.leaves.end() || !(*it == cell))
    throw std::invalid_argument("cell is not a leaf of the partition");
  auto children = subdivide(cell);
  it = partition.leaves.erase(it);
  partition.leaves.insert(it, children.begin(), children.end());
}

std::vector<GridPoint> partition_grid_vertices(const Partition& partition) {
  std::vector<GridPoint> pts;
  pts.reserve(partition.leaves.size() * (std::size_t{1} << partition.dim));
  std::vector<std::int64_t> idx(partition.dim);
  for (const DyadicCell& cell : partition.leaves)
    for (unsigned bits = 0; bits < (1u << partition.dim); ++bits) {
      for (int d = 0; d < partition.dim; ++d)
        idx[d] = cell.index[d] + ((bits >> d) & 1u);
      pts.push_back(canonical_grid_point(cell.level, idx));
    }
  std::sort(pts.begin(), pts.end(), grid_point_less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

PointSet partition_vertices(const Partition& partition) {
  PointSet out;
  out.dim = partition.dim;
  for (const GridPoint& p : partition_grid_vertices(partition))
    out.points.push_back(grid_point_coords(p));
  return out;
}

double dist_sets(const PointSet& x1, const PointSet& x2) {
  if (x1.points.empty() || x2.points.empty())
    return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& a : x1.points)
    for (const Vec& b : x2.points) best = std::min(best, (a - b).norm());
  return best;
}

double hausdorff(const PointSet& x1, const PointSet& x2) {
  if (x2.points.empty()) return 0.0;
  if (x1.points.empty()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const Vec& b : x2.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& a : x1.points) best = std::min(best, (a - b).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace blasso

#include "spmamba/scan_order.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>

namespace spm {

int ScanDirection::index() const {
  return (corner == Corner::UpperRight ? 4 : 0) +
         (rotation == Rotation::CounterClockwise ? 2 : 0) +
         (progression == Progression::CenterToOuter ? 1 : 0);
}

ScanDirection ScanDirection::from_index(int i) {
  require(i >= 0 && i < 8, "scan-direction", "index must be in [0,8), got " + std::to_string(i));
  ScanDirection d;
  d.corner = (i & 4) ? Corner::UpperRight : Corner::UpperLeft;
  d.rotation = (i & 2) ? Rotation::CounterClockwise : Rotation::Clockwise;
  d.progression = (i & 1) ? Progression::CenterToOuter : Progression::OuterToCenter;
  return d;
}

std::string ScanDirection::describe() const {
  std::string s = corner == Corner::UpperLeft ? "upper-left" : "upper-right";
  s += rotation == Rotation::Clockwise ? "/clockwise" : "/counterclockwise";
  s += progression == Progression::OuterToCenter ? "/outer-to-center" : "/center-to-outer";
  return s;
}

std::array<ScanDirection, 8> enumerate_directions() {
  std::array<ScanDirection, 8> out;
  for (int i = 0; i < 8; ++i) out[static_cast<size_t>(i)] = ScanDirection::from_index(i);
  return out;
}

ScanGrid::ScanGrid(int64_t h, int64_t w) {
  require(h == w, "scan-grid", "grid must be square, got " + std::to_string(h) + "x" + std::to_string(w));
  require(h >= 4, "scan-grid", "side must be >= 4, got " + std::to_string(h));
  const int64_t half = h / 2;
  require(h % 2 == 0 && (half & (half - 1)) == 0, "scan-grid",
          "side/2 must be a power of two, got side " + std::to_string(h));
  side = h;
}

// Builds the visit matrix by quadrant composition. With m = 2^n and E the
// all-ones matrix, the step is
//   H_{n+1} = [ H_n^T             , 4^n E + H_n          ;
//               (4^{n+1}+1) E - (H_n^lr)^T , 2*4^n E + H_n ]
// which visits top-left, top-right, bottom-right, bottom-left. The traversal
// enters each matrix at its minimum and leaves at its maximum; the invariant
// (min at top-left, max at bottom-left) holds inductively from the 1x1 seed,
// so consecutive indices are always 4-adjacent.
std::vector<int64_t> hilbert_matrix(int n) {
  require(n >= 1, "hilbert-matrix", "order must be >= 1, got " + std::to_string(n));
  require(n <= 15, "hilbert-matrix", "order too large for 64-bit indices");
  std::vector<int64_t> h{1};
  int64_t m = 1;
  for (int step = 0; step < n; ++step) {
    const int64_t m2 = 2 * m;
    const int64_t cells = m * m;
    std::vector<int64_t> next(static_cast<size_t>(m2 * m2));
    auto at = [&](const std::vector<int64_t>& v, int64_t r, int64_t c, int64_t w) {
      return v[static_cast<size_t>(r * w + c)];
    };
    for (int64_t r = 0; r < m; ++r) {
      for (int64_t c = 0; c < m; ++c) {
        const int64_t v = at(h, r, c, m);
        // top-left: transpose
        next[static_cast<size_t>(c * m2 + r)] = v;
        // top-right: offset copy
        next[static_cast<size_t>(r * m2 + (m + c))] = cells + v;
        // bottom-right: second offset copy
        next[static_cast<size_t>((m + r) * m2 + (m + c))] = 2 * cells + v;
        // bottom-left: complement of the left-right mirrored transpose
        next[static_cast<size_t>((m + (m - 1 - c)) * m2 + r)] = 4 * cells + 1 - v;
      }
    }
    h = std::move(next);
    m = m2;
  }
  return h;
}

namespace {

// Cells of the ring at depth r (the border of the (side-2r)-sized subgrid),
// starting from the corner cell nearest the start corner, in rotation order.
std::vector<int64_t> ring_cells(int64_t side, int64_t depth, const ScanDirection& dir) {
  const int64_t lo = depth;
  const int64_t hi = side - 1 - depth;
  std::vector<int64_t> cells;
  auto push = [&](int64_t r, int64_t c) { cells.push_back(r * side + c); };
  // Clockwise cycle beginning at the upper-left corner of the ring.
  for (int64_t c = lo; c <= hi; ++c) push(lo, c);
  for (int64_t r = lo + 1; r <= hi; ++r) push(r, hi);
  for (int64_t c = hi - 1; c >= lo; --c) push(hi, c);
  for (int64_t r = hi - 1; r > lo; --r) push(r, lo);

  // Rotate the cycle so it starts at the requested corner.
  int64_t start = 0;
  if (dir.corner == ScanDirection::Corner::UpperRight) start = hi - lo;
  std::rotate(cells.begin(), cells.begin() + start, cells.end());
  if (dir.rotation == ScanDirection::Rotation::CounterClockwise)
    std::reverse(cells.begin() + 1, cells.end());
  return cells;
}

}  // namespace

std::vector<int64_t> circular_ring_order(const ScanGrid& grid, const ScanDirection& dir) {
  const int64_t rings = grid.side / 4;
  std::vector<int64_t> out;
  out.reserve(static_cast<size_t>(grid.cells() - (grid.side / 2) * (grid.side / 2)));
  if (dir.progression == ScanDirection::Progression::OuterToCenter) {
    for (int64_t r = 0; r < rings; ++r) {
      auto ring = ring_cells(grid.side, r, dir);
      out.insert(out.end(), ring.begin(), ring.end());
    }
  } else {
    for (int64_t r = rings - 1; r >= 0; --r) {
      auto ring = ring_cells(grid.side, r, dir);
      out.insert(out.end(), ring.begin(), ring.end());
    }
  }
  return out;
}

ScanOrder circular_hilbert_order(const ScanGrid& grid, const ScanDirection& dir) {
  const int64_t side = grid.side;
  const int64_t half = side / 2;
  const int64_t off = side / 4;  // top-left of the centered half-sized block

  int order_n = 0;
  for (int64_t v = half; v > 1; v >>= 1) ++order_n;
  std::vector<int64_t> hmat = hilbert_matrix(order_n);

  // Central cells listed in Hilbert visit order; upper-right variants use the
  // left-right mirrored curve.
  std::vector<int64_t> central(static_cast<size_t>(half * half));
  for (int64_t r = 0; r < half; ++r)
    for (int64_t c = 0; c < half; ++c) {
      const int64_t cc = dir.corner == ScanDirection::Corner::UpperRight ? half - 1 - c : c;
      const int64_t visit = hmat[static_cast<size_t>(r * half + cc)] - 1;
      central[static_cast<size_t>(visit)] = (off + r) * side + (off + c);
    }

  std::vector<int64_t> rings = circular_ring_order(grid, dir);

  ScanOrder so;
  so.side = side;
  so.order.reserve(static_cast<size_t>(grid.cells()));
  if (dir.progression == ScanDirection::Progression::OuterToCenter) {
    so.order.insert(so.order.end(), rings.begin(), rings.end());
    so.order.insert(so.order.end(), central.begin(), central.end());
  } else {
    so.order.insert(so.order.end(), central.begin(), central.end());
    so.order.insert(so.order.end(), rings.begin(), rings.end());
  }
  so.inverse.assign(so.order.size(), -1);
  for (size_t t = 0; t < so.order.size(); ++t) {
    const int64_t cell = so.order[t];
    require(cell >= 0 && cell < grid.cells() && so.inverse[static_cast<size_t>(cell)] == -1,
            "scan-order", "visit order is not a bijection");
    so.inverse[static_cast<size_t>(cell)] = static_cast<int64_t>(t);
  }
  return so;
}

const ScanOrder& cached_order(int64_t side, const ScanDirection& dir) {
  static std::map<std::pair<int64_t, int>, ScanOrder> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_pair(side, dir.index());
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, circular_hilbert_order(ScanGrid(side, side), dir)).first;
  return it->second;
}

std::string format_order(const ScanOrder& order) {
  const int64_t side = order.side;
  int width = 1;
  for (int64_t v = side * side; v >= 10; v /= 10) ++width;
  std::ostringstream os;
  for (int64_t r = 0; r < side; ++r) {
    for (int64_t c = 0; c < side; ++c) {
      if (c) os << ' ';
      os << std::setw(width) << order.inverse[static_cast<size_t>(r * side + c)] + 1;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace spm

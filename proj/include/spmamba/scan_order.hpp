#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spmamba/common.hpp"

namespace spm {

// One of the 8 scan variants: 2 start corners x 2 rotations x 2 progressions.
struct ScanDirection {
  enum class Corner { UpperLeft, UpperRight };
  enum class Rotation { Clockwise, CounterClockwise };
  enum class Progression { OuterToCenter, CenterToOuter };

  Corner corner = Corner::UpperLeft;
  Rotation rotation = Rotation::Clockwise;
  Progression progression = Progression::OuterToCenter;

  // Stable id in [0,8): corner*4 + rotation*2 + progression.
  int index() const;
  static ScanDirection from_index(int i);
  std::string describe() const;

  bool operator==(const ScanDirection& o) const = default;
};

std::array<ScanDirection, 8> enumerate_directions();

// Square patch grid accepted by the scans: side >= 4 and side/2 a power of
// two, so the centered side/2 block exists and hosts a complete Hilbert curve.
struct ScanGrid {
  int64_t side = 0;
  explicit ScanGrid(int64_t h, int64_t w);
  int64_t cells() const { return side * side; }
};

// Bijective visit order over a grid: order[t] = row-major cell visited at
// step t; inverse[cell] = t.
struct ScanOrder {
  int64_t side = 0;
  std::vector<int64_t> order;
  std::vector<int64_t> inverse;
};

// Hilbert visit matrix of order n (2^n x 2^n, entries 1..4^n, consecutive
// entries 4-adjacent). Throws on n < 1 or overflow.
std::vector<int64_t> hilbert_matrix(int n);

// All cells outside the centered side/2 block, ring by ring.
std::vector<int64_t> circular_ring_order(const ScanGrid& grid, const ScanDirection& dir);

// Ring cells plus the central Hilbert block, concatenated per direction.
ScanOrder circular_hilbert_order(const ScanGrid& grid, const ScanDirection& dir);

// Process-wide cache; orders are immutable once built.
const ScanOrder& cached_order(int64_t side, const ScanDirection& dir);

// Renders the visit matrix (inverse order, 1-based) as aligned text rows.
std::string format_order(const ScanOrder& order);

}  // namespace spm

#pragma once

#include "levelvol/types.hpp"

#include <cstddef>
#include <vector>

namespace levelvol {

/// Regular n-dimensional grid of field samples.
///
/// Voxel i along axis d has its center at origin[d] + i * spacing[d]; the
/// voxel covers half a spacing on either side. Values are stored with the
/// first axis varying fastest.
struct VoxelGrid {
  std::vector<int> dims;
  std::vector<double> spacing;
  Point origin;
  std::vector<double> values;

  int dimension() const { return static_cast<int>(dims.size()); }
  std::size_t size() const;
  double voxel_volume() const;

  /// Throws InvalidArgument unless dims/spacing/origin agree in length,
  /// every dim and spacing is positive and values.size() == prod(dims).
  void validate() const;

  std::size_t flat_index(const std::vector<int>& idx) const;
  std::vector<int> multi_index(std::size_t flat) const;
  Point voxel_center(std::size_t flat) const;

  /// Box covered by the voxels (centers padded by half a spacing).
  Box extent() const;

  friend bool operator==(const VoxelGrid& a, const VoxelGrid& b);
};

}  // namespace levelvol

#include "levelvol/voxel_grid.hpp"

#include <string>

namespace levelvol {

std::size_t VoxelGrid::size() const {
  std::size_t s = 1;
  for (int d : dims) s *= static_cast<std::size_t>(d < 0 ? 0 : d);
  return dims.empty() ? 0 : s;
}

double VoxelGrid::voxel_volume() const {
  double v = 1.0;
  for (double s : spacing) v *= s;
  return v;
}

void VoxelGrid::validate() const {
  const auto n = dims.size();
  if (n == 0) throw InvalidArgument("voxel grid: dims is empty");
  if (spacing.size() != n || static_cast<std::size_t>(origin.size()) != n)
    throw InvalidArgument("voxel grid: dims, spacing and origin must have the same length (dims has " +
                          std::to_string(n) + ", spacing " + std::to_string(spacing.size()) + ", origin " +
                          std::to_string(origin.size()) + ")");
  for (std::size_t d = 0; d < n; ++d) {
    if (dims[d] <= 0) throw InvalidArgument("voxel grid: dims[" + std::to_string(d) + "] must be positive");
    if (!(spacing[d] > 0.0))
      throw InvalidArgument("voxel grid: spacing[" + std::to_string(d) + "] must be positive");
  }
  if (values.size() != size())
    throw InvalidArgument("voxel grid: expected " + std::to_string(size()) + " values, got " +
                          std::to_string(values.size()));
}

std::size_t VoxelGrid::flat_index(const std::vector<int>& idx) const {
  if (idx.size() != dims.size()) throw InvalidArgument("voxel grid: index has wrong dimension");
  std::size_t flat = 0;
  std::size_t stride = 1;
  for (std::size_t d = 0; d < dims.size(); ++d) {
    if (idx[d] < 0 || idx[d] >= dims[d]) throw InvalidArgument("voxel grid: index out of range");
    flat += stride * static_cast<std::size_t>(idx[d]);
    stride *= static_cast<std::size_t>(dims[d]);
  }
  return flat;
}

std::vector<int> VoxelGrid::multi_index(std::size_t flat) const {
  std::vector<int> idx(dims.size());
  for (std::size_t d = 0; d < dims.size(); ++d) {
    const auto dd = static_cast<std::size_t>(dims[d]);
    idx[d] = static_cast<int>(flat % dd);
    flat /= dd;
  }
  return idx;
}

Point VoxelGrid::voxel_center(std::size_t flat) const {
  Point x(static_cast<Eigen::Index>(dims.size()));
  for (std::size_t d = 0; d < dims.size(); ++d) {
    const auto dd = static_cast<std::size_t>(dims[d]);
    x[static_cast<Eigen::Index>(d)] = origin[static_cast<Eigen::Index>(d)] + static_cast<double>(flat % dd) * spacing[d];
    flat /= dd;
  }
  return x;
}

Box VoxelGrid::extent() const {
  const auto n = static_cast<Eigen::Index>(dims.size());
  Box b{Vector(n), Vector(n)};
  for (Eigen::Index d = 0; d < n; ++d) {
    const auto du = static_cast<std::size_t>(d);
    b.lo[d] = origin[d] - 0.5 * spacing[du];
    b.hi[d] = origin[d] + (dims[du] - 0.5) * spacing[du];
  }
  return b;
}

bool operator==(const VoxelGrid& a, const VoxelGrid& b) {
  return a.dims == b.dims && a.spacing == b.spacing && a.origin.size() == b.origin.size() &&
         a.origin == b.origin && a.values == b.values;
}

}  // namespace levelvol

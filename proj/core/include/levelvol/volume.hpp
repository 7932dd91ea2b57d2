#pragma once

#include "levelvol/domain.hpp"
#include "levelvol/field.hpp"
#include "levelvol/voxel_grid.hpp"

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace levelvol {

enum class VolumeMethod { monte_carlo, voxel_count, exact };

std::string_view to_string(VolumeMethod method);

/// Sampled h -> vol{x in V : f(x) >= h}.
struct VolumeCurve {
  std::vector<double> levels;
  std::vector<double> volumes;
  std::vector<double> stderrs;
  VolumeMethod method = VolumeMethod::exact;
  std::uint64_t sample_count = 0;
  std::uint64_t seed = 0;
  /// Bounding-box volume for Monte Carlo curves (used to derive covariances).
  double box_volume = 0.0;

  std::size_t size() const { return levels.size(); }
  /// Throws InvalidArgument if lengths differ, levels are not strictly
  /// increasing, or volumes are negative or increasing.
  void validate() const;
};

struct MonteCarloOptions {
  /// 0 = hardware concurrency. Results do not depend on this.
  unsigned threads = 0;
};

/// Samples per RNG substream. Part of the reproducibility contract: each
/// shard s uses std::mt19937_64 seeded with splitmix64(seed, s).
inline constexpr std::uint64_t kSamplesPerShard = 65536;

/// Uniform samples in the domain's bounding box, shared by all levels.
VolumeCurve volume_curve_mc(const ScalarField& field, const Domain& domain, const std::vector<double>& levels,
                            std::uint64_t samples, std::uint64_t seed, const MonteCarloOptions& options = {});

/// volumes[i] = voxel_volume * #{values >= levels[i]}.
VolumeCurve cumulative_dvh(const VoxelGrid& grid, const std::vector<double>& levels);

/// Same, counting only voxels whose centers lie in `domain`.
VolumeCurve cumulative_dvh(const VoxelGrid& grid, const std::vector<double>& levels, const Domain& domain);

/// `count` levels placed at h_star +- half_width / 2^i, i = 0..count/2-1,
/// ascending. count must be even and >= 4.
std::vector<double> refine_near(double h_star, double half_width, int count);

/// Covariance between the volume estimates at levels i and j. Zero for
/// exact and voxel-count curves; for Monte Carlo curves the nested
/// superlevel sets give Cov = V_j * se_i^2 / V_i for h_i <= h_j.
double volume_covariance(const VolumeCurve& curve, std::size_t i, std::size_t j);

/// CSV with header `h,volume,stderr`, shortest round-trip number format.
void write_csv(std::ostream& out, const VolumeCurve& curve);
VolumeCurve read_csv(std::istream& in);

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

}  // namespace levelvol

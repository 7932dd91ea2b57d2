#include "levelvol/volume.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace levelvol {

std::string_view to_string(VolumeMethod method) {
  switch (method) {
    case VolumeMethod::monte_carlo: return "monte_carlo";
    case VolumeMethod::voxel_count: return "voxel_count";
    case VolumeMethod::exact: return "exact";
  }
  return "unknown";
}

void VolumeCurve::validate() const {
  if (volumes.size() != levels.size() || stderrs.size() != levels.size())
    throw InvalidArgument("volume curve: levels, volumes and stderr differ in length");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i > 0 && !(levels[i] > levels[i - 1])) throw InvalidArgument("volume curve: levels must be strictly increasing");
    if (!(volumes[i] >= 0.0) || !(stderrs[i] >= 0.0)) throw InvalidArgument("volume curve: negative volume or stderr");
    if (i > 0 && volumes[i] > volumes[i - 1]) throw InvalidArgument("volume curve: volumes must be non-increasing");
  }
}

namespace {

void require_increasing(const std::vector<double>& levels, const char* what) {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!std::isfinite(levels[i])) throw InvalidArgument(std::string(what) + ": levels must be finite");
    if (i > 0 && !(levels[i] > levels[i - 1]))
      throw InvalidArgument(std::string(what) + ": levels must be strictly increasing");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t shard_seed(std::uint64_t seed, std::uint64_t shard) {
  return splitmix64(splitmix64(seed) ^ (shard * 0xd1342543de82ef95ULL + 1));
}

// Counts per shard: hist[k] = #{samples in V with exactly k levels <= f}.
void run_shard(const ScalarField& field, const Domain& domain, const std::vector<double>& levels, std::uint64_t seed,
               std::uint64_t shard, std::uint64_t count, std::vector<std::uint64_t>& hist) {
  const int n = field.dimension();
  const Box& box = domain.bounding_box();
  std::mt19937_64 rng(shard_seed(seed, shard));
  std::vector<double> x(static_cast<std::size_t>(n));
  std::vector<double> lo(x.size());
  std::vector<double> width(x.size());
  for (int d = 0; d < n; ++d) {
    lo[static_cast<std::size_t>(d)] = box.lo[d];
    width[static_cast<std::size_t>(d)] = box.hi[d] - box.lo[d];
  }
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  for (std::uint64_t i = 0; i < count; ++i) {
    for (std::size_t d = 0; d < x.size(); ++d) x[d] = lo[d] + width[d] * (static_cast<double>(rng() >> 11) * kScale);
    if (domain.constraint_unchecked(x.data()) > 0.0) continue;
    const double f = field.eval_unchecked(x.data());
    const auto k = std::upper_bound(levels.begin(), levels.end(), f) - levels.begin();
    ++hist[static_cast<std::size_t>(k)];
  }
}

}  // namespace

VolumeCurve volume_curve_mc(const ScalarField& field, const Domain& domain, const std::vector<double>& levels,
                            std::uint64_t samples, std::uint64_t seed, const MonteCarloOptions& options) {
  if (samples == 0) throw InvalidArgument("volume_curve_mc: samples must be positive");
  if (field.dimension() != domain.dimension()) throw InvalidArgument("volume_curve_mc: field and domain dimensions differ");
  require_increasing(levels, "volume_curve_mc");

  const std::uint64_t shards = (samples + kSamplesPerShard - 1) / kSamplesPerShard;
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, shards));

  std::vector<std::vector<std::uint64_t>> hists(threads, std::vector<std::uint64_t>(levels.size() + 1, 0));
  std::atomic<std::uint64_t> next{0};
  auto worker = [&](unsigned t) {
    for (std::uint64_t s = next++; s < shards; s = next++) {
      const std::uint64_t begin = s * kSamplesPerShard;
      const std::uint64_t count = std::min(kSamplesPerShard, samples - begin);
      run_shard(field, domain, levels, seed, s, count, hists[t]);
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  std::vector<std::uint64_t> hist(levels.size() + 1, 0);
  for (const auto& h : hists)
    for (std::size_t k = 0; k < h.size(); ++k) hist[k] += h[k];

  VolumeCurve c;
  c.levels = levels;
  c.method = VolumeMethod::monte_carlo;
  c.sample_count = samples;
  c.seed = seed;
  c.box_volume = domain.bounding_box().volume();
  c.volumes.resize(levels.size());
  c.stderrs.resize(levels.size());
  // Level i is reached by samples with more than i levels below f.
  std::uint64_t above = 0;
  const double nd = static_cast<double>(samples);
  for (std::size_t i = levels.size(); i-- > 0;) {
    above += hist[i + 1];
    const double p = static_cast<double>(above) / nd;
    c.volumes[i] = c.box_volume * p;
    c.stderrs[i] = c.box_volume * std::sqrt(p * (1.0 - p) / nd);
  }
  return c;
}

namespace {

VolumeCurve dvh_from_values(std::vector<double> values, const std::vector<double>& levels, double voxel_volume) {
  std::sort(values.begin(), values.end());
  VolumeCurve c;
  c.levels = levels;
  c.method = VolumeMethod::voxel_count;
  c.volumes.resize(levels.size());
  c.stderrs.assign(levels.size(), 0.0);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto below = std::lower_bound(values.begin(), values.end(), levels[i]) - values.begin();
    c.volumes[i] = static_cast<double>(values.size() - static_cast<std::size_t>(below)) * voxel_volume;
  }
  return c;
}

}  // namespace

VolumeCurve cumulative_dvh(const VoxelGrid& grid, const std::vector<double>& levels) {
  grid.validate();
  if (grid.values.empty()) throw InvalidArgument("cumulative_dvh: empty grid");
  require_increasing(levels, "cumulative_dvh");
  return dvh_from_values(grid.values, levels, grid.voxel_volume());
}

VolumeCurve cumulative_dvh(const VoxelGrid& grid, const std::vector<double>& levels, const Domain& domain) {
  grid.validate();
  if (grid.values.empty()) throw InvalidArgument("cumulative_dvh: empty grid");
  if (grid.dimension() != domain.dimension()) throw InvalidArgument("cumulative_dvh: grid and domain dimensions differ");
  require_increasing(levels, "cumulative_dvh");
  std::vector<double> inside;
  inside.reserve(grid.values.size());
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    const Point x = grid.voxel_center(i);
    if (domain.constraint_unchecked(x.data()) <= 0.0) inside.push_back(grid.values[i]);
  }
  return dvh_from_values(std::move(inside), levels, grid.voxel_volume());
}

std::vector<double> refine_near(double h_star, double half_width, int count) {
  if (count < 4 || count % 2 != 0) throw InvalidArgument("refine_near: count must be even and >= 4");
  if (!(half_width > 0.0)) throw InvalidArgument("refine_near: half_width must be positive");
  const int k = count / 2;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < k; ++i) out.push_back(h_star - std::ldexp(half_width, -i));
  for (int i = k - 1; i >= 0; --i) out.push_back(h_star + std::ldexp(half_width, -i));
  for (std::size_t i = 1; i < out.size(); ++i)
    if (!(out[i] > out[i - 1])) throw InvalidArgument("refine_near: half_width too small to separate levels");
  return out;
}

double volume_covariance(const VolumeCurve& curve, std::size_t i, std::size_t j) {
  if (curve.method != VolumeMethod::monte_carlo) return 0.0;
  if (i > j) std::swap(i, j);
  const double vi = curve.volumes[i];
  if (vi <= 0.0) return 0.0;
  return curve.stderrs[i] * curve.stderrs[i] * curve.volumes[j] / vi;
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const VolumeCurve& curve) {
  out << "h,volume,stderr\n";
  for (std::size_t i = 0; i < curve.size(); ++i)
    out << format_double(curve.levels[i]) << ',' << format_double(curve.volumes[i]) << ','
        << format_double(curve.stderrs[i]) << '\n';
}

VolumeCurve read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("volume csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "h,volume,stderr") throw InvalidArgument("volume csv: expected header 'h,volume,stderr'");
  VolumeCurve c;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    double vals[3];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int k = 0; k < 3; ++k) {
      const auto r = std::from_chars(p, end, vals[k]);
      if (r.ec != std::errc{} || (k < 2 && (r.ptr == end || *r.ptr != ',')) || (k == 2 && r.ptr != end))
        throw InvalidArgument("volume csv: malformed row at line " + std::to_string(lineno));
      p = r.ptr + 1;
    }
    c.levels.push_back(vals[0]);
    c.volumes.push_back(vals[1]);
    c.stderrs.push_back(vals[2]);
  }
  c.validate();
  return c;
}

}  // namespace levelvol

#pragma once

#include <levelvol/grid_io.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace levelvol::app {

enum ExitCode : int { ok = 0, input_error = 1, inconclusive = 2 };

/// "start:stop:step" (half-open at stop) or "v1,v2,...".
struct LevelSpec {
  std::vector<double> levels;
  double lo = 0.0;  // range probed for critical values: [lo, hi)
  double hi = 0.0;
};

LevelSpec parse_levels(const std::string& text);

struct SyntheticSpec {
  StandardForm form = StandardForm::b;
  int p = 1;
  int q = 1;
  int n = 2;
  bool negate = false;
};

/// "form:p:q:n", e.g. "b:1:1:2".
SyntheticSpec parse_synthetic(const std::string& text);

/// Envelope radius used for synthesized standard forms. Large enough that
/// the default [-1, 1]^n grid sits inside the inner ball for n <= 4.
inline constexpr double kEnvelopeRadius = 4.0;

/// Domain paired with a synthesized form: a slightly off-center ball of
/// radius 0.8 for forms a and b, a flat-bottomed slab for form c.
DomainSpec default_domain(StandardForm form, int n);

/// Default grid size per axis for synth.
int default_grid_size(int n);

struct AnalysisConfig {
  std::optional<std::filesystem::path> grid;
  std::optional<SyntheticSpec> synthetic;
  std::string levels;
  std::uint64_t samples = 10'000'000;
  std::uint64_t seed = 1;
  int max_order = 3;
  double noise_mult = 5.0;
  double probe_half_width = 0.2;
  int probe_count = 24;
  /// Evenly spaced levels added across each probe window.
  int probe_uniform = 40;
  int seed_resolution = 0;  // 0: chosen from the dimension
  std::filesystem::path out = "dvh.csv";
  std::filesystem::path report = "report.json";
  bool quiet = false;
};

int cmd_analyze(const AnalysisConfig& config, std::ostream& out, std::ostream& err);

struct SynthConfig {
  SyntheticSpec spec;
  std::vector<int> dims;        // empty: default_grid_size(n) per axis
  std::vector<double> spacing;  // empty: the grid spans [-1, 1]^n
  std::vector<double> origin;   // empty: centered
  SampleType dtype = SampleType::f64;
  std::filesystem::path out = "grid.json";
};

int cmd_synth(const SynthConfig& config, std::ostream& out, std::ostream& err);

struct CoeffsConfig {
  int p_max = 1;
  int q_max = 1;
  bool check = false;
  bool boundary = false;
  std::optional<std::filesystem::path> out;
};

/// Largest |eval_I - oracle_I| over the check matrix.
double coeffs_check_deviation(int p_max, int q_max);

int cmd_coeffs(const CoeffsConfig& config, std::ostream& out, std::ostream& err);

/// Full command line (argv[0] is the program name).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace levelvol::app

#pragma once

#include "levelvol/domain.hpp"
#include "levelvol/field.hpp"
#include "levelvol/voxel_grid.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace levelvol {

/// Malformed or unreadable grid header / payload. `field()` names the
/// offending header key (empty when not applicable), `line()` is the 1-based
/// header line (0 when unknown).
class GridFormatError : public std::runtime_error {
 public:
  GridFormatError(const std::string& message, std::string field = {}, int line = 0);
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

enum class SampleType { f32, f64 };

/// Domain description stored alongside a grid.
struct DomainSpec {
  DomainKind kind = DomainKind::box;
  Point center;            // ball; slab axis (n - 1 values, optional)
  double radius = 0.0;     // ball
  double flat_radius = 0;  // slab
  double height = 0;       // slab
  double steepness = 0;    // slab
  Box box;                 // box
};

/// Provenance of a synthesized grid.
struct SynthInfo {
  StandardForm form = StandardForm::b;
  int p = 0;
  int q = 0;
  double envelope_radius = 0.0;
  double offset = 0.0;
  bool negate = false;
  Point critical_point;
  double critical_value = 0.0;
};

struct GridFile {
  VoxelGrid grid;
  SampleType dtype = SampleType::f64;
  std::optional<DomainSpec> domain;
  std::optional<SynthInfo> synth;
};

Domain make_domain(const DomainSpec& spec, int n);

/// Writes `<header>` and the raw payload `<header stem>.raw` next to it.
/// f32 payloads round the values; reading them back and writing again is
/// bit-exact.
void write_grid(const std::filesystem::path& header, const GridFile& file);

GridFile read_grid(const std::filesystem::path& header);

}  // namespace levelvol

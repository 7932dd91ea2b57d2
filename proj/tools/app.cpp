#include "app.hpp"

#include <levelvol/coeffs.hpp>
#include <levelvol/field.hpp>
#include <levelvol/morse.hpp>
#include <levelvol/probe.hpp>
#include <levelvol/quadrature.hpp>
#include <levelvol/serialize.hpp>
#include <levelvol/volume.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace levelvol::app {

namespace {

using json = nlohmann::ordered_json;

double parse_number(std::string_view text, const char* what) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
    throw InvalidArgument(std::string(what) + ": cannot parse '" + std::string(text) + "' as a number");
  return v;
}

int parse_int(std::string_view text, const char* what) {
  int v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end)
    throw InvalidArgument(std::string(what) + ": cannot parse '" + std::string(text) + "' as an integer");
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

// Clustered levels from refine_near plus an even layer across (h - w, h + w).
std::vector<double> probe_window_levels(double h, double w, int clustered, int uniform) {
  std::vector<double> lv = refine_near(h, w, clustered);
  for (int i = 0; i < uniform; ++i) {
    const double x = h - w + 2.0 * w * (i + 0.5) / uniform;
    if (x != h) lv.push_back(x);
  }
  std::sort(lv.begin(), lv.end());
  lv.erase(std::unique(lv.begin(), lv.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)); }),
           lv.end());
  return lv;
}

std::string synthetic_label(const SyntheticSpec& s) {
  std::ostringstream o;
  o << to_string(s.form) << ':' << s.p << ':' << s.q << ':' << s.n;
  if (s.negate) o << ":negated";
  return o.str();
}

int default_seed_resolution(int n) {
  switch (n) {
    case 1: return 256;
    case 2: return 64;
    case 3: return 24;
    case 4: return 12;
    default: return 6;
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::string fmt(double x) { return format_double(x); }

std::string describe(const SingularityReport& r) {
  std::ostringstream o;
  if (r.inconclusive) {
    o << "inconclusive";
    if (!r.note.empty()) o << " (" << r.note << ")";
    return o.str();
  }
  if (r.smooth_to_max_tested) {
    o << "smooth through order " << r.max_order_tested;
    return o.str();
  }
  o << "order " << *r.measured_order;
  if (r.measured_kind) o << ' ' << to_string(*r.measured_kind);
  return o.str();
}

}  // namespace

LevelSpec parse_levels(const std::string& text) {
  LevelSpec spec;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw InvalidArgument("levels: expected start:stop:step, got '" + text + "'");
    const double start = parse_number(parts[0], "levels start");
    const double stop = parse_number(parts[1], "levels stop");
    const double step = parse_number(parts[2], "levels step");
    if (!(step > 0.0)) throw InvalidArgument("levels: step must be > 0");
    if (!(start < stop)) throw InvalidArgument("levels: start must be < stop");
    const double count = std::ceil((stop - start) / step - 1e-9);
    if (count > 1e7) throw InvalidArgument("levels: more than 10^7 levels requested");
    for (long i = 0; i < static_cast<long>(count); ++i) spec.levels.push_back(start + static_cast<double>(i) * step);
    spec.lo = start;
    spec.hi = stop;
  } else {
    for (const auto part : split(text, ',')) spec.levels.push_back(parse_number(part, "levels"));
    if (spec.levels.empty()) throw InvalidArgument("levels: empty list");
    for (std::size_t i = 1; i < spec.levels.size(); ++i)
      if (!(spec.levels[i - 1] < spec.levels[i])) throw InvalidArgument("levels: list must be strictly increasing");
    spec.lo = spec.levels.front();
    spec.hi = std::nextafter(spec.levels.back(), HUGE_VAL);
  }
  return spec;
}

SyntheticSpec parse_synthetic(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 4) throw InvalidArgument("synthetic field: expected form:p:q:n, got '" + text + "'");
  SyntheticSpec s;
  s.form = parse_standard_form(parts[0]);
  s.p = parse_int(parts[1], "synthetic p");
  s.q = parse_int(parts[2], "synthetic q");
  s.n = parse_int(parts[3], "synthetic n");
  make_standard_form(s.form, s.p, s.q, s.n, kEnvelopeRadius);  // validates the type arithmetic
  return s;
}

DomainSpec default_domain(StandardForm form, int n) {
  static constexpr double shift[] = {0.8, -0.5, 0.3, -0.6, 0.45, -0.35, 0.7, -0.25};
  DomainSpec d;
  if (form == StandardForm::c) {
    d.kind = DomainKind::slab;
    d.flat_radius = 0.6;
    d.height = 0.7;
    d.steepness = 100.0;
    d.center = Point::Zero(n - 1);
    for (int i = 0; i < n - 1; ++i) d.center[i] = 0.05 * shift[i % 8];
    return d;
  }
  d.kind = DomainKind::ball;
  d.radius = 0.8;
  d.center = Point::Zero(n);
  for (int i = 0; i < n; ++i) d.center[i] = 0.05 * shift[i % 8];
  return d;
}

int default_grid_size(int n) {
  switch (n) {
    case 1: return 512;
    case 2: return 128;
    case 3: return 48;
    case 4: return 20;
    default: return 10;
  }
}

int cmd_synth(const SynthConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const auto& s = config.spec;
    const auto field = make_standard_form(s.form, s.p, s.q, s.n, kEnvelopeRadius, 0.0, s.negate);
    std::vector<int> dims = config.dims;
    if (dims.empty()) dims.assign(s.n, default_grid_size(s.n));
    if (static_cast<int>(dims.size()) != s.n)
      throw InvalidArgument("synth: " + std::to_string(dims.size()) + " grid sizes given for n = " + std::to_string(s.n));
    for (int d : dims)
      if (d < 2) throw InvalidArgument("synth: grid sizes must be >= 2");
    std::vector<double> spacing = config.spacing;
    if (spacing.size() == 1) spacing.assign(s.n, spacing[0]);
    if (spacing.empty())
      for (int d : dims) spacing.push_back(2.0 / d);
    if (static_cast<int>(spacing.size()) != s.n) throw InvalidArgument("synth: spacing needs 1 or n values");
    Point origin(s.n);
    if (config.origin.empty()) {
      for (int i = 0; i < s.n; ++i) origin[i] = -0.5 * spacing[i] * (dims[i] - 1);
    } else {
      if (static_cast<int>(config.origin.size()) != s.n) throw InvalidArgument("synth: origin needs n values");
      for (int i = 0; i < s.n; ++i) origin[i] = config.origin[i];
    }

    GridFile file;
    file.grid = sample_to_grid(field, dims, spacing, origin);
    file.dtype = config.dtype;
    file.domain = default_domain(s.form, s.n);
    SynthInfo info;
    info.form = s.form;
    info.p = s.p;
    info.q = s.q;
    info.envelope_radius = kEnvelopeRadius;
    info.offset = 0.0;
    info.negate = s.negate;
    info.critical_point = Point::Zero(s.n);
    info.critical_value = 0.0;
    file.synth = info;
    write_grid(config.out, file);

    out << "wrote " << config.out.string() << " (" << synthetic_label(s) << ", " << file.grid.size() << " voxels)\n";
    if (s.form == StandardForm::a) {
      out << "regular point at origin, value 0\n";
    } else {
      const int mp = s.negate ? s.q : s.p;
      const int mq = s.negate ? s.p : s.q;
      out << (s.form == StandardForm::b ? "interior" : "boundary") << " critical point at origin, value 0, type ("
          << mp << ", " << mq << ")\n";
    }
    return ok;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return input_error;
  }
}

double coeffs_check_deviation(int p_max, int q_max) {
  static constexpr double hs[] = {0.01, 0.05, 0.1, 0.3};
  double worst = 0.0;
  for (int b = 0; b < 2; ++b)
    for (int p = 1; p <= p_max; ++p)
      for (int q = 1; q <= q_max; ++q) {
        const auto e = expansion(p, q, b == 1);
        for (double h : hs)
          for (double sgn : {-1.0, 1.0}) {
            const double x = sgn * h;
            worst = std::max(worst, std::abs(eval_I(e, x) - oracle_I(p, q, b == 1, x)));
          }
      }
  return worst;
}

int cmd_coeffs(const CoeffsConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.p_max < 1 || config.q_max < 1) throw InvalidArgument("coeffs: p_max and q_max must be >= 1");
    std::ostringstream table;
    write_coeff_table(table, config.p_max, config.q_max, config.boundary);
    std::ostream* msg = &out;
    if (config.out) {
      write_text(*config.out, table.str());
    } else {
      out << table.str();
      msg = &err;
    }
    if (config.check) {
      const double dev = coeffs_check_deviation(config.p_max, config.q_max);
      const bool pass = dev <= 1e-8;
      *msg << "max deviation " << fmt(dev) << (pass ? " <= " : " > ") << "1e-8\n";
      return pass ? ok : input_error;
    }
    return ok;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return input_error;
  }
}

int cmd_analyze(const AnalysisConfig& config, std::ostream& out, std::ostream& err) {
  std::optional<ScalarField> field;
  std::optional<Domain> domain;
  std::optional<VoxelGrid> grid;
  LevelSpec levels;
  json input;
  try {
    if (config.grid.has_value() == config.synthetic.has_value())
      throw InvalidArgument("analyze: give exactly one of --grid and --field");
    if (config.max_order < 1) throw InvalidArgument("analyze: --max-order must be >= 1");
    if (!(config.noise_mult > 0.0)) throw InvalidArgument("analyze: --noise-mult must be > 0");
    if (config.samples < 1) throw InvalidArgument("analyze: --samples must be >= 1");
    if (!(config.probe_half_width > 0.0)) throw InvalidArgument("analyze: --probe-width must be > 0");
    if (config.probe_count < 4 || config.probe_count % 2 != 0)
      throw InvalidArgument("analyze: --probe-count must be even and >= 4");
    if (config.probe_uniform < 0) throw InvalidArgument("analyze: --probe-uniform must be >= 0");
    levels = parse_levels(config.levels);

    if (config.grid) {
      auto file = read_grid(*config.grid);
      const int n = file.grid.dimension();
      domain = file.domain ? make_domain(*file.domain, n) : make_box(file.grid.extent());
      field = make_voxel_interpolant(file.grid);
      grid = std::move(file.grid);
      input["grid"] = config.grid->string();
    } else {
      const auto& s = *config.synthetic;
      field = make_standard_form(s.form, s.p, s.q, s.n, kEnvelopeRadius, 0.0, s.negate);
      domain = make_domain(default_domain(s.form, s.n), s.n);
      input["field"] = synthetic_label(s);
    }
  } catch (const GridFormatError& e) {
    err << "error: " << e.what();
    if (!e.field().empty()) err << " [field " << e.field() << ']';
    if (e.line() > 0) err << " [line " << e.line() << ']';
    err << '\n';
    return input_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return input_error;
  }

  try {
    const int n = field->dimension();

    // Volume curve over the requested levels.
    const VolumeCurve dvh = grid ? cumulative_dvh(*grid, levels.levels, *domain)
                                 : volume_curve_mc(*field, *domain, levels.levels, config.samples, config.seed);
    {
      std::ostringstream csv;
      write_csv(csv, dvh);
      write_text(config.out, csv.str());
    }
    const double total = grid ? dvh.volumes.front() : domain->bounding_box().volume();
    std::size_t below = 0;
    std::size_t above = 0;
    for (std::size_t i = 0; i < dvh.size(); ++i) {
      if (dvh.volumes[i] <= 0.0) ++above;
    }
    if (grid) {
      double lo = HUGE_VAL;
      for (std::size_t i = 0; i < grid->size(); ++i)
        if (domain->contains(grid->voxel_center(i))) lo = std::min(lo, grid->values[i]);
      for (double h : levels.levels)
        if (h < lo) ++below;
    }
    (void)total;
    if (above > 0)
      err << "warning: " << above << " level(s) above the data range (zero volume rows kept)\n";
    if (below > 0)
      err << "warning: " << below << " level(s) below the data range (full volume rows kept)\n";

    // Morse audit.
    MorseOptions mo;
    mo.seed_grid_resolution = config.seed_resolution > 0 ? config.seed_resolution : default_seed_resolution(n);
    const auto audit = check_nondegeneracy(*field, *domain, mo);
    const double eigen_tol = mo.eigen_tol > 0.0 ? mo.eigen_tol : mo.tol;

    std::vector<CriticalPoint> all = audit.interior;
    all.insert(all.end(), audit.boundary.begin(), audit.boundary.end());
    std::stable_sort(all.begin(), all.end(),
                     [](const CriticalPoint& a, const CriticalPoint& b) { return a.value < b.value; });

    const bool flat_field = audit.condition_a.status == CheckStatus::fail &&
                            audit.condition_a.note.find("region") != std::string::npos;
    const double w = config.probe_half_width;

    json values = json::array();
    json probes = json::array();
    bool any_inconclusive = false;
    std::ostringstream summary;
    summary << "levels: " << dvh.size() << " in [" << fmt(levels.lo) << ", " << fmt(levels.hi) << ")\n";
    summary << "critical points: " << audit.interior.size() << " interior, " << audit.boundary.size()
            << " boundary; nondegeneracy " << (audit.all_pass() ? "pass" : "fail") << '\n';
    if (flat_field) summary << "gradient vanishes on a region; probes skipped\n";

    for (const auto& cp : all) {
      if (!(cp.value >= levels.lo && cp.value < levels.hi)) continue;
      json entry;
      entry["value"] = json_number(cp.value);
      entry["site"] = std::string(to_string(cp.site));
      entry["morse_p"] = cp.morse_p;
      entry["morse_q"] = cp.morse_q;
      entry["location"] = to_json(cp.location);
      std::string status = "probed";
      if (flat_field)
        status = "skipped: field is flat";
      else if (cp.degenerate(eigen_tol))
        status = "skipped: degenerate";
      else if (cp.value - levels.lo < 0.5 * w || levels.hi - cp.value < 0.5 * w)
        status = "skipped: near range end";
      entry["status"] = status;
      values.push_back(entry);

      summary << "  h* = " << fmt(cp.value) << " (" << to_string(cp.site) << ", type (" << cp.morse_p << ", "
              << cp.morse_q << ")): ";
      if (status != "probed") {
        summary << status << '\n';
        continue;
      }

      // Keep other critical values out of the window.
      double pw = w;
      for (const auto& other : all)
        if (&other != &cp && other.value != cp.value) pw = std::min(pw, 0.5 * std::abs(other.value - cp.value));
      const auto probe_levels = probe_window_levels(cp.value, pw, config.probe_count, config.probe_uniform);
      const auto curve = volume_curve_mc(*field, *domain, probe_levels, config.samples, config.seed);
      std::optional<Prediction> pred;
      try {
        pred = predict(cp, n, eigen_tol);
      } catch (const InvalidArgument&) {
      }
      const auto rep = pred ? measure(curve, cp.value, *pred, config.max_order, config.noise_mult)
                            : measure(curve, cp.value, config.max_order, config.noise_mult);
      any_inconclusive = any_inconclusive || rep.inconclusive;
      json pj;
      pj["location"] = to_json(cp.location);
      pj["site"] = std::string(to_string(cp.site));
      pj["morse_p"] = cp.morse_p;
      pj["morse_q"] = cp.morse_q;
      const json rj = to_json(rep);
      for (auto it = rj.begin(); it != rj.end(); ++it) pj[it.key()] = *it;
      probes.push_back(pj);

      summary << describe(rep);
      if (pred) {
        summary << "; predicted order " << pred->order << ' ' << to_string(pred->kind)
                << (rep.matches_prediction() ? " (match)" : rep.inconclusive ? "" : " (MISMATCH)");
      }
      summary << '\n';
    }

    json report;
    report["input"] = input;
    report["dimension"] = n;
    report["domain"] = std::string(to_string(domain->kind()));
    report["levels"] = {{"count", dvh.size()}, {"lo", json_number(levels.lo)}, {"hi", json_number(levels.hi)}};
    report["settings"] = {{"samples", config.samples},
                          {"seed", config.seed},
                          {"max_order", config.max_order},
                          {"noise_mult", json_number(config.noise_mult)},
                          {"probe_half_width", json_number(w)},
                          {"probe_count", config.probe_count},
                          {"probe_uniform", config.probe_uniform},
                          {"seed_grid_resolution", mo.seed_grid_resolution}};
    report["dvh"] = {{"path", config.out.string()}, {"method", std::string(to_string(dvh.method))}};
    report["nondegeneracy"] = to_json(audit);
    report["critical_values"] = values;
    report["singularities"] = probes;
    report["verdict"] = any_inconclusive ? "inconclusive" : "conclusive";
    write_text(config.report, report.dump(2) + "\n");

    summary << "verdict: " << (any_inconclusive ? "inconclusive" : "conclusive") << '\n';
    if (!config.quiet) out << summary.str();
    return any_inconclusive ? inconclusive : ok;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return input_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return input_error;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Superlevel volume curves and their singularities at critical values"};
  app.require_subcommand(1);

  AnalysisConfig ac;
  std::string grid_path;
  std::string field_spec;
  std::string out_path;
  std::string report_path;
  auto* analyze = app.add_subcommand("analyze", "Volume curve, Morse audit and singularity probes");
  auto* grid_opt = analyze->add_option("--grid", grid_path, "Grid header (JSON)");
  auto* field_opt = analyze->add_option("--field", field_spec, "Synthetic standard form form:p:q:n");
  grid_opt->excludes(field_opt);
  analyze->add_option("--levels", ac.levels, "start:stop:step or v1,v2,...")->required();
  analyze->add_option("--samples", ac.samples, "Monte Carlo samples per curve");
  analyze->add_option("--seed", ac.seed, "RNG seed");
  analyze->add_option("--max-order", ac.max_order, "Highest derivative order tested");
  analyze->add_option("--noise-mult", ac.noise_mult, "Noise band multiplier");
  analyze->add_option("--probe-width", ac.probe_half_width, "Probe half-width around each critical value");
  analyze->add_option("--probe-count", ac.probe_count, "Levels per probe, clustered at the critical value (even)");
  analyze->add_option("--probe-uniform", ac.probe_uniform, "Extra evenly spaced levels per probe");
  analyze->add_option("--seed-resolution", ac.seed_resolution, "Critical point seed grid per axis");
  analyze->add_option("--out", out_path, "Volume curve CSV")->default_str("dvh.csv");
  analyze->add_option("--report", report_path, "Report JSON")->default_str("report.json");
  analyze->add_flag("--quiet", ac.quiet, "No summary on stdout");

  SynthConfig sc;
  std::string form;
  int sp = 0;
  int sq = 0;
  int sn = 0;
  std::string dtype = "f64";
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Sample a blended standard form onto a grid");
  synth->add_option("form", form, "a, b or c")->required();
  synth->add_option("p", sp, "Positive Hessian directions")->required();
  synth->add_option("q", sq, "Negative Hessian directions")->required();
  synth->add_option("n", sn, "Dimension")->required();
  synth->add_option("dims", sc.dims, "Grid size per axis");
  synth->add_option("--spacing", sc.spacing, "Voxel spacing (one value or one per axis)");
  synth->add_option("--origin", sc.origin, "Center of the first voxel");
  synth->add_option("--dtype", dtype, "f32 or f64")->check(CLI::IsMember({"f32", "f64"}));
  synth->add_flag("--negate", sc.spec.negate, "Use -F (swaps p and q)");
  synth->add_option("--out", synth_out, "Grid header path")->default_str("grid.json");

  CoeffsConfig cc;
  std::string coeffs_out;
  auto* coeffs = app.add_subcommand("coeffs", "Exact expansion coefficient table");
  coeffs->add_option("p_max", cc.p_max)->required()->check(CLI::PositiveNumber);
  coeffs->add_option("q_max", cc.q_max)->required()->check(CLI::PositiveNumber);
  coeffs->add_flag("--check", cc.check, "Compare against numerical quadrature");
  coeffs->add_flag("--boundary", cc.boundary, "Append boundary rows");
  coeffs->add_option("--out", coeffs_out, "Write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : input_error;
  }

  if (*analyze) {
    if (!grid_path.empty()) ac.grid = grid_path;
    if (!field_spec.empty()) {
      try {
        ac.synthetic = parse_synthetic(field_spec);
      } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return input_error;
      }
    }
    if (!out_path.empty()) ac.out = out_path;
    if (!report_path.empty()) ac.report = report_path;
    return cmd_analyze(ac, out, err);
  }
  if (*synth) {
    try {
      sc.spec.form = parse_standard_form(form);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return input_error;
    }
    sc.spec.p = sp;
    sc.spec.q = sq;
    sc.spec.n = sn;
    sc.dtype = dtype == "f32" ? SampleType::f32 : SampleType::f64;
    if (!synth_out.empty()) sc.out = synth_out;
    return cmd_synth(sc, out, err);
  }
  if (!coeffs_out.empty()) cc.out = coeffs_out;
  return cmd_coeffs(cc, out, err);
}

}  // namespace levelvol::app

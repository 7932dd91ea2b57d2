#include "levelvol/grid_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace levelvol {

using json = nlohmann::ordered_json;

GridFormatError::GridFormatError(const std::string& message, std::string field, int line)
    : std::runtime_error(message), field_(std::move(field)), line_(line) {}

namespace {

template <typename U>
U byteswap_if_big(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U r = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) r = static_cast<U>((r << 8) | ((v >> (8 * i)) & 0xff));
    return r;
  }
  return v;
}

// Line of the first occurrence of "key" in the header text (0 if absent).
int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class HeaderReader {
 public:
  HeaderReader(const json& j, const std::string& text) : j_(j), text_(text) {}

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const int line = line_of_key(text_, key.substr(0, key.find('.')));
    std::string msg = "grid header: field '" + key + "': " + what;
    if (line > 0) msg += " (line " + std::to_string(line) + ")";
    throw GridFormatError(msg, key, line);
  }

  const json& at(const json& obj, const std::string& key, const std::string& path) const {
    if (!obj.is_object() || !obj.contains(key)) fail(path, "missing");
    return obj.at(key);
  }

  std::vector<double> numbers(const json& v, const std::string& path) const {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(path, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  double number(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  int integer(const json& v, const std::string& path) const {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
  }

  const json& root() const { return j_; }

 private:
  const json& j_;
  const std::string& text_;
};

Point to_point(const std::vector<double>& v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<Eigen::Index>(i)] = v[i];
  return p;
}

std::vector<double> to_vec(const Point& p) { return {p.data(), p.data() + p.size()}; }

json domain_to_json(const DomainSpec& d) {
  json j;
  j["kind"] = std::string(to_string(d.kind));
  switch (d.kind) {
    case DomainKind::ball:
      j["center"] = to_vec(d.center);
      j["radius"] = d.radius;
      break;
    case DomainKind::slab:
      j["flat_radius"] = d.flat_radius;
      j["height"] = d.height;
      j["steepness"] = d.steepness;
      if (d.center.size() > 0) j["center"] = to_vec(d.center);
      break;
    case DomainKind::box:
      j["lo"] = to_vec(d.box.lo);
      j["hi"] = to_vec(d.box.hi);
      break;
    case DomainKind::implicit:
      throw InvalidArgument("write_grid: implicit domains cannot be serialized");
  }
  return j;
}

DomainSpec domain_from_json(const HeaderReader& r, const json& j, int n) {
  DomainSpec d;
  const auto& kind = r.at(j, "kind", "domain.kind");
  if (!kind.is_string()) r.fail("domain.kind", "expected a string");
  const auto k = kind.get<std::string>();
  if (k == "ball") {
    d.kind = DomainKind::ball;
    d.center = to_point(r.numbers(r.at(j, "center", "domain.center"), "domain.center"));
    if (d.center.size() != n) r.fail("domain.center", "length does not match dims");
    d.radius = r.number(r.at(j, "radius", "domain.radius"), "domain.radius");
    if (!(d.radius > 0.0)) r.fail("domain.radius", "must be positive");
  } else if (k == "slab") {
    d.kind = DomainKind::slab;
    d.flat_radius = r.number(r.at(j, "flat_radius", "domain.flat_radius"), "domain.flat_radius");
    d.height = r.number(r.at(j, "height", "domain.height"), "domain.height");
    d.steepness = r.number(r.at(j, "steepness", "domain.steepness"), "domain.steepness");
    if (n < 2) r.fail("domain.kind", "slab needs at least 2 dimensions");
    if (j.contains("center")) {
      d.center = to_point(r.numbers(j.at("center"), "domain.center"));
      if (d.center.size() != n - 1) r.fail("domain.center", "slab axis needs dims - 1 values");
    }
    if (!(d.flat_radius > 0.0) || !(d.height > 0.0) || !(d.steepness > 0.0))
      r.fail("domain", "slab parameters must be positive");
  } else if (k == "box") {
    d.kind = DomainKind::box;
    d.box.lo = to_point(r.numbers(r.at(j, "lo", "domain.lo"), "domain.lo"));
    d.box.hi = to_point(r.numbers(r.at(j, "hi", "domain.hi"), "domain.hi"));
    if (d.box.lo.size() != n || d.box.hi.size() != n) r.fail("domain.lo", "length does not match dims");
    if (!(d.box.hi.array() > d.box.lo.array()).all()) r.fail("domain.hi", "must exceed lo on every axis");
  } else {
    r.fail("domain.kind", "unknown kind '" + k + "' (expected ball, slab or box)");
  }
  return d;
}

json synth_to_json(const SynthInfo& s) {
  json j;
  j["form"] = std::string(to_string(s.form));
  j["p"] = s.p;
  j["q"] = s.q;
  j["envelope_radius"] = s.envelope_radius;
  j["offset"] = s.offset;
  j["negate"] = s.negate;
  j["critical_point"] = to_vec(s.critical_point);
  j["critical_value"] = s.critical_value;
  return j;
}

SynthInfo synth_from_json(const HeaderReader& r, const json& j) {
  SynthInfo s;
  const auto& form = r.at(j, "form", "synth.form");
  if (!form.is_string()) r.fail("synth.form", "expected a string");
  try {
    s.form = parse_standard_form(form.get<std::string>());
  } catch (const InvalidArgument& e) {
    r.fail("synth.form", e.what());
  }
  s.p = r.integer(r.at(j, "p", "synth.p"), "synth.p");
  s.q = r.integer(r.at(j, "q", "synth.q"), "synth.q");
  s.envelope_radius = r.number(r.at(j, "envelope_radius", "synth.envelope_radius"), "synth.envelope_radius");
  s.offset = j.contains("offset") ? r.number(j.at("offset"), "synth.offset") : 0.0;
  if (j.contains("negate")) {
    if (!j.at("negate").is_boolean()) r.fail("synth.negate", "expected true or false");
    s.negate = j.at("negate").get<bool>();
  }
  s.critical_point = to_point(r.numbers(r.at(j, "critical_point", "synth.critical_point"), "synth.critical_point"));
  s.critical_value = r.number(r.at(j, "critical_value", "synth.critical_value"), "synth.critical_value");
  return s;
}

}  // namespace

Domain make_domain(const DomainSpec& spec, int n) {
  switch (spec.kind) {
    case DomainKind::ball:
      require_dimension(spec.center, n, "make_domain");
      return make_ball(spec.center, spec.radius);
    case DomainKind::slab: return make_slab(n, spec.flat_radius, spec.height, spec.steepness, spec.center);
    case DomainKind::box:
      require_dimension(spec.box.lo, n, "make_domain");
      return make_box(spec.box);
    case DomainKind::implicit: break;
  }
  throw InvalidArgument("make_domain: implicit domains have no stored description");
}

void write_grid(const std::filesystem::path& header, const GridFile& file) {
  file.grid.validate();
  std::filesystem::path raw = header;
  raw.replace_extension(".raw");
  json j;
  j["dims"] = file.grid.dims;
  j["spacing"] = file.grid.spacing;
  j["origin"] = to_vec(file.grid.origin);
  j["dtype"] = file.dtype == SampleType::f32 ? "f32" : "f64";
  j["data"] = raw.filename().string();
  if (file.domain) j["domain"] = domain_to_json(*file.domain);
  if (file.synth) j["synth"] = synth_to_json(*file.synth);

  std::ofstream out(header, std::ios::binary | std::ios::trunc);
  if (!out) throw GridFormatError("cannot open " + header.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw GridFormatError("failed writing " + header.string());

  std::ofstream bin(raw, std::ios::binary | std::ios::trunc);
  if (!bin) throw GridFormatError("cannot open " + raw.string() + " for writing");
  const auto& v = file.grid.values;
  if (file.dtype == SampleType::f64) {
    std::vector<std::uint64_t> words(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) words[i] = byteswap_if_big(std::bit_cast<std::uint64_t>(v[i]));
    bin.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * 8));
  } else {
    std::vector<std::uint32_t> words(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      words[i] = byteswap_if_big(std::bit_cast<std::uint32_t>(static_cast<float>(v[i])));
    bin.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * 4));
  }
  if (!bin) throw GridFormatError("failed writing " + raw.string());
}

GridFile read_grid(const std::filesystem::path& header) {
  std::ifstream in(header, std::ios::binary);
  if (!in) throw GridFormatError("cannot open grid header " + header.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
    throw GridFormatError("grid header: invalid JSON at line " + std::to_string(line) + ": " + e.what(), {}, line);
  }
  if (!j.is_object()) throw GridFormatError("grid header: top level must be a JSON object", {}, 1);
  HeaderReader r(j, text);

  GridFile file;
  const auto dims = r.numbers(r.at(j, "dims", "dims"), "dims");
  for (double d : dims) {
    if (d != std::floor(d) || d < 1 || d > 1e9) r.fail("dims", "entries must be positive integers");
    file.grid.dims.push_back(static_cast<int>(d));
  }
  if (file.grid.dims.empty()) r.fail("dims", "must not be empty");
  const int n = static_cast<int>(file.grid.dims.size());
  file.grid.spacing = r.numbers(r.at(j, "spacing", "spacing"), "spacing");
  if (static_cast<int>(file.grid.spacing.size()) != n) r.fail("spacing", "length does not match dims");
  for (double s : file.grid.spacing)
    if (!(s > 0.0)) r.fail("spacing", "entries must be positive");
  file.grid.origin = to_point(r.numbers(r.at(j, "origin", "origin"), "origin"));
  if (file.grid.origin.size() != n) r.fail("origin", "length does not match dims");

  const auto& dtype = r.at(j, "dtype", "dtype");
  if (!dtype.is_string()) r.fail("dtype", "expected \"f32\" or \"f64\"");
  if (dtype == "f32") file.dtype = SampleType::f32;
  else if (dtype == "f64") file.dtype = SampleType::f64;
  else r.fail("dtype", "expected \"f32\" or \"f64\", got \"" + dtype.get<std::string>() + "\"");

  const auto& data = r.at(j, "data", "data");
  if (!data.is_string() || data.get<std::string>().empty()) r.fail("data", "expected a relative file path");
  const std::filesystem::path raw = header.parent_path() / data.get<std::string>();

  if (j.contains("domain")) file.domain = domain_from_json(r, j.at("domain"), n);
  if (j.contains("synth")) file.synth = synth_from_json(r, j.at("synth"));

  const std::size_t count = file.grid.size();
  const std::size_t width = file.dtype == SampleType::f32 ? 4 : 8;
  std::ifstream bin(raw, std::ios::binary | std::ios::ate);
  if (!bin) r.fail("data", "cannot open payload " + raw.string());
  const auto bytes = static_cast<std::size_t>(bin.tellg());
  if (bytes != count * width)
    r.fail("data", "payload has " + std::to_string(bytes) + " bytes, expected " + std::to_string(count * width));
  bin.seekg(0);
  file.grid.values.resize(count);
  if (width == 8) {
    std::vector<std::uint64_t> words(count);
    bin.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(bytes));
    for (std::size_t i = 0; i < count; ++i) file.grid.values[i] = std::bit_cast<double>(byteswap_if_big(words[i]));
  } else {
    std::vector<std::uint32_t> words(count);
    bin.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(bytes));
    for (std::size_t i = 0; i < count; ++i)
      file.grid.values[i] = static_cast<double>(std::bit_cast<float>(byteswap_if_big(words[i])));
  }
  if (!bin) r.fail("data", "failed reading payload " + raw.string());
  return file;
}

}  // namespace levelvol

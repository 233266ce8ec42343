#pragma once

// Scenario files: INI-style sections of `key = value` lines.
//
//   [scenario]   name, mode (synthesize|analyze|detect|verify), n, span, step, variant
//   [curve]      source (synthesize|preset|csv), preset, radius, path, s_start
//   [profile]    kind, domain, grid, kappaN, tauN, kappaN.kind, kappaN.grid, ...
//   [frame]      source (canonical|preset|explicit), preset, radius, x, v1..vn, y
//   [axis]       source (explicit|detect|none), w, expect, expect_w, expect_eta
//   [tolerances] NAME = VALUE for any name in default_tolerances()
//   [output]     dir
//
// Lists are comma separated. '#' and ';' start comments.

#include "lightcone/cone_curves.hpp"
#include "lightcone/error.hpp"
#include "lightcone/lorentz.hpp"
#include "lightcone/profile.hpp"
#include "lightcone/slant.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace lightcone {

// ---------------------------------------------------------------------------
// INI document

struct IniEntry
{
  std::string value;
  int line = 0;
};

class IniDocument
{
public:
  static IniDocument parse(std::istream& in)
  {
    IniDocument doc;
    std::string raw, section;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string_view v = detail::trim(raw);
      const auto hash = v.find_first_of("#;");
      if (hash != std::string_view::npos)
        v = detail::trim(v.substr(0, hash));
      if (v.empty())
        continue;
      if (v.front() == '[') {
        if (v.back() != ']')
          throw ConfigError("unterminated section header", line_no);
        section = std::string(detail::trim(v.substr(1, v.size() - 2)));
        if (section.empty())
          throw ConfigError("empty section name", line_no);
        if (doc.sections_.count(section))
          throw ConfigError("duplicate section [" + section + "]", line_no);
        doc.sections_[section];
        doc.section_lines_[section] = line_no;
        continue;
      }
      const auto eq = v.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError("expected 'key = value'", line_no);
      if (section.empty())
        throw ConfigError("key outside any section", line_no);
      const std::string key(detail::trim(v.substr(0, eq)));
      if (key.empty())
        throw ConfigError("empty key", line_no);
      auto& keys = doc.sections_[section];
      if (keys.count(key))
        throw ConfigError("duplicate key '" + key + "' in [" + section + "]", line_no);
      keys[key] = IniEntry{std::string(detail::trim(v.substr(eq + 1))), line_no};
    }
    return doc;
  }

  static IniDocument parse_string(const std::string& text)
  {
    std::istringstream in(text);
    return parse(in);
  }

  bool has(const std::string& section) const { return sections_.count(section) != 0; }
  int section_line(const std::string& section) const
  {
    auto it = section_lines_.find(section);
    return it == section_lines_.end() ? 0 : it->second;
  }

  const IniEntry* find(const std::string& section, const std::string& key) const
  {
    auto s = sections_.find(section);
    if (s == sections_.end())
      return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  const std::map<std::string, IniEntry>& keys(const std::string& section) const
  {
    static const std::map<std::string, IniEntry> empty;
    auto s = sections_.find(section);
    return s == sections_.end() ? empty : s->second;
  }

  const std::map<std::string, std::map<std::string, IniEntry>>& sections() const noexcept { return sections_; }

private:
  std::map<std::string, std::map<std::string, IniEntry>> sections_;
  std::map<std::string, int> section_lines_;
};

// ---------------------------------------------------------------------------
// Tolerances

/// Named tolerances in report order.
using Tolerances = std::vector<std::pair<std::string, double>>;

inline Tolerances default_tolerances()
{
  return {
      {"gram", 1e-9},               // max Gram residual of the frames
      {"on_cone", 1e-9},            // max |<x,x>|
      {"unit_speed", 1e-6},         // max |<x',x'> - 1|
      {"frenet", 1e-6},             // Frenet system residual
      {"eta_reconstruction", 1e-8}, // W rebuilt from eta and the frame
      {"eta_ode", 1e-6},            // eta-system residual, adopted variant
      {"eta_integral", 1e-5},       // integral form of the eta-system
      {"harmonic_ode", 1e-5},       // ratio H against integrated H, and H-system residual
      {"unit_axis", 1e-8},          // unit-axis identity, pointwise
      {"recursion", 1e-4},          // harmonic recursion, corrected index
      {"g_case", 1e-6},             // G-function cases
      {"axis_drift", 1e-6},         // W rebuilt from harmonics
      {"axis_match", 1e-6},         // detected axis against expect_w / expect_eta
      {"constancy", 1e-8},          // drift of eta_2 / eta_{n+1} gating constant-coefficient checks
      {"ratio_floor", 1e-6},        // |eta_2| floor for harmonic ratios
      {"detect", 1e-8},             // detection threshold per sqrt(sample count)
      {"eps_c", 1e-9},              // zero threshold for the constant pairing
      {"recover_cone", 1e-6},       // on-cone tolerance for ingested curves
  };
}

inline double tolerance(const Tolerances& t, const std::string& name)
{
  for (const auto& [k, v] : t)
    if (k == name)
      return v;
  throw InputError("unknown tolerance '" + name + "'");
}

/// Returns false when `name` is not a known tolerance.
inline bool set_tolerance(Tolerances& t, const std::string& name, double value)
{
  for (auto& [k, v] : t)
    if (k == name) {
      v = value;
      return true;
    }
  return false;
}

// ---------------------------------------------------------------------------
// Scenario

enum class Mode { Synthesize, Analyze, Detect, Verify };

inline const char* to_string(Mode m)
{
  switch (m) {
  case Mode::Synthesize: return "synthesize";
  case Mode::Analyze: return "analyze";
  case Mode::Detect: return "detect";
  case Mode::Verify: return "verify";
  }
  return "?";
}

inline std::optional<Mode> parse_mode(std::string_view s)
{
  if (s == "synthesize")
    return Mode::Synthesize;
  if (s == "analyze")
    return Mode::Analyze;
  if (s == "detect")
    return Mode::Detect;
  if (s == "verify")
    return Mode::Verify;
  return std::nullopt;
}

inline std::optional<EtaVariant> parse_variant(std::string_view s)
{
  if (s == "derived")
    return EtaVariant::Derived;
  if (s == "paper-literal")
    return EtaVariant::PaperLiteral;
  return std::nullopt;
}

enum class CurveSource { Synthesize, Preset, Csv };
enum class FrameSource { Canonical, Preset, Explicit };
enum class AxisSource { None, Explicit, Detect };

struct Scenario
{
  std::string name;
  Mode mode = Mode::Verify;
  int n = 0;
  Interval span;
  double step = 0.0;
  EtaVariant variant = EtaVariant::Derived;

  CurveSource curve = CurveSource::Synthesize;
  PresetName preset = PresetName::LogSpiral;
  PresetParams preset_params;
  std::filesystem::path csv_path;
  double s_start = 0.0;

  std::optional<ProfileSpec> profile;

  FrameSource frame = FrameSource::Canonical;
  PresetName frame_preset = PresetName::LogSpiral;
  PresetParams frame_params;
  std::optional<AsymptoticFrame> explicit_frame;

  AxisSource axis = AxisSource::None;
  std::optional<Eigen::VectorXd> axis_w;
  std::optional<SlantVerdict> expect;
  std::optional<Eigen::VectorXd> expect_w;
  std::optional<double> expect_eta;

  Tolerances tol = default_tolerances();
  std::filesystem::path output_dir;
};

namespace detail {

inline double config_number(const IniEntry& e, const std::string& key)
{
  const auto v = parse_double(e.value);
  if (!v || !std::isfinite(*v))
    throw ConfigError("'" + key + "': expected a number, got '" + e.value + "'", e.line);
  return *v;
}

inline std::vector<double> config_list(const IniEntry& e, const std::string& key)
{
  std::vector<double> out;
  for (auto cell : split(e.value, ',')) {
    const auto v = parse_double(cell);
    if (!v || !std::isfinite(*v))
      throw ConfigError("'" + key + "': bad list element '" + std::string(cell) + "'", e.line);
    out.push_back(*v);
  }
  return out;
}

inline Interval config_interval(const IniEntry& e, const std::string& key)
{
  const auto v = config_list(e, key);
  if (v.size() != 2)
    throw ConfigError("'" + key + "': expected 'lo, hi'", e.line);
  if (!(v[1] > v[0]))
    throw ConfigError("'" + key + "': interval must have lo < hi", e.line);
  return {v[0], v[1]};
}

inline std::optional<FunctionKind> parse_kind(std::string_view s)
{
  for (auto k : {FunctionKind::Constant, FunctionKind::Polynomial, FunctionKind::Sinusoid, FunctionKind::PowerLaw,
                 FunctionKind::Sampled})
    if (s == to_string(k))
      return k;
  return std::nullopt;
}

inline void reject_unknown(const IniDocument& doc, const std::string& section, const std::set<std::string>& allowed)
{
  for (const auto& [key, entry] : doc.keys(section))
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' in [" + section + "]", entry.line);
}

inline PresetName config_preset(const IniEntry& e)
{
  try {
    return parse_preset(e.value);
  } catch (const InputError& err) {
    throw ConfigError(err.what(), e.line);
  }
}

/// Parses [profile]. Function keys are kappa1..kappaN and tau1..tau{N-1}.
inline ProfileSpec parse_profile(const IniDocument& doc, const Interval& span)
{
  const std::string sec = "profile";
  const int sec_line = doc.section_line(sec);
  std::optional<FunctionKind> default_kind;
  std::vector<double> default_grid;
  ProfileSpec spec;
  spec.domain = span;

  std::map<std::string, int> counts{{"kappa", 0}, {"tau", 0}};
  for (const auto& [key, e] : doc.keys(sec)) {
    if (key == "kind") {
      default_kind = parse_kind(e.value);
      if (!default_kind)
        throw ConfigError("unknown function kind '" + e.value + "'", e.line);
    } else if (key == "domain") {
      spec.domain = config_interval(e, key);
    } else if (key == "grid") {
      default_grid = config_list(e, key);
    } else {
      const auto dot = key.find('.');
      const std::string base = key.substr(0, dot);
      const std::string family = base.rfind("kappa", 0) == 0 ? "kappa" : base.rfind("tau", 0) == 0 ? "tau" : "";
      const std::string index = family.empty() ? "" : base.substr(family.size());
      const bool numeric = !index.empty() && index.find_first_not_of("0123456789") == std::string::npos;
      const std::string suffix = dot == std::string::npos ? "" : key.substr(dot + 1);
      if (family.empty() || !numeric || std::stoi(index) < 1 || (suffix != "" && suffix != "kind" && suffix != "grid"))
        throw ConfigError("unknown key '" + key + "' in [profile]", e.line);
      if (suffix.empty())
        counts[family] = std::max(counts[family], std::stoi(index));
    }
  }
  spec.n = counts["kappa"];
  if (spec.n < 1)
    throw ConfigError("[profile] needs kappa1..kappaN", sec_line);
  if (counts["tau"] > spec.n - 1)
    throw ConfigError("[profile] has tau" + std::to_string(counts["tau"]) + " but only " + std::to_string(spec.n) +
                          " kappa functions",
                      sec_line);

  if (!(spec.domain.hi > spec.domain.lo))
    throw ConfigError("[profile] needs 'domain' when the scenario has no span", sec_line);

  auto function = [&](const std::string& base) {
    const IniEntry* e = doc.find(sec, base);
    if (!e)
      throw ConfigError("[profile] missing '" + base + "'", sec_line);
    FunctionSpec f;
    if (const IniEntry* k = doc.find(sec, base + ".kind")) {
      const auto kind = parse_kind(k->value);
      if (!kind)
        throw ConfigError("unknown function kind '" + k->value + "'", k->line);
      f.kind = *kind;
    } else if (default_kind) {
      f.kind = *default_kind;
    } else {
      throw ConfigError("[profile] no kind for '" + base + "' (set 'kind' or '" + base + ".kind')", e->line);
    }
    const auto values = config_list(*e, base);
    if (f.kind == FunctionKind::Sampled) {
      const IniEntry* g = doc.find(sec, base + ".grid");
      f.grid = g ? config_list(*g, base + ".grid") : default_grid;
      f.values = values;
      if (f.grid.size() != f.values.size())
        throw ConfigError("'" + base + "': " + std::to_string(f.values.size()) + " samples for a grid of " +
                              std::to_string(f.grid.size()),
                          e->line);
    } else {
      f.params = values;
    }
    return std::pair{f, e->line};
  };

  auto build = [&](const std::string& base, std::vector<FunctionSpec>& into) {
    auto [f, line] = function(base);
    try {
      (void)build_function(f, spec.domain, base);
    } catch (const InputError& err) {
      throw ConfigError(err.what(), line);
    }
    into.push_back(std::move(f));
  };
  for (int i = 1; i <= spec.n; ++i)
    build("kappa" + std::to_string(i), spec.kappa);
  for (int j = 1; j < spec.n; ++j)
    build("tau" + std::to_string(j), spec.tau);
  return spec;
}

inline Eigen::VectorXd config_vector(const IniEntry& e, const std::string& key, int dim)
{
  const auto v = config_list(e, key);
  if (static_cast<int>(v.size()) != dim)
    throw ConfigError("'" + key + "': expected " + std::to_string(dim) + " components", e.line);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), dim);
}

} // namespace detail

/// Parses and validates a scenario. Relative CSV paths resolve against `base_dir`.
inline Scenario parse_scenario(const IniDocument& doc, const std::filesystem::path& base_dir = {})
{
  using detail::config_number;
  Scenario sc;

  for (const auto& [section, keys] : doc.sections()) {
    static const std::set<std::string> known{"scenario", "curve", "profile", "frame", "axis", "tolerances", "output"};
    if (!known.count(section))
      throw ConfigError("unknown section [" + section + "]", doc.section_line(section));
  }
  if (!doc.has("scenario"))
    throw ConfigError("missing [scenario] section", 1);

  detail::reject_unknown(doc, "scenario", {"name", "mode", "n", "span", "step", "variant"});
  detail::reject_unknown(doc, "curve", {"source", "preset", "radius", "path", "s_start"});
  detail::reject_unknown(doc, "axis", {"source", "w", "expect", "expect_w", "expect_eta"});
  detail::reject_unknown(doc, "output", {"dir"});

  const int sline = doc.section_line("scenario");
  auto require = [&](const std::string& section, const std::string& key) -> const IniEntry& {
    const IniEntry* e = doc.find(section, key);
    if (!e)
      throw ConfigError("[" + section + "] missing '" + key + "'", doc.section_line(section) ? doc.section_line(section)
                                                                                             : sline);
    return *e;
  };

  sc.name = require("scenario", "name").value;
  if (sc.name.empty() || sc.name.find_first_of("/\\") != std::string::npos)
    throw ConfigError("scenario name must be non-empty and contain no path separators", require("scenario", "name").line);
  {
    const IniEntry& e = require("scenario", "mode");
    const auto m = parse_mode(e.value);
    if (!m)
      throw ConfigError("mode must be synthesize, analyze, detect or verify", e.line);
    sc.mode = *m;
  }
  if (const IniEntry* e = doc.find("scenario", "variant")) {
    const auto v = parse_variant(e->value);
    if (!v)
      throw ConfigError("variant must be derived or paper-literal", e->line);
    sc.variant = *v;
  }
  std::optional<int> declared_n;
  if (const IniEntry* e = doc.find("scenario", "n")) {
    const double v = config_number(*e, "n");
    if (v < 1 || v != std::floor(v))
      throw ConfigError("n must be a positive integer", e->line);
    declared_n = static_cast<int>(v);
  }

  // Curve source.
  {
    const IniEntry& e = require("curve", "source");
    if (e.value == "synthesize")
      sc.curve = CurveSource::Synthesize;
    else if (e.value == "preset")
      sc.curve = CurveSource::Preset;
    else if (e.value == "csv")
      sc.curve = CurveSource::Csv;
    else
      throw ConfigError("curve source must be synthesize, preset or csv", e.line);
  }
  if (sc.curve != CurveSource::Csv) {
    sc.span = detail::config_interval(require("scenario", "span"), "span");
    const IniEntry& st = require("scenario", "step");
    sc.step = config_number(st, "step");
    if (!(sc.step > 0.0))
      throw ConfigError("step must be positive", st.line);
  }
  if (sc.curve == CurveSource::Preset) {
    sc.preset = detail::config_preset(require("curve", "preset"));
    if (const IniEntry* r = doc.find("curve", "radius")) {
      sc.preset_params.radius = config_number(*r, "radius");
      if (!(sc.preset_params.radius > 0.0))
        throw ConfigError("radius must be positive", r->line);
    }
    if (sc.preset == PresetName::LogSpiral && !(sc.span.lo > 0.0))
      throw ConfigError("log_spiral preset needs a span inside (0, inf)", require("scenario", "span").line);
  }
  if (sc.curve == CurveSource::Csv) {
    const IniEntry& p = require("curve", "path");
    sc.csv_path = std::filesystem::path(p.value);
    if (sc.csv_path.is_relative() && !base_dir.empty())
      sc.csv_path = base_dir / sc.csv_path;
    if (const IniEntry* s = doc.find("curve", "s_start"))
      sc.s_start = config_number(*s, "s_start");
  }

  // Profile.
  if (doc.has("profile"))
    sc.profile = detail::parse_profile(doc, sc.span);
  if (sc.curve == CurveSource::Synthesize && !sc.profile)
    throw ConfigError("curve source 'synthesize' needs a [profile] section", require("curve", "source").line);

  if (sc.profile)
    sc.n = sc.profile->n;
  else if (sc.curve == CurveSource::Preset || sc.curve == CurveSource::Csv)
    sc.n = 1;
  if (declared_n && *declared_n != sc.n)
    throw ConfigError("n = " + std::to_string(*declared_n) + " but the curve/profile has n = " + std::to_string(sc.n),
                      doc.find("scenario", "n")->line);
  if ((sc.curve == CurveSource::Preset || sc.curve == CurveSource::Csv) && sc.n != 1)
    throw ConfigError("preset and csv curves live in Q^2 (n = 1)", require("curve", "source").line);
  if (sc.profile && sc.curve != CurveSource::Csv && !sc.profile->domain.contains(sc.span))
    throw ConfigError("profile domain does not contain the span", doc.section_line("profile"));
  const int dim = sc.n + 2;

  // Initial frame.
  if (sc.curve == CurveSource::Synthesize) {
    std::set<std::string> allowed{"source", "preset", "radius", "x", "y"};
    for (int i = 1; i <= sc.n; ++i)
      allowed.insert("v" + std::to_string(i));
    detail::reject_unknown(doc, "frame", allowed);
    const IniEntry* src = doc.find("frame", "source");
    const std::string source = src ? src->value : "canonical";
    const int line = src ? src->line : sline;
    if (source == "canonical") {
      sc.frame = FrameSource::Canonical;
    } else if (source == "preset") {
      sc.frame = FrameSource::Preset;
      sc.frame_preset = detail::config_preset(require("frame", "preset"));
      if (const IniEntry* r = doc.find("frame", "radius"))
        sc.frame_params.radius = config_number(*r, "radius");
      if (sc.n != 1)
        throw ConfigError("preset frames exist only for n = 1", line);
      if (sc.frame_preset == PresetName::LogSpiral && !(sc.span.lo > 0.0))
        throw ConfigError("log_spiral frame needs s0 > 0", line);
      if (sc.frame_preset == PresetName::Circle && !(sc.frame_params.radius > 0.0))
        throw ConfigError("radius must be positive", line);
    } else if (source == "explicit") {
      sc.frame = FrameSource::Explicit;
      Eigen::MatrixXd m(dim, dim);
      m.col(0) = detail::config_vector(require("frame", "x"), "x", dim);
      for (int i = 1; i <= sc.n; ++i) {
        const std::string key = "v" + std::to_string(i);
        m.col(i) = detail::config_vector(require("frame", key), key, dim);
      }
      m.col(dim - 1) = detail::config_vector(require("frame", "y"), "y", dim);
      AsymptoticFrame f(std::move(m));
      const double g = gram_residual(f).max_abs;
      if (!(g < 1e-8))
        throw ConfigError("explicit frame violates the Gram conditions (max deviation " + std::to_string(g) + ")",
                          line);
      sc.explicit_frame = std::move(f);
    } else {
      throw ConfigError("frame source must be canonical, preset or explicit", line);
    }
  } else if (doc.has("frame")) {
    throw ConfigError("[frame] only applies to synthesized curves", doc.section_line("frame"));
  }

  // Axis.
  if (const IniEntry* src = doc.find("axis", "source")) {
    if (src->value == "explicit")
      sc.axis = AxisSource::Explicit;
    else if (src->value == "detect")
      sc.axis = AxisSource::Detect;
    else if (src->value == "none")
      sc.axis = AxisSource::None;
    else
      throw ConfigError("axis source must be explicit, detect or none", src->line);
  }
  if (sc.axis == AxisSource::Explicit)
    sc.axis_w = detail::config_vector(require("axis", "w"), "w", dim);
  else if (const IniEntry* w = doc.find("axis", "w"))
    throw ConfigError("'w' given but axis source is not explicit", w->line);
  if (const IniEntry* e = doc.find("axis", "expect")) {
    if (e->value == "slant")
      sc.expect = SlantVerdict::Slant;
    else if (e->value == "degenerate")
      sc.expect = SlantVerdict::Degenerate;
    else if (e->value == "none")
      sc.expect = SlantVerdict::None;
    else
      throw ConfigError("expect must be slant, degenerate or none", e->line);
  }
  if (const IniEntry* e = doc.find("axis", "expect_w"))
    sc.expect_w = detail::config_vector(*e, "expect_w", dim);
  if (const IniEntry* e = doc.find("axis", "expect_eta"))
    sc.expect_eta = config_number(*e, "expect_eta");

  // Tolerances.
  for (const auto& [key, e] : doc.keys("tolerances")) {
    const double v = config_number(e, key);
    if (!(v > 0.0))
      throw ConfigError("tolerance '" + key + "' must be positive", e.line);
    if (!set_tolerance(sc.tol, key, v))
      throw ConfigError("unknown tolerance '" + key + "'", e.line);
  }

  // Output.
  if (const IniEntry* e = doc.find("output", "dir"))
    sc.output_dir = e->value;
  else
    sc.output_dir = std::filesystem::path("out") / sc.name;
  return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw InputError("cannot read config '" + path.string() + "'");
  return parse_scenario(IniDocument::parse(in), path.parent_path());
}

} // namespace lightcone

#pragma once

// Scenario pipeline: build the trajectory, run the checks for the requested
// mode and write trajectory.csv, eta.csv, harmonics.csv, g.csv,
// residuals.csv and report.txt into the output directory.
//
// Exit codes: 0 every check within tolerance, 1 a check failed,
// 2 input or configuration error.

#include "lightcone/cone_curves.hpp"
#include "lightcone/error.hpp"
#include "lightcone/frenet.hpp"
#include "lightcone/lorentz.hpp"
#include "lightcone/profile.hpp"
#include "lightcone/scenario.hpp"
#include "lightcone/slant.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace lightcone {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInputError = 2;

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Four significant digits, for human-facing report lines.
inline std::string format_short(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 4);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// CSV

class CsvTable
{
public:
  void add(std::string name, std::vector<double> values)
  {
    if (!cols_.empty() && values.size() != cols_.front().second.size())
      throw InputError("csv column '" + name + "' has " + std::to_string(values.size()) + " rows, expected " +
                       std::to_string(cols_.front().second.size()));
    cols_.emplace_back(std::move(name), std::move(values));
  }

  bool empty() const noexcept { return cols_.empty(); }

  void write(std::ostream& out) const
  {
    for (std::size_t c = 0; c < cols_.size(); ++c)
      out << (c ? "," : "") << cols_[c].first;
    out << '\n';
    const std::size_t rows = cols_.empty() ? 0 : cols_.front().second.size();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols_.size(); ++c)
        out << (c ? "," : "") << format_double(cols_[c].second[r]);
      out << '\n';
    }
  }

private:
  std::vector<std::pair<std::string, std::vector<double>>> cols_;
};

namespace detail {

inline std::vector<double> matrix_column(const Eigen::MatrixXd& m, Eigen::Index c)
{
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    out[static_cast<std::size_t>(r)] = m(r, c);
  return out;
}

inline CsvTable series_table(const IndexedSeries& series, const std::string& prefix)
{
  CsvTable t;
  t.add("s", series.s);
  for (int i = 1; i <= series.count(); ++i)
    t.add(prefix + std::to_string(i), series.column(i));
  return t;
}

inline CsvTable header_only(const std::vector<std::string>& names)
{
  CsvTable t;
  for (const auto& n : names)
    t.add(n, {});
  return t;
}

inline std::vector<std::string> indexed_names(const std::string& prefix, int count)
{
  std::vector<std::string> out{"s"};
  for (int i = 1; i <= count; ++i)
    out.push_back(prefix + std::to_string(i));
  return out;
}

inline CsvTable trajectory_table(const Trajectory& t)
{
  CsvTable out;
  out.add("s", t.s());
  const int m = t.dim();
  for (int col = 0; col < m; ++col) {
    const std::string base = col == 0 ? "x" : col == m - 1 ? "y" : "V" + std::to_string(col);
    for (int d = 0; d < m; ++d) {
      std::vector<double> v(t.size());
      for (std::size_t k = 0; k < t.size(); ++k)
        v[k] = t.frame(k).matrix()(d, col);
      out.add(base + "_" + std::to_string(d + 1), std::move(v));
    }
  }
  return out;
}

inline std::string format_vector(const Eigen::VectorXd& v)
{
  const double scale = v.cwiseAbs().maxCoeff();
  std::string out = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double x = std::abs(v[i]) <= 1e-12 * scale ? 0.0 : v[i];
    out += (i ? ", " : "") + format_short(x);
  }
  return out + ")";
}

inline double max_of(const std::vector<double>& v)
{
  double w = 0.0;
  for (double x : v)
    w = std::max(w, x);
  return w;
}

inline double drift(const std::vector<double>& v)
{
  double w = 0.0;
  for (double x : v)
    w = std::max(w, std::abs(x - v.front()));
  return w;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Checks and report

enum class CheckStatus { Pass, Fail, Skip, Info };

inline const char* to_string(CheckStatus s)
{
  switch (s) {
  case CheckStatus::Pass: return "PASS";
  case CheckStatus::Fail: return "FAIL";
  case CheckStatus::Skip: return "SKIP";
  case CheckStatus::Info: return "INFO";
  }
  return "?";
}

struct Check
{
  std::string name;
  CheckStatus status = CheckStatus::Info;
  double value = 0.0;
  double tol = 0.0;
  std::string note;
};

struct Reconciliation
{
  std::string relation;
  std::string adopted;
  double adopted_residual = 0.0;
  std::string alternative;
  double alternative_residual = 0.0;
};

/// Everything a run produced, kept in memory for tests and for the report.
struct RunOutcome
{
  Scenario scenario;
  std::string origin;
  std::size_t samples = 0;
  double h = 0.0;
  Interval span;
  std::vector<Check> checks;
  std::vector<std::string> detection;
  std::vector<std::string> notes;
  std::vector<Reconciliation> reconciliation;
  CsvTable trajectory, eta, harmonics, g, residuals;

  int exit_code() const
  {
    for (const auto& c : checks)
      if (c.status == CheckStatus::Fail)
        return kExitCheckFailed;
    return kExitOk;
  }

  const Check* find(const std::string& name) const
  {
    for (const auto& c : checks)
      if (c.name == name)
        return &c;
    return nullptr;
  }

  void measured(const std::string& name, double value, double tol)
  {
    checks.push_back({name, value < tol ? CheckStatus::Pass : CheckStatus::Fail, value, tol, {}});
  }
  void skipped(const std::string& name, std::string why)
  {
    checks.push_back({name, CheckStatus::Skip, 0.0, 0.0, std::move(why)});
  }
};

inline void write_report(std::ostream& out, const RunOutcome& r)
{
  const Scenario& sc = r.scenario;
  out << "scenario: " << sc.name << '\n';
  out << "mode: " << to_string(sc.mode) << '\n';
  out << "n: " << sc.n << '\n';
  out << "curve: " << r.origin << '\n';
  out << "samples: " << r.samples << ", h = " << format_double(r.h) << ", span [" << format_double(r.span.lo) << ", "
      << format_double(r.span.hi) << "]\n";
  out << "eta variant: " << to_string(sc.variant) << "\n\n";

  out << "tolerances:\n";
  for (const auto& [name, v] : sc.tol)
    out << "  " << name << std::string(name.size() < 20 ? 20 - name.size() : 1, ' ') << format_double(v) << '\n';

  out << "\nchecks:\n";
  for (const auto& c : r.checks) {
    out << "  " << to_string(c.status) << "  " << c.name << std::string(c.name.size() < 22 ? 22 - c.name.size() : 1, ' ');
    const bool numeric = c.tol > 0.0 && (c.status == CheckStatus::Pass || c.status == CheckStatus::Fail);
    if (numeric)
      out << format_short(c.value) << (c.status == CheckStatus::Pass ? " < " : " >= ") << format_double(c.tol);
    if (!c.note.empty())
      out << (numeric ? "  " : "") << c.note;
    out << '\n';
  }

  if (!r.detection.empty()) {
    out << "\nslant detection:\n";
    for (const auto& l : r.detection)
      out << "  " << l << '\n';
  }
  if (!r.notes.empty()) {
    out << "\nnotes:\n";
    for (const auto& l : r.notes)
      out << "  " << l << '\n';
  }
  if (!r.reconciliation.empty()) {
    out << "\nvariant reconciliation:\n";
    out << "  relation                        adopted                    residual    alternative                residual\n";
    for (const auto& row : r.reconciliation) {
      auto pad = [](const std::string& s, std::size_t w) { return s + std::string(s.size() < w ? w - s.size() : 1, ' '); };
      out << "  " << pad(row.relation, 32) << pad(row.adopted, 27) << pad(format_short(row.adopted_residual), 12)
          << pad(row.alternative, 27) << format_short(row.alternative_residual) << '\n';
    }
  }

  std::size_t failed = 0, skipped = 0;
  for (const auto& c : r.checks) {
    failed += c.status == CheckStatus::Fail;
    skipped += c.status == CheckStatus::Skip;
  }
  out << "\nresult: " << (failed ? "FAIL" : "PASS") << " (" << failed << " failed, " << skipped << " skipped)\n";
}

// ---------------------------------------------------------------------------
// Pipeline

namespace detail {

struct BuiltCurve
{
  std::optional<Trajectory> trajectory;
  std::optional<CurvatureProfile> profile;
  bool profile_from_samples = false;
  std::string origin;
};

inline BuiltCurve build_curve(const Scenario& sc, RunOutcome& r)
{
  BuiltCurve b;
  switch (sc.curve) {
  case CurveSource::Synthesize: {
    b.profile = make_profile(*sc.profile);
    AsymptoticFrame f0 = canonical_frame(sc.n);
    std::string frame = "canonical frame";
    if (sc.frame == FrameSource::Preset) {
      f0 = preset_frame(sc.frame_preset, sc.frame_params, sc.span.lo);
      frame = std::string(to_string(sc.frame_preset)) + " frame at s0";
    } else if (sc.frame == FrameSource::Explicit) {
      f0 = reproject_frame(*sc.explicit_frame);
      frame = "explicit frame";
    }
    SynthesisResult res = synthesize_with_stats(*b.profile, f0, sc.span, sc.step);
    r.notes.push_back("synthesis: max Gram drift per step before projection " + format_short(res.max_step_drift));
    b.trajectory = std::move(res.trajectory);
    b.origin = "synthesized from " + frame;
    break;
  }
  case CurveSource::Preset: {
    PresetCurve pc = preset_curve(sc.preset, sc.preset_params, sc.span, sc.step);
    b.trajectory = std::move(pc.trajectory);
    b.profile = sc.profile ? make_profile(*sc.profile) : std::move(pc.profile);
    b.origin = std::string("preset ") + to_string(sc.preset);
    if (sc.preset == PresetName::Circle)
      b.origin += ", radius " + format_double(sc.preset_params.radius);
    break;
  }
  case CurveSource::Csv: {
    std::ifstream in(sc.csv_path);
    if (!in)
      throw InputError("cannot read curve CSV '" + sc.csv_path.string() + "'");
    CurveSamples c = read_curve_csv(in);
    if (!c.arclength)
      c = arclength_reparametrize(c, sc.s_start);
    RecoveredCurve rec = recover_frame_n1(c, tolerance(sc.tol, "recover_cone"));
    r.notes.push_back("frame recovery: max Gram deviation before projection " +
                      format_short(rec.max_raw_gram_residual));
    if (sc.profile) {
      b.profile = make_profile(*sc.profile);
    } else {
      ProfileSpec spec;
      spec.n = 1;
      spec.domain = rec.trajectory.span();
      spec.kappa.push_back({FunctionKind::Sampled, {}, rec.trajectory.s(), rec.kappa});
      b.profile = make_profile(spec);
      b.profile_from_samples = true;
    }
    b.trajectory = std::move(rec.trajectory);
    b.origin = "csv " + sc.csv_path.filename().string();
    break;
  }
  }
  return b;
}

} // namespace detail

/// Runs the scenario pipeline in memory. Throws on input errors.
inline RunOutcome run_scenario(const Scenario& sc)
{
  RunOutcome r;
  r.scenario = sc;
  auto tol = [&](const char* name) { return tolerance(sc.tol, name); };

  detail::BuiltCurve built = detail::build_curve(sc, r);
  const Trajectory& t = *built.trajectory;
  const int n = t.n(), m = t.dim();
  r.origin = built.origin;
  r.samples = t.size();
  r.h = t.h();
  r.span = t.span();
  r.trajectory = detail::trajectory_table(t);
  if (t.size() < 7)
    throw InputError("trajectory has " + std::to_string(t.size()) + " samples; at least 7 are needed");

  // Trajectory invariants.
  r.measured("gram", max_gram_residual(t), tol("gram"));
  r.measured("on_cone", on_cone_residual(t), tol("on_cone"));
  r.measured("unit_speed", unit_speed_residual(t), tol("unit_speed"));

  CsvTable residuals;
  std::vector<double> interior(t.s().begin() + fd::kMargin, t.s().end() - fd::kMargin);
  residuals.add("s", interior);

  const CurvatureProfile* profile = built.profile ? &*built.profile : nullptr;
  if (profile && !profile->domain().contains(t.span()))
    throw InputError("profile domain does not contain the trajectory span");
  if (profile && !built.profile_from_samples) {
    const FrenetResidual fr = frenet_residual(t, *profile);
    r.measured("frenet", detail::max_of(fr.max_abs), tol("frenet"));
    for (int c = 0; c < m; ++c) {
      const std::string label = c == 0 ? "x" : c == m - 1 ? "y" : "V" + std::to_string(c);
      residuals.add("frenet_" + label, detail::matrix_column(fr.pointwise, c));
    }
  } else {
    r.skipped("frenet", "curvature recovered from the same samples");
  }

  auto finish = [&]() {
    r.residuals = std::move(residuals);
    if (r.eta.empty())
      r.eta = detail::header_only(detail::indexed_names("eta_", m));
    if (r.harmonics.empty())
      r.harmonics = detail::header_only(detail::indexed_names("H_", m));
    if (r.g.empty())
      r.g = detail::header_only(detail::indexed_names("G_", m));
    return r;
  };
  if (sc.mode == Mode::Synthesize)
    return finish();

  // Axis.
  std::optional<Eigen::VectorXd> axis = sc.axis_w;
  if (sc.mode == Mode::Detect || sc.axis == AxisSource::Detect) {
    DetectionOptions opts;
    opts.tol = tol("detect") * std::sqrt(static_cast<double>(t.size()));
    opts.eps_c = tol("eps_c");
    const SlantDetection d = detect_slant_axis(t, opts);
    r.detection.push_back(std::string("verdict: ") + to_string(d.verdict));
    r.detection.push_back("sigma_min: " + format_short(d.sigma_min) + " (threshold " + format_short(d.tolerance) + ")");
    if (d.candidate) {
      const AxisCandidate& c = *d.candidate;
      r.detection.push_back("axis: " + detail::format_vector(c.axis));
      r.detection.push_back(std::string("axis causal character: ") + to_string(c.causal));
      r.detection.push_back("eta_{n+1} = <V_n, W>: " + format_short(std::abs(c.eta_np1) <= tol("eps_c") ? 0.0 : c.eta_np1));
      r.detection.push_back("pairing spread (rms): " + format_short(c.constancy_residual));
      if (sc.axis != AxisSource::Explicit)
        axis = c.axis;
    }
    if (sc.expect) {
      Check c{"detect_verdict", d.verdict == *sc.expect ? CheckStatus::Pass : CheckStatus::Fail, 0.0, 0.0,
              std::string("expected ") + to_string(*sc.expect) + ", got " + to_string(d.verdict)};
      r.checks.push_back(c);
    } else if (sc.mode != Mode::Detect && d.verdict == SlantVerdict::None) {
      r.checks.push_back({"detect_verdict", CheckStatus::Fail, 0.0, 0.0, "no constant pairing found"});
    } else {
      r.checks.push_back({"detect_verdict", CheckStatus::Info, 0.0, 0.0, to_string(d.verdict)});
    }
    if (sc.expect_w) {
      if (d.candidate) {
        Eigen::VectorXd e = *sc.expect_w;
        e *= axis_normalization(e, tol("eps_c"));
        r.measured("detect_axis", (d.candidate->axis - e).cwiseAbs().maxCoeff(), tol("axis_match"));
      } else {
        r.checks.push_back({"detect_axis", CheckStatus::Fail, 0.0, 0.0, "no axis found"});
      }
    }
    if (sc.expect_eta) {
      if (d.candidate)
        r.measured("detect_eta", std::abs(d.candidate->eta_np1 - *sc.expect_eta), tol("axis_match"));
      else
        r.checks.push_back({"detect_eta", CheckStatus::Fail, 0.0, 0.0, "no axis found"});
    }
  }
  if (!axis)
    return finish();

  // eta coefficients.
  const EtaSeries eta = eta_from_axis(t, LorentzVector(*axis));
  r.eta = detail::series_table(eta, "eta_");
  const bool checking = sc.mode == Mode::Analyze || sc.mode == Mode::Verify;
  const bool verifying = sc.mode == Mode::Verify;
  if (checking)
    r.measured("eta_reconstruction", eta_reconstruction_residual(t, eta), tol("eta_reconstruction"));

  const double eta2_drift = detail::drift(eta.column(2));
  const double etanp1_drift = detail::drift(eta.column(n + 1));
  r.notes.push_back("<W,W> = " + format_short(eta.axis_norm));
  r.notes.push_back("eta_2 drift: " + format_short(eta2_drift));
  r.notes.push_back("eta_{n+1} drift: " + format_short(etanp1_drift));
  const bool eta2_constant = eta2_drift < tol("constancy");
  const bool slant = etanp1_drift < tol("constancy");

  if (profile && checking) {
    const EtaOdeResidual derived = eta_ode_residual(eta, *profile, EtaVariant::Derived);
    const EtaOdeResidual literal = eta_ode_residual(eta, *profile, EtaVariant::PaperLiteral);
    const EtaOdeResidual& adopted = sc.variant == EtaVariant::Derived ? derived : literal;
    r.measured("eta_ode", detail::max_of(adopted.max_abs), tol("eta_ode"));
    r.checks.back().note = std::string("variant ") + to_string(sc.variant);
    for (int j = 0; j < m; ++j)
      residuals.add("eta_derived_" + std::to_string(j + 1), detail::matrix_column(derived.pointwise, j));
    for (int j = 0; j < m; ++j)
      residuals.add("eta_literal_" + std::to_string(j + 1), detail::matrix_column(literal.pointwise, j));
    const EtaOdeResidual& other = sc.variant == EtaVariant::Derived ? literal : derived;
    r.reconciliation.push_back({"eta-system middle block", to_string(sc.variant), adopted.middle_max(),
                                to_string(other.variant), other.middle_max()});
    if (verifying)
      r.measured("eta_integral", detail::max_of(eta_integral_residual(eta, *profile)), tol("eta_integral"));
  }

  // Harmonic curvature functions.
  std::optional<HarmonicSeries> H;
  try {
    H = harmonics_from_eta(eta, tol("ratio_floor"));
  } catch (const InputError& e) {
    r.notes.push_back(std::string("harmonics not formed: ") + e.what());
  }
  if (!H) {
    if (verifying)
      for (const char* name : {"harmonic_ode", "unit_axis", "g_case", "axis_drift"})
        r.skipped(name, "|eta_2| below the ratio floor");
    return finish();
  }
  const GSeries G = g_functions(*H, tol("ratio_floor"));
  r.harmonics = detail::series_table(*H, "H_");
  r.g = detail::series_table(G, "G_");
  if (!verifying || !profile)
    return finish();

  const std::string not_constant = "eta_2 not constant (drift " + format_short(eta2_drift) + ")";

  // Ratio form against ODE integration, and the system residual itself.
  if (eta2_constant) {
    std::vector<double> h0(static_cast<std::size_t>(m));
    for (int i = 1; i <= m; ++i)
      h0[static_cast<std::size_t>(i - 1)] = H->at(i, 0);
    const HarmonicSeries ode = harmonic_ode_integrate(*profile, h0, t.span(), t.h(), HarmonicVariant::Theorem);
    double gap = 0.0;
    for (std::size_t k = 0; k < ode.size() && k < H->size(); ++k)
      gap = std::max(gap, (ode.values.row(static_cast<Eigen::Index>(k)) - H->values.row(static_cast<Eigen::Index>(k)))
                              .cwiseAbs()
                              .maxCoeff());
    for (int i = 1; i <= m; ++i)
      r.harmonics.add("H_ode_" + std::to_string(i), ode.column(i));
    const double theorem = detail::max_of(harmonic_ode_residual(*H, *profile, HarmonicVariant::Theorem));
    const double proof = detail::max_of(harmonic_ode_residual(*H, *profile, HarmonicVariant::ProofLiteral));
    r.measured("harmonic_ode", std::max(gap, theorem), tol("harmonic_ode"));
    r.reconciliation.push_back({"harmonic system coupling term", "theorem: -tau_{i-1} H_i", theorem,
                                "proof: -tau_{i-1} H_{i+1}", proof});
  } else {
    r.skipped("harmonic_ode", not_constant);
  }

  if (slant) {
    double eta_np1 = 0.0;
    for (double v : eta.column(n + 1))
      eta_np1 += v;
    eta_np1 /= static_cast<double>(eta.size());
    if (std::abs(eta_np1) > tol("eps_c")) {
      const auto res = unit_axis_identity_residual(*H, eta_np1, eta.axis_norm);
      r.measured("unit_axis", detail::max_of(res), tol("unit_axis"));
      residuals.add("unit_axis", std::vector<double>(res.begin() + fd::kMargin, res.end() - fd::kMargin));
    } else {
      r.skipped("unit_axis", "eta_{n+1} is zero");
    }
  } else {
    r.skipped("unit_axis", "eta_{n+1} not constant (drift " + format_short(etanp1_drift) + ")");
  }

  if (n >= 3) {
    if (eta2_constant) {
      try {
        const RecursionResidual rec = harmonic_recursion_residual(*H, *profile, tol("ratio_floor"));
        r.measured("recursion", detail::max_of(rec.max_corrected), tol("recursion"));
        for (std::size_t c = 0; c < rec.indices.size(); ++c) {
          const std::string i = std::to_string(rec.indices[c]);
          residuals.add("recursion_corrected_" + i, detail::matrix_column(rec.corrected, static_cast<Eigen::Index>(c)));
          residuals.add("recursion_literal_" + i, detail::matrix_column(rec.literal, static_cast<Eigen::Index>(c)));
        }
        r.reconciliation.push_back({"harmonic recursion index", "H_{n+2}", detail::max_of(rec.max_corrected), "H_{n-2}",
                                    detail::max_of(rec.max_literal)});
      } catch (const InputError& e) {
        r.skipped("recursion", e.what());
      }
    } else {
      r.skipped("recursion", not_constant);
    }
  }

  if (eta2_constant) {
    const GResidual gr = g_consistency_residual(G, *profile);
    residuals.add("g_case1", gr.case1);
    residuals.add("g_case2", gr.case2);
    residuals.add("g_case3", gr.case3);
    for (std::size_t c = 0; c < gr.case4.size(); ++c)
      residuals.add("g_case4_" + std::to_string(c + 2), gr.case4[c]);
    residuals.add("g_case5_literal", gr.case5_literal);
    residuals.add("g_case5_derived", gr.case5_derived);
    const double worst = std::max({GResidual::max_of(gr.case1), GResidual::max_of(gr.case2),
                                   GResidual::max_of(gr.case3), gr.max_case4(), GResidual::max_of(gr.case5_derived)});
    r.measured("g_case", worst, tol("g_case"));
    r.checks.back().note = "G_1 = s + c with c = " + format_short(gr.c);
    r.reconciliation.push_back({"G case 5 sum", "kappa_i G_{i+1}", GResidual::max_of(gr.case5_derived),
                                "kappa_i G_i", GResidual::max_of(gr.case5_literal)});

    const AxisReconstruction ax = axis_from_harmonics(t, *H, eta.at(2, 0));
    r.measured("axis_drift", std::max(ax.drift, (ax.axis.front() - *axis).cwiseAbs().maxCoeff()), tol("axis_drift"));
  } else {
    r.skipped("g_case", not_constant);
    r.skipped("axis_drift", not_constant);
  }
  return finish();
}

inline void write_outputs(const RunOutcome& r, const std::filesystem::path& dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
  auto emit = [&](const char* file, auto&& writer) {
    std::ofstream out(dir / file, std::ios::binary | std::ios::trunc);
    if (!out)
      throw InputError("cannot write '" + (dir / file).string() + "'");
    writer(out);
    if (!out)
      throw InputError("write failed for '" + (dir / file).string() + "'");
  };
  emit("trajectory.csv", [&](std::ostream& o) { r.trajectory.write(o); });
  emit("eta.csv", [&](std::ostream& o) { r.eta.write(o); });
  emit("harmonics.csv", [&](std::ostream& o) { r.harmonics.write(o); });
  emit("g.csv", [&](std::ostream& o) { r.g.write(o); });
  emit("residuals.csv", [&](std::ostream& o) { r.residuals.write(o); });
  emit("report.txt", [&](std::ostream& o) { write_report(o, r); });
}

// ---------------------------------------------------------------------------
// Entry points used by the CLI

struct RunOverrides
{
  std::optional<Mode> mode;
  std::optional<std::filesystem::path> out;
  std::optional<double> step;
  std::vector<std::pair<std::string, double>> tol;
  std::optional<EtaVariant> variant;
};

inline void apply_overrides(Scenario& sc, const RunOverrides& o)
{
  if (o.mode)
    sc.mode = *o.mode;
  if (o.out)
    sc.output_dir = *o.out;
  if (o.step) {
    if (!(*o.step > 0.0))
      throw InputError("--step must be positive");
    if (sc.curve == CurveSource::Csv)
      throw InputError("--step does not apply to CSV curves");
    sc.step = *o.step;
  }
  for (const auto& [name, v] : o.tol) {
    if (!(v > 0.0))
      throw InputError("--tol " + name + " must be positive");
    if (!set_tolerance(sc.tol, name, v))
      throw InputError("--tol: unknown tolerance '" + name + "'");
  }
  if (o.variant)
    sc.variant = *o.variant;
  if ((sc.mode == Mode::Analyze || sc.mode == Mode::Verify) && sc.axis == AxisSource::None)
    throw InputError("mode " + std::string(to_string(sc.mode)) + " needs an [axis] with source explicit or detect");
}

/// Loads, runs and writes one scenario. Messages go to `log`.
inline int run(const std::filesystem::path& config, const RunOverrides& overrides, std::ostream& log)
{
  try {
    Scenario sc = load_scenario(config);
    apply_overrides(sc, overrides);
    const RunOutcome r = run_scenario(sc);
    write_outputs(r, sc.output_dir);
    const int code = r.exit_code();
    log << sc.name << ": " << (code == kExitOk ? "PASS" : "FAIL") << " (" << (sc.output_dir / "report.txt").string()
        << ")\n";
    for (const auto& c : r.checks)
      if (c.status == CheckStatus::Fail)
        log << "  failed: " << c.name << " " << format_short(c.value) << " (tol " << format_double(c.tol) << ") "
            << c.note << '\n';
    return code;
  } catch (const std::exception& e) {
    log << config.string() << ": error: " << e.what() << '\n';
    return kExitInputError;
  }
}

/// Reads a batch list (one config path per line, '#' comments, paths relative
/// to the list file) and runs every scenario on its own thread.
inline int run_batch(const std::filesystem::path& list, const RunOverrides& overrides, std::ostream& log)
{
  std::ifstream in(list);
  if (!in) {
    log << list.string() << ": error: cannot read batch file\n";
    return kExitInputError;
  }
  std::vector<std::filesystem::path> configs;
  std::string line;
  while (std::getline(in, line)) {
    const auto v = detail::trim(line);
    if (v.empty() || v.front() == '#')
      continue;
    std::filesystem::path p{std::string(v)};
    configs.push_back(p.is_relative() ? list.parent_path() / p : p);
  }
  if (configs.empty()) {
    log << list.string() << ": error: batch file lists no scenarios\n";
    return kExitInputError;
  }

  std::vector<std::string> names(configs.size());
  if (overrides.out) {
    for (std::size_t i = 0; i < configs.size(); ++i) {
      try {
        names[i] = load_scenario(configs[i]).name;
      } catch (const Error&) {
        names[i] = configs[i].stem().string();
      }
      for (std::size_t j = 0; j < i; ++j)
        if (names[j] == names[i]) {
          log << list.string() << ": error: two scenarios named '" << names[i] << "' would share an output directory\n";
          return kExitInputError;
        }
    }
  }

  std::vector<int> codes(configs.size(), kExitOk);
  std::vector<std::ostringstream> logs(configs.size());
  std::vector<std::thread> workers;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    workers.emplace_back([&, i] {
      RunOverrides o = overrides;
      if (overrides.out)
        o.out = *overrides.out / names[i];
      codes[i] = run(configs[i], o, logs[i]);
    });
  }
  for (auto& w : workers)
    w.join();
  int worst = kExitOk;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    log << logs[i].str();
    worst = std::max(worst, codes[i]);
  }
  return worst;
}

} // namespace lightcone

// Acceptance report: one PASS/FAIL line per criterion.
// usage: acceptance <lightcone-cli> <scenario-dir> <work-dir>

#include "support.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace lightcone;
namespace fs = std::filesystem;

namespace {

struct Verdict
{
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what)
  {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string num(double v) { return format_short(v); }

const Eigen::Vector3d kTime(0.0, 0.0, 1.0);

const PresetCurve& spiral()
{
  static const PresetCurve c = preset_curve(PresetName::LogSpiral, {}, {1.0, 3.0}, 1e-3);
  return c;
}

Verdict frame_algebra()
{
  Verdict v;
  double worst = 0.0;
  for (int n = 1; n <= 8; ++n)
    worst = std::max(worst, gram_residual(canonical_frame(n)).max_abs);
  v.require(worst == 0.0, "canonical Gram residual " + num(worst));
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> noise(-1e-5, 1e-5);
  double projected = 0.0;
  for (int n = 1; n <= 8; ++n) {
    Eigen::MatrixXd p = lctest::random_frame(n, rng, 0.5).matrix();
    for (Eigen::Index i = 0; i < p.size(); ++i)
      p.data()[i] += noise(rng);
    projected = std::max(projected, lctest::gram_error(reproject_frame(AsymptoticFrame(p)).matrix()));
  }
  v.require(projected < 1e-13, "reprojected residual " + num(projected));
  v.detail = v.ok ? "canonical residual 0, reprojected " + num(projected) : v.detail;
  return v;
}

Verdict synthesis()
{
  Verdict v;
  const std::vector<std::pair<std::vector<double>, std::vector<double>>> cases{
      {{-0.5}, {}}, {{0.8, -0.3}, {0.6}}, {{-0.2, 0.4, 0.1}, {0.9, -0.7}}};
  double gram = 0.0, cone = 0.0, speed = 0.0;
  for (const auto& [kappa, tau] : cases) {
    const Trajectory t = synthesize(constant_profile({0.0, 2.0}, kappa, tau), canonical_frame(static_cast<int>(kappa.size())),
                                    {0.0, 2.0}, 1e-3);
    gram = std::max(gram, max_gram_residual(t));
    cone = std::max(cone, on_cone_residual(t));
    speed = std::max(speed, unit_speed_residual(t));
  }
  v.require(gram < 1e-9, "gram " + num(gram));
  v.require(cone < 1e-9, "on-cone " + num(cone));
  v.require(speed < 1e-6, "unit speed " + num(speed));

  const Eigen::Vector3d end(3.0 * std::cos(std::log(3.0)), 3.0 * std::sin(std::log(3.0)), 3.0);
  auto err = [&](double h) {
    const Trajectory t = synthesize(spiral().profile, presets::log_spiral_frame(1.0), {1.0, 3.0}, h);
    return (t.frame(t.size() - 1).matrix().col(0) - Eigen::VectorXd(end)).norm();
  };
  const double ratio = err(0.05) / err(0.025);
  v.require(ratio > 12.0 && ratio < 20.0, "halving ratio " + num(ratio));
  if (v.ok)
    v.detail = "gram " + num(gram) + ", on-cone " + num(cone) + ", speed " + num(speed) + ", halving ratio " + num(ratio);
  return v;
}

Verdict round_trip()
{
  Verdict v;
  const Trajectory t = synthesize(spiral().profile, presets::log_spiral_frame(1.0), {1.0, 3.0}, 1e-3);
  double pos = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k)
    pos = std::max(pos, (t.frame(k).matrix().col(0) - Eigen::VectorXd(presets::log_spiral_point(t.s(k)))).cwiseAbs().maxCoeff());
  v.require(pos < 1e-6, "positions " + num(pos));
  const RecoveredCurve r = recover_frame_n1(spiral().samples);
  double kerr = 0.0;
  for (std::size_t k = 0; k < r.kappa.size(); ++k)
    kerr = std::max(kerr, std::abs(r.kappa[k] + 1.0 / (r.trajectory.s(k) * r.trajectory.s(k))));
  v.require(kerr < 1e-6, "log-spiral kappa " + num(kerr));
  double cerr = 0.0;
  for (double radius : {0.5, 1.0, 2.0}) {
    const RecoveredCurve c = recover_frame_n1(preset_curve(PresetName::Circle, {radius}, {0.0, 3.0}, 1e-3).samples);
    for (double k : c.kappa)
      cerr = std::max(cerr, std::abs(k + 1.0 / (2.0 * radius * radius)));
  }
  v.require(cerr < 1e-6, "circle kappa " + num(cerr));
  if (v.ok)
    v.detail = "positions " + num(pos) + ", spiral kappa " + num(kerr) + ", circle kappa " + num(cerr);
  return v;
}

Verdict eta_system(const fs::path& scenarios)
{
  Verdict v;
  const EtaSeries e = eta_from_axis(spiral().trajectory, LorentzVector(kTime));
  double eerr = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k)
    for (int i = 1; i <= 3; ++i)
      eerr = std::max(eerr, std::abs(e.at(i, k) - lctest::log_spiral_eta(e.s[k])[i - 1]));
  v.require(eerr < 1e-6, "log-spiral eta " + num(eerr));
  double derived = 0.0;
  for (double x : eta_ode_residual(e, spiral().profile, EtaVariant::Derived).max_abs)
    derived = std::max(derived, x);
  v.require(derived < 1e-6, "log-spiral derived residual " + num(derived));

  std::mt19937 rng(4);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  double n3 = 0.0;
  int violations = 0;
  for (int trial = 0; trial < 3; ++trial) {
    const CurvatureProfile p = constant_profile({0.0, 2.0}, {u(rng), u(rng), u(rng)}, {u(rng), u(rng)});
    const Trajectory t = synthesize(p, lctest::random_frame(3, rng, 0.5), {0.0, 2.0}, 1e-3);
    Eigen::VectorXd w(5);
    for (int i = 0; i < 5; ++i)
      w[i] = g(rng);
    const EtaSeries en = eta_from_axis(t, LorentzVector(w));
    const EtaOdeResidual d = eta_ode_residual(en, p, EtaVariant::Derived);
    const EtaOdeResidual lit = eta_ode_residual(en, p, EtaVariant::PaperLiteral);
    for (double x : d.max_abs)
      n3 = std::max(n3, x);
    const ProfileValues c = p(0.0);
    for (std::size_t k = 0; k < d.s.size(); ++k) {
      const double eta1 = en.at(1, k + fd::kMargin);
      for (int i = 1; i <= 3; ++i) {
        const auto row = static_cast<Eigen::Index>(k);
        if (std::abs(c.t(i) * eta1) > 1e-6 && !(lit.pointwise(row, i) > d.pointwise(row, i)))
          ++violations;
      }
    }
  }
  v.require(n3 < 1e-6, "n=3 derived residual " + num(n3));
  v.require(violations == 0, std::to_string(violations) + " samples where the literal row does not exceed");

  const RunOutcome r = run_scenario(load_scenario(scenarios / "helix-n3-analyze.ini"));
  bool reconciled = false;
  for (const auto& row : r.reconciliation)
    reconciled = reconciled || row.relation == "eta-system middle block";
  v.require(reconciled, "no reconciliation row in the helix report");
  if (v.ok)
    v.detail = "log-spiral eta " + num(eerr) + ", derived " + num(derived) + ", n=3 derived " + num(n3) +
               ", literal exceeds everywhere tau_i eta_1 != 0";
  return v;
}

Verdict detection()
{
  Verdict v;
  const SlantDetection d = detect_slant_axis(spiral().trajectory);
  v.require(d.verdict == SlantVerdict::Slant, std::string("log-spiral verdict ") + to_string(d.verdict));
  if (d.candidate) {
    const double axis = (d.candidate->axis - Eigen::VectorXd(kTime)).cwiseAbs().maxCoeff();
    v.require(axis < 1e-6, "axis error " + num(axis));
    v.require(std::abs(d.candidate->eta_np1 + 1.0) < 1e-6, "eta_{n+1} " + num(d.candidate->eta_np1));
    if (v.ok)
      v.detail = "axis error " + num(axis) + ", eta_{n+1} " + num(d.candidate->eta_np1);
  }
  v.require(d.sigma_min < 1e-8, "sigma_min " + num(d.sigma_min));
  const SlantDetection c = detect_slant_axis(preset_curve(PresetName::Circle, {1.0}, {0.0, 6.0}, 1e-3).trajectory);
  v.require(c.verdict == SlantVerdict::Degenerate, std::string("circle verdict ") + to_string(c.verdict));
  if (v.ok)
    v.detail += ", sigma_min " + num(d.sigma_min) + ", circle degenerate";
  return v;
}

Verdict harmonics()
{
  Verdict v;
  const EtaSeries e = eta_from_axis(spiral().trajectory, LorentzVector(kTime));
  const HarmonicSeries H = harmonics_from_eta(e);
  double herr = 0.0;
  for (std::size_t k = 0; k < H.size(); ++k)
    for (int i = 1; i <= 3; ++i)
      herr = std::max(herr, std::abs(H.at(i, k) - lctest::log_spiral_harmonics(H.s[k])[i - 1]));
  v.require(herr < 1e-6, "ratio H " + num(herr));
  const HarmonicSeries I =
      harmonic_ode_integrate(spiral().profile, {H.at(1, 0), H.at(2, 0), H.at(3, 0)}, {1.0, 3.0}, 1e-3);
  const double ode = (I.values - H.values).cwiseAbs().maxCoeff();
  v.require(ode < 1e-5, "integrated H " + num(ode));
  double unit = 0.0;
  for (double x : unit_axis_identity_residual(H, e.at(2, 0), e.axis_norm))
    unit = std::max(unit, x);
  v.require(unit < 1e-8, "unit-axis identity " + num(unit));
  if (v.ok)
    v.detail = "ratio H " + num(herr) + ", integrated H " + num(ode) + ", unit-axis identity " + num(unit);
  return v;
}

Verdict g_functions_check()
{
  Verdict v;
  const GSeries G = g_functions(harmonics_from_eta(eta_from_axis(spiral().trajectory, LorentzVector(kTime))));
  double gerr = 0.0;
  for (std::size_t k = 0; k < G.size(); ++k)
    for (int i = 1; i <= 3; ++i)
      gerr = std::max(gerr, std::abs(G.at(i, k) - lctest::log_spiral_harmonics(G.s[k])[i - 1]));
  const GResidual r = g_consistency_residual(G, spiral().profile);
  const double c1 = GResidual::max_of(r.case1), c5 = GResidual::max_of(r.case5_derived);
  v.require(gerr < 1e-6, "G " + num(gerr));
  v.require(c1 < 1e-6, "case 1 " + num(c1));
  v.require(c5 < 1e-6, "case 5 " + num(c5));
  if (v.ok)
    v.detail = "G " + num(gerr) + ", case 1 " + num(c1) + ", case 5 " + num(c5);
  return v;
}

Verdict axis_reconstruction()
{
  Verdict v;
  const Trajectory& t = spiral().trajectory;
  const EtaSeries e = eta_from_axis(t, LorentzVector(kTime));
  const AxisReconstruction a = axis_from_harmonics(t, harmonics_from_eta(e), e.at(2, 0));
  const double start = (a.axis.front() - Eigen::VectorXd(kTime)).cwiseAbs().maxCoeff();
  v.require(a.drift < 1e-6, "drift " + num(a.drift));
  v.require(start < 1e-6, "W(s0) error " + num(start));
  if (v.ok)
    v.detail = "drift " + num(a.drift) + ", W(s0) error " + num(start);
  return v;
}

int shell(const std::string& cmd)
{
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict cli_determinism(const fs::path& cli, const fs::path& scenarios, const fs::path& work)
{
  Verdict v;
  fs::remove_all(work);
  fs::create_directories(work);
  const std::vector<std::pair<std::string, int>> configs{
      {"log-spiral-detect", 0}, {"circle-detect", 0},     {"log-spiral-verify", 0},
      {"log-spiral-synthesize", 0}, {"helix-n3-analyze", 0}, {"power-law-at-zero", 2}};
  int files = 0;
  for (const auto& [name, expected] : configs) {
    for (const char* pass : {"a", "b"}) {
      const fs::path out = work / pass / name;
      // power-law-at-zero fails to load, so its mode is fixed here.
      const std::string sub = expected == 2 ? "synthesize" : to_string(load_scenario(scenarios / (name + ".ini")).mode);
      const std::string run = "'" + cli.string() + "' " + sub + " --config '" + (scenarios / (name + ".ini")).string() +
                              "' --out '" + out.string() + "' > '" + (work / (name + "-" + pass + ".log")).string() +
                              "' 2>&1";
      const int code = shell(run);
      v.require(code == expected, name + " exit " + std::to_string(code) + " (want " + std::to_string(expected) + ")");
    }
    if (expected != 0)
      continue;
    for (const char* csv : {"trajectory.csv", "eta.csv", "harmonics.csv", "g.csv", "residuals.csv"}) {
      const std::string a = slurp(work / "a" / name / csv), b = slurp(work / "b" / name / csv);
      v.require(!a.empty() && a == b, name + "/" + csv + " differs between runs");
      ++files;
    }
  }
  const int strict = shell("'" + cli.string() + "' verify --config '" + (scenarios / "log-spiral-verify.ini").string() +
                           "' --out '" + (work / "strict").string() + "' --tol unit_speed=1e-20 > /dev/null 2>&1");
  v.require(strict == 1, "failed check exit " + std::to_string(strict) + " (want 1)");
  const int batch = shell("'" + cli.string() + "' batch --config '" + (scenarios / "all.txt").string() + "' --out '" +
                          (work / "batch").string() + "' > /dev/null 2>&1");
  v.require(batch == 0, "batch exit " + std::to_string(batch));
  for (const char* name : {"log-spiral-verify", "helix-n3-analyze"})
    v.require(slurp(work / "batch" / name / "eta.csv") == slurp(work / "a" / name / "eta.csv"),
              std::string(name) + " batch output differs");
  if (v.ok)
    v.detail = std::to_string(files) + " CSV files identical across runs, exit codes 0/1/2 as documented";
  return v;
}

} // namespace

int main(int argc, char** argv)
{
  if (argc != 4) {
    std::cerr << "usage: acceptance <lightcone-cli> <scenario-dir> <work-dir>\n";
    return 2;
  }
  const fs::path cli = argv[1], scenarios = argv[2], work = argv[3];
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"frame algebra", frame_algebra},
      {"synthesis invariants", synthesis},
      {"n=1 oracle round trip", round_trip},
      {"eta system", [&] { return eta_system(scenarios); }},
      {"slant detection", detection},
      {"harmonic curvatures", harmonics},
      {"G-functions", g_functions_check},
      {"axis reconstruction", axis_reconstruction},
      {"CLI determinism", [&] { return cli_determinism(cli, scenarios, work); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.ok = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failed += v.ok ? 0 : 1;
    std::cout << "criterion " << i + 1 << " (" << criteria[i].first << "): " << (v.ok ? "PASS" : "FAIL") << ": "
              << v.detail << '\n';
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << '\n';
  return failed ? 1 : 0;
}

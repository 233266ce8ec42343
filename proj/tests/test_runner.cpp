#include "support.hpp"

#include <gtest/gtest.h>

#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lightcone;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = LIGHTCONE_SCENARIO_DIR;

std::string config_error(const std::string& text)
{
  try {
    parse_scenario(IniDocument::parse_string(text));
  } catch (const ConfigError& e) {
    return e.what();
  } catch (const Error& e) {
    return std::string("other: ") + e.what();
  }
  return {};
}

const char* kLogSpiral = R"([scenario]
name = ls
mode = verify
span = 1, 3
step = 1e-3
[curve]
source = preset
preset = log_spiral
[axis]
source = explicit
w = 0, 0, 1
)";

const char* kHelixN2 = R"([scenario]
name = n2
mode = detect
span = 0, 2
step = 1e-3
[curve]
source = synthesize
[profile]
kind = constant
kappa1 = 0.2
kappa2 = 0.3
tau1 = 0.7
[axis]
source = detect
expect = none
)";

Scenario scenario(const std::string& text) { return parse_scenario(IniDocument::parse_string(text)); }

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir
{
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("lightcone-test-" + tag + "-" + std::to_string(::getpid())))
  {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

} // namespace

// ---------------------------------------------------------------------------
// INI syntax

TEST(Ini, ParsesSectionsKeysAndComments)
{
  const IniDocument d = IniDocument::parse_string("# top\n[a]\nx = 1 ; note\n\n[b]\n y=two words \n");
  ASSERT_TRUE(d.has("a"));
  EXPECT_EQ(d.find("a", "x")->value, "1");
  EXPECT_EQ(d.find("a", "x")->line, 3);
  EXPECT_EQ(d.find("b", "y")->value, "two words");
  EXPECT_EQ(d.section_line("b"), 5);
  EXPECT_EQ(d.find("a", "y"), nullptr);
}

TEST(Ini, SyntaxErrorsCarryLineNumbers)
{
  auto line_of = [](const std::string& text) {
    try {
      IniDocument::parse_string(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("[a\n"), 1);
  EXPECT_EQ(line_of("[a]\nx = 1\n[a]\n"), 3);
  EXPECT_EQ(line_of("[a]\nx = 1\nx = 2\n"), 3);
  EXPECT_EQ(line_of("[a]\n\njunk\n"), 3);
  EXPECT_EQ(line_of("x = 1\n"), 1);
}

// ---------------------------------------------------------------------------
// Scenario validation

TEST(Scenario, ParsesBundledConfigs)
{
  for (const char* name : {"log-spiral-detect.ini", "circle-detect.ini", "log-spiral-verify.ini",
                           "log-spiral-synthesize.ini", "helix-n3-analyze.ini"}) {
    const Scenario sc = load_scenario(kScenarios / name);
    EXPECT_FALSE(sc.name.empty()) << name;
  }
  const Scenario h = load_scenario(kScenarios / "helix-n3-analyze.ini");
  EXPECT_EQ(h.n, 3);
  EXPECT_EQ(h.mode, Mode::Analyze);
  ASSERT_TRUE(h.axis_w);
  EXPECT_EQ(h.axis_w->size(), 5);
}

TEST(Scenario, DefaultsAndTolerances)
{
  const Scenario sc = scenario(kLogSpiral);
  EXPECT_EQ(sc.n, 1);
  EXPECT_EQ(sc.output_dir, fs::path("out") / "ls");
  EXPECT_EQ(sc.variant, EtaVariant::Derived);
  EXPECT_DOUBLE_EQ(tolerance(sc.tol, "gram"), 1e-9);
  EXPECT_DOUBLE_EQ(tolerance(sc.tol, "recursion"), 1e-4);
  const Scenario t = scenario(std::string(kLogSpiral) + "[tolerances]\ngram = 1e-7\n");
  EXPECT_DOUBLE_EQ(tolerance(t.tol, "gram"), 1e-7);
}

TEST(Scenario, ErrorsNameTheLine)
{
  // unknown key on line 7
  EXPECT_NE(config_error("[scenario]\nname = a\nmode = detect\nspan = 0, 1\nstep = 0.01\n[curve]\ncolour = red\n")
                .find("line 7"),
            std::string::npos);
  // bad mode on line 2
  EXPECT_NE(config_error("[scenario]\nname = a\nmode = guess\n").find("line 3"), std::string::npos);
  // power law blowing up inside the profile domain
  const std::string blow = config_error(R"([scenario]
name = p
mode = synthesize
span = 0, 2
step = 1e-2
[curve]
source = synthesize
[profile]
kind = power_law
kappa1 = -1, -2
)");
  EXPECT_NE(blow.find("line 10"), std::string::npos) << blow;
  EXPECT_NE(blow.find("blows up"), std::string::npos) << blow;
  // unknown tolerance
  EXPECT_NE(config_error(std::string(kLogSpiral) + "[tolerances]\nwobble = 1\n").find("line 13"), std::string::npos);
  // non-positive tolerance
  EXPECT_NE(config_error(std::string(kLogSpiral) + "[tolerances]\ngram = 0\n").find("line 13"), std::string::npos);
  // axis of the wrong dimension
  EXPECT_FALSE(config_error(R"([scenario]
name = a
mode = analyze
span = 1, 2
step = 1e-2
[curve]
source = preset
preset = log_spiral
[axis]
source = explicit
w = 0, 1
)")
                   .empty());
}

TEST(Scenario, StructuralErrors)
{
  EXPECT_FALSE(config_error("[scenario]\nname = a\n").empty());                              // no mode
  EXPECT_FALSE(config_error("[scenario]\nname = a\nmode = detect\n[curve]\nsource = preset\n").empty());
  EXPECT_FALSE(config_error(std::string(kLogSpiral) + "[extra]\nk = 1\n").empty());
  // declared n disagrees with the profile
  std::string mismatch = kHelixN2;
  mismatch.insert(mismatch.find("span"), "n = 3\n");
  EXPECT_FALSE(config_error(mismatch).empty());
  // [frame] with a preset curve
  EXPECT_FALSE(config_error(std::string(kLogSpiral) + "[frame]\nsource = canonical\n").empty());
}

// ---------------------------------------------------------------------------
// Running scenarios in memory

TEST(RunScenario, LogSpiralVerifyPassesEverything)
{
  const RunOutcome r = run_scenario(scenario(kLogSpiral));
  EXPECT_EQ(r.exit_code(), kExitOk);
  for (const char* name : {"gram", "on_cone", "unit_speed", "frenet", "eta_reconstruction", "eta_ode", "eta_integral",
                           "harmonic_ode", "unit_axis", "g_case", "axis_drift"}) {
    const Check* c = r.find(name);
    ASSERT_NE(c, nullptr) << name;
    EXPECT_EQ(c->status, CheckStatus::Pass) << name << " " << c->value;
  }
  EXPECT_EQ(r.samples, 2001u);
  EXPECT_FALSE(r.reconciliation.empty());
  std::ostringstream report;
  write_report(report, r);
  EXPECT_NE(report.str().find("result: PASS"), std::string::npos) << report.str();
}

TEST(RunScenario, GenericN2HasNoAxis)
{
  const RunOutcome r = run_scenario(scenario(kHelixN2));
  const Check* v = r.find("detect_verdict");
  ASSERT_NE(v, nullptr);
  EXPECT_EQ(v->status, CheckStatus::Pass);
  EXPECT_EQ(r.exit_code(), kExitOk);
  EXPECT_FALSE(r.detection.empty());
}

TEST(RunScenario, WrongExpectationFails)
{
  std::string text = kHelixN2;
  text.replace(text.find("expect = none"), 13, "expect = slant");
  const RunOutcome r = run_scenario(scenario(text));
  EXPECT_EQ(r.exit_code(), kExitCheckFailed);
}

TEST(RunScenario, CircleIsDegenerate)
{
  const RunOutcome r = run_scenario(load_scenario(kScenarios / "circle-detect.ini"));
  ASSERT_NE(r.find("detect_verdict"), nullptr);
  EXPECT_EQ(r.find("detect_verdict")->status, CheckStatus::Pass);
  EXPECT_EQ(r.exit_code(), kExitOk);
}

TEST(RunScenario, SynthesizeStopsAfterInvariants)
{
  const RunOutcome r = run_scenario(scenario(R"([scenario]
name = s
mode = synthesize
span = 0, 1
step = 1e-2
[curve]
source = synthesize
[profile]
kind = sinusoid
kappa1 = 0.3, 2, 0.1
kappa2 = 0.5, 1, 0, 0.2
tau1 = 0.4, 3, 0.2, 1
)"));
  EXPECT_EQ(r.exit_code(), kExitOk);
  EXPECT_NE(r.find("frenet"), nullptr);
  EXPECT_EQ(r.find("eta_ode"), nullptr);
  std::ostringstream traj, eta;
  r.trajectory.write(traj);
  r.eta.write(eta);
  const std::string head = traj.str(), empty = eta.str();
  EXPECT_EQ(head.substr(0, head.find('\n')), "s,x_1,x_2,x_3,x_4,V1_1,V1_2,V1_3,V1_4,V2_1,V2_2,V2_3,V2_4,y_1,y_2,y_3,y_4");
  EXPECT_EQ(std::count(empty.begin(), empty.end(), '\n'), 1);
}

TEST(RunScenario, VariantChangesOnlyTheAdoptedRow)
{
  Scenario sc = scenario(kLogSpiral);
  sc.variant = EtaVariant::PaperLiteral;
  const RunOutcome r = run_scenario(sc);
  const Check* c = r.find("eta_ode");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->status, CheckStatus::Fail);
  EXPECT_GT(c->value, 0.3);
}

TEST(RunScenario, Deterministic)
{
  const Scenario sc = scenario(kLogSpiral);
  auto dump = [&] {
    const RunOutcome r = run_scenario(sc);
    std::ostringstream out;
    r.trajectory.write(out);
    r.eta.write(out);
    r.harmonics.write(out);
    r.g.write(out);
    r.residuals.write(out);
    write_report(out, r);
    return out.str();
  };
  EXPECT_EQ(dump(), dump());
}

// ---------------------------------------------------------------------------
// Formatting

TEST(Format, ShortestRoundTrip)
{
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::uint64_t> bits;
  int checked = 0;
  while (checked < 2000) {
    const std::uint64_t b = bits(rng);
    double v;
    std::memcpy(&v, &b, sizeof v);
    if (!std::isfinite(v))
      continue;
    const std::string s = format_double(v);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
    ++checked;
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_short(1.23456e-7), "1.235e-07");
}

TEST(Format, CsvColumnLengthsMustAgree)
{
  CsvTable t;
  t.add("a", {1.0, 2.0});
  EXPECT_THROW(t.add("b", {1.0}), InputError);
}

// ---------------------------------------------------------------------------
// File-level entry points

TEST(Overrides, Rejected)
{
  Scenario sc = scenario(kLogSpiral);
  RunOverrides o;
  o.tol = {{"nope", 1.0}};
  EXPECT_THROW(apply_overrides(sc, o), InputError);
  o.tol = {{"gram", -1.0}};
  EXPECT_THROW(apply_overrides(sc, o), InputError);
  o.tol.clear();
  o.step = 0.0;
  EXPECT_THROW(apply_overrides(sc, o), InputError);

  Scenario detect = scenario(kHelixN2);
  detect.axis = AxisSource::None;
  RunOverrides m;
  m.mode = Mode::Verify;
  EXPECT_THROW(apply_overrides(detect, m), InputError);
}

TEST(Run, ExitCodesAndOutputs)
{
  TempDir tmp("run");
  RunOverrides o;
  o.out = tmp.path / "ok";
  std::ostringstream log;
  EXPECT_EQ(run(kScenarios / "log-spiral-verify.ini", o, log), kExitOk) << log.str();
  for (const char* f : {"trajectory.csv", "eta.csv", "harmonics.csv", "g.csv", "residuals.csv", "report.txt"})
    EXPECT_TRUE(fs::exists(tmp.path / "ok" / f)) << f;

  RunOverrides strict = o;
  strict.out = tmp.path / "strict";
  strict.tol = {{"unit_speed", 1e-20}};
  EXPECT_EQ(run(kScenarios / "log-spiral-verify.ini", strict, log), kExitCheckFailed);
  EXPECT_NE(log.str().find("failed: unit_speed"), std::string::npos);

  RunOverrides bad = o;
  bad.out = tmp.path / "bad";
  EXPECT_EQ(run(kScenarios / "power-law-at-zero.ini", bad, log), kExitInputError);
  EXPECT_NE(log.str().find("line 13"), std::string::npos) << log.str();
  EXPECT_EQ(run(tmp.path / "missing.ini", bad, log), kExitInputError);
}

TEST(Run, StepOverrideChangesGrid)
{
  TempDir tmp("step");
  RunOverrides o;
  o.out = tmp.path;
  o.step = 5e-3;
  std::ostringstream log;
  ASSERT_EQ(run(kScenarios / "log-spiral-verify.ini", o, log), kExitOk) << log.str();
  const std::string traj = slurp(tmp.path / "trajectory.csv");
  EXPECT_EQ(std::count(traj.begin(), traj.end(), '\n'), 402);
}

TEST(Batch, RunsEveryScenarioIdentically)
{
  TempDir tmp("batch");
  RunOverrides o;
  o.out = tmp.path / "a";
  std::ostringstream log;
  ASSERT_EQ(run_batch(kScenarios / "all.txt", o, log), kExitOk) << log.str();
  o.out = tmp.path / "b";
  ASSERT_EQ(run_batch(kScenarios / "all.txt", o, log), kExitOk);
  int compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(tmp.path / "a")) {
    if (!entry.is_regular_file())
      continue;
    const fs::path rel = fs::relative(entry.path(), tmp.path / "a");
    EXPECT_EQ(slurp(entry.path()), slurp(tmp.path / "b" / rel)) << rel;
    ++compared;
  }
  EXPECT_EQ(compared, 30);

  const fs::path list = tmp.path / "dupe.txt";
  std::ofstream(list) << (kScenarios / "circle-detect.ini").string() << "\n"
                      << (kScenarios / "circle-detect.ini").string() << "\n";
  o.out = tmp.path / "c";
  EXPECT_EQ(run_batch(list, o, log), kExitInputError);
  EXPECT_EQ(run_batch(tmp.path / "none.txt", o, log), kExitInputError);
}

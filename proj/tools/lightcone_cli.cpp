// lightcone: run cone-curve scenarios from INI configs.
//
//   lightcone verify --config scenarios/log-spiral-verify.ini --out out/
//   lightcone batch --config scenarios/all.txt --out out/

#include "lightcone/runner.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Options
{
  std::string config;
  std::string out;
  std::optional<double> step;
  std::vector<std::string> tol;
  std::string variant;
};

void add_common(CLI::App* cmd, Options& o, bool batch)
{
  cmd->add_option("--config", o.config, batch ? "batch file listing scenario configs" : "scenario config")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, batch ? "output root; each scenario writes to OUT/<name>" : "output directory");
  cmd->add_option("--step", o.step, "arclength step h");
  cmd->add_option("--tol", o.tol, "tolerance override NAME=VALUE (repeatable)")->take_all()->allow_extra_args(false);
  cmd->add_option("--variant", o.variant, "eta-system variant checked")->check(CLI::IsMember({"derived", "paper-literal"}));
}

lightcone::RunOverrides overrides(const Options& o, std::optional<lightcone::Mode> mode)
{
  lightcone::RunOverrides r;
  r.mode = mode;
  if (!o.out.empty())
    r.out = o.out;
  r.step = o.step;
  for (const auto& item : o.tol) {
    const auto eq = item.find('=');
    const auto value = eq == std::string::npos ? std::nullopt : lightcone::detail::parse_double(item.substr(eq + 1));
    if (!value)
      throw lightcone::InputError("--tol expects NAME=VALUE, got '" + item + "'");
    r.tol.emplace_back(item.substr(0, eq), *value);
  }
  if (!o.variant.empty())
    r.variant = lightcone::parse_variant(o.variant);
  return r;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Curves on the lightlike cone: synthesis, slant-helix analysis and identity checks"};
  app.require_subcommand(1);

  Options opts;
  struct Sub
  {
    const char* name;
    const char* help;
    std::optional<lightcone::Mode> mode;
  };
  const std::vector<Sub> subs{
      {"synthesize", "integrate the Frenet system and check frame invariants", lightcone::Mode::Synthesize},
      {"analyze", "eta coefficients, harmonic curvatures and G-functions for an axis", lightcone::Mode::Analyze},
      {"detect", "search for a slant axis", lightcone::Mode::Detect},
      {"verify", "run every identity check", lightcone::Mode::Verify},
      {"batch", "run the scenarios listed in a file, one thread each", std::nullopt},
  };
  std::vector<CLI::App*> cmds;
  for (const auto& s : subs) {
    cmds.push_back(app.add_subcommand(s.name, s.help));
    add_common(cmds.back(), opts, s.mode == std::nullopt);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lightcone::kExitInputError;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!cmds[i]->parsed())
      continue;
    try {
      const lightcone::RunOverrides o = overrides(opts, subs[i].mode);
      return subs[i].mode ? lightcone::run(opts.config, o, std::cout) : lightcone::run_batch(opts.config, o, std::cout);
    } catch (const lightcone::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return lightcone::kExitInputError;
    }
  }
  return lightcone::kExitInputError;
}

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cli.hpp"

namespace {

void add_common(CLI::App* sub, licorm::cli::RunConfig& cfg)
{
  sub->add_option("--input", cfg.input, "CSV of samples, optional second column = weight");
  auto* spec = sub->add_option("--spec", cfg.spec_path, "JSON spec file");
  auto* spec_json = sub->add_option("--spec-json", cfg.spec_json, "inline JSON spec");
  spec->excludes(spec_json);
  sub->add_option("--out", cfg.out, "report path (default stdout)");
  sub->add_option("--seed", cfg.seed, "seed for generated instances and restarts");
  sub->add_option("--max-iters", cfg.max_iters, "subgradient iteration limit");
  sub->add_option("--target-gap", cfg.target_gap, "relative duality gap target");
  sub->add_option("--tol", cfg.tol, "violation tolerance for check");
  sub->add_flag("--snap-atoms", cfg.snap_atoms, "merge sample values within 1e-12");
}

} // namespace

int main(int argc, char** argv)
{
  using namespace licorm::cli;
  CLI::App app{"Law-invariant coherent risk measures through generalized optimal transport"};
  app.require_subcommand(1);

  RunConfig cfg;
  auto* eval = app.add_subcommand("eval", "evaluate a risk measure on a sample");
  auto* dual = app.add_subcommand("dual", "primal/dual bounds and duality gap for a generator set");
  auto* check = app.add_subcommand("check", "coherence axioms and bounds on seeded instances");
  auto* kusuoka = app.add_subcommand("kusuoka", "target measure of a CV@R mixture");
  for (auto* sub : {eval, dual, check, kusuoka}) add_common(sub, cfg);
  dual->add_flag("--random", cfg.random_instance, "generate the instance from --seed");
  check->add_option("--instances", cfg.instances, "number of seeded sample pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitParse;
  }

  if (eval->parsed()) cfg.command = Command::Eval;
  if (dual->parsed()) cfg.command = Command::Dual;
  if (check->parsed()) cfg.command = Command::Check;
  if (kusuoka->parsed()) cfg.command = Command::Kusuoka;

  const auto outcome = run(cfg);
  if (outcome.report.contains("error"))
    std::cerr << "error: " << outcome.report["error"]["message"].get<std::string>() << "\n";
  try {
    write_report(outcome.report, cfg.out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return outcome.exit_code;
}

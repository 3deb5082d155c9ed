#include <algorithm>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <cyclegap/cyclegap.hpp>

namespace {

std::string default_report_path(const std::string& scenario_path) {
  const std::string suffix = ".json";
  if (scenario_path.size() > suffix.size() &&
      scenario_path.compare(scenario_path.size() - suffix.size(), suffix.size(),
                            suffix) == 0) {
    return scenario_path.substr(0, scenario_path.size() - suffix.size()) +
           ".report.json";
  }
  return scenario_path + ".report.json";
}

int run_or_verify(const std::string& path, const std::string& out_path,
                  const std::vector<std::string>& checks) {
  const cyclegap::Scenario sc = cyclegap::load_scenario(path);
  const cyclegap::RunOutcome outcome = cyclegap::run_scenario(sc, checks);
  const std::string dest = out_path.empty() ? default_report_path(path) : out_path;
  cyclegap::write_report(outcome.report, dest);

  std::cout << "scenario: " << sc.name << "\n"
            << "gap converged: " << (outcome.gap.converged ? "yes" : "no")
            << " (iterations " << outcome.gap.iterations << ")\n"
            << std::scientific << std::setprecision(6)
            << "y_residual: " << outcome.gap.y_residual
            << "  D_residual: " << outcome.gap.D_residual << "\n";
  for (const auto& c : outcome.verification.checks) {
    std::cout << "check " << c.name << ": " << (c.pass ? "pass" : "FAIL")
              << " (violation " << c.violation << ", tolerance " << c.tolerance
              << ")\n";
  }
  std::cout << "report: " << dest << "\n"
            << "overall: " << (outcome.exit_code == 0 ? "pass" : "FAIL") << "\n";
  return outcome.exit_code;
}

int run_identities(int m, int n, int trials, std::uint64_t seed) {
  const auto results = cyclegap::identity_suite(m, n, trials, seed);
  const double tol = cyclegap::default_tolerances().identity;
  double worst = 0.0;
  std::cout << "operator identity suite: m=" << m << " n=" << n
            << " trials=" << trials << " seed=" << seed << "\n";
  for (const auto& r : results) {
    std::cout << "  " << std::left << std::setw(28) << r.name << std::right
              << std::scientific << std::setprecision(3) << r.violation << "\n";
    worst = std::max(worst, r.violation);
  }
  const bool ok = worst <= tol;
  std::cout << "max violation " << std::scientific << std::setprecision(3) << worst
            << " " << (ok ? "within" : "EXCEEDS") << " tolerance " << tol << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cycles of projections onto convex sets: solvers, gap vectors, "
               "and verification checks"};
  app.require_subcommand(1);

  std::string run_path;
  std::string run_out;
  CLI::App* run = app.add_subcommand("run", "Solve a scenario and run every check");
  run->add_option("scenario", run_path, "Scenario JSON file")->required();
  run->add_option("--out", run_out,
                  "Report output path (default: <scenario>.report.json)");

  std::string verify_path;
  std::string verify_out;
  std::vector<std::string> verify_checks;
  CLI::App* verify =
      app.add_subcommand("verify", "Solve a scenario and run selected checks");
  verify->add_option("scenario", verify_path, "Scenario JSON file")->required();
  verify->add_option("--check", verify_checks,
                     "One of: cycle, pthm, geometry, saddle, dbound, all "
                     "(repeatable; default all)");
  verify->add_option("--out", verify_out,
                     "Report output path (default: <scenario>.report.json)");

  int id_m = 0;
  int id_n = 0;
  int id_trials = 100;
  std::uint64_t id_seed = 1;
  CLI::App* identities = app.add_subcommand(
      "identities", "Operator identity suite on seeded random tuples");
  identities->add_option("--m", id_m, "Number of sets (>= 2)")->required();
  identities->add_option("--n", id_n, "Ambient dimension (>= 1)")->required();
  identities->add_option("--trials", id_trials, "Random tuples to draw");
  identities->add_option("--seed", id_seed, "Seed for the tuple generator");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      return run_or_verify(run_path, run_out, {});
    }
    if (verify->parsed()) {
      return run_or_verify(verify_path, verify_out,
                           verify_checks.empty()
                               ? std::vector<std::string>{"all"}
                               : verify_checks);
    }
    if (identities->parsed()) {
      return run_identities(id_m, id_n, id_trials, id_seed);
    }
  } catch (const cyclegap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

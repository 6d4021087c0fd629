#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "slicesim/runner.hpp"
#include "slicesim/scenario_file.hpp"
#include "slicesim/verify.hpp"
#include "slicing/engines.hpp"
#include "slicing/sim.hpp"

namespace {

enum Exit { ok = 0, usage = 1, solver = 2, verification = 3 };

int write_rows(const std::string& scenario, const std::string& out, const slicesim::RunOptions& opts) {
  const auto file = slicesim::load_scenario(scenario);
  const auto rows = slicesim::execute(file, opts);
  std::ostringstream csv;
  slicesim::write_csv(csv, rows);
  if (out.empty() || out == "-") {
    std::cout << csv.str();
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + out + "'");
    f << csv.str();
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network slicing simulator"};
  app.require_subcommand(1);

  std::string scenario, out, trace, suite;
  unsigned threads = 0;
  slicesim::VerifyOptions vopts;
  std::size_t instances = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("file", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    cmd->add_option("-o,--output", out, "CSV output path ('-' for stdout)");
    cmd->add_option("--threads", threads, "Worker threads (0: all cores)");
  };
  auto* run = app.add_subcommand("run", "Run the scenario's run block");
  add_common(run);
  auto* sweep = app.add_subcommand("sweep", "Run every value of the scenario's sweep block");
  add_common(sweep);
  app.add_option("--trace", trace, "Write event traces to this path");

  auto* verify = app.add_subcommand("verify", "Run a property suite on random instances");
  verify->add_option("suite", suite, "Suite name")->required()->check(CLI::IsMember(slicesim::suite_names()));
  auto* n_opt = verify->add_option("--instances", instances, "Number of instances")->check(CLI::PositiveNumber);
  verify->add_option("--meta-seed", vopts.meta_seed, "Root seed for instance generation");
  verify->add_option("--alpha", vopts.alphas, "Fairness parameters")->delimiter(',')->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : usage;
  }

  try {
    if (*verify) {
      if (*n_opt) vopts.instances = instances;
      const auto report = slicesim::run_suite(suite, vopts);
      slicesim::print_report(std::cout, report);
      return report.pass() ? ok : verification;
    }
    slicesim::RunOptions ropts;
    ropts.sweep = static_cast<bool>(*sweep);
    ropts.threads = threads;
    ropts.trace_path = trace;
    return write_rows(scenario, out, ropts);
  } catch (const slicesim::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage;
  } catch (const slicing::ModelError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage;
  } catch (const slicing::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return solver;
  } catch (const slicing::sim::SimulationError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return solver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage;
  }
}

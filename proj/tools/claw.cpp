// claw: synthesize and verify time-dependent source controls for scalar
// conservation laws.
//
// Subcommands:
//   metrics <scenario.json>   bracket norms, controllability times, hypotheses
//   steer   <scenario.json>   synthesize a control and verify it stagewise
//   bv      <scenario.json>   BV pipeline: mollify, synthesize, FV-verify
//   trace   <scenario.json>   boundary traces of the composed solution
//
// Exit codes: 0 pass, 1 configuration error, 2 hypothesis failure,
// 3 solver failure, 4 verification failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "claw/scenario.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitHypothesis = 2;
constexpr int kExitSolver = 3;
constexpr int kExitVerification = 4;

struct CommonOpts {
  std::string scenario_file;
  std::string out_dir;
  bool json = false;
  bool force = false;
  std::optional<double> dx;
};

void add_common(CLI::App* cmd, CommonOpts& o, double* dx_slot) {
  cmd->add_option("scenario", o.scenario_file, "Scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir, "Output directory (default: <scenario>.out)");
  cmd->add_flag("--json", o.json, "Print the report JSON to stdout");
  cmd->add_flag("--force", o.force, "Run even if the hypotheses fail");
  cmd->add_option("--dx", *dx_slot, "FV cell width override");
}

std::string default_out_dir(const std::string& scenario_file) {
  std::filesystem::path p(scenario_file);
  p.replace_extension();
  return p.string() + ".out";
}

int finish(const claw::CommandResult& res, const CommonOpts& o) {
  if (o.json) std::cout << res.report.dump(2) << "\n";
  if (res.pass) return 0;
  return res.hypothesis_ok ? kExitVerification : kExitHypothesis;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"source controllability toolkit for scalar conservation laws"};
  app.require_subcommand(1);

  CommonOpts metrics_o, steer_o, bv_o, trace_o;
  double metrics_dx = 0.0, steer_dx = 0.0, bv_dx = 0.0, trace_dx = 0.0;
  std::string bv_n_list;

  CLI::App* c_metrics = app.add_subcommand("metrics", "Flux metrics and times");
  add_common(c_metrics, metrics_o, &metrics_dx);
  CLI::App* c_steer = app.add_subcommand("steer", "Synthesize and verify a control");
  add_common(c_steer, steer_o, &steer_dx);
  CLI::App* c_bv = app.add_subcommand("bv", "BV mollification pipeline");
  add_common(c_bv, bv_o, &bv_dx);
  c_bv->add_option("--n", bv_n_list, "Comma-separated mollification levels");
  CLI::App* c_trace = app.add_subcommand("trace", "Boundary traces");
  add_common(c_trace, trace_o, &trace_dx);

  CLI11_PARSE(app, argc, argv);

  auto chosen = [&]() -> std::pair<std::string, CommonOpts*> {
    if (c_metrics->parsed()) return {"metrics", &metrics_o};
    if (c_steer->parsed()) return {"steer", &steer_o};
    if (c_bv->parsed()) return {"bv", &bv_o};
    return {"trace", &trace_o};
  }();
  const std::string& cmd = chosen.first;
  CommonOpts& opts = *chosen.second;
  if (c_steer->parsed() && c_steer->count("--dx")) opts.dx = steer_dx;
  if (c_bv->parsed() && c_bv->count("--dx")) opts.dx = bv_dx;
  if (opts.out_dir.empty()) opts.out_dir = default_out_dir(opts.scenario_file);

  try {
    const claw::Scenario scen = claw::load_scenario(opts.scenario_file);

    if (cmd == "metrics") {
      claw::CommandResult res = claw::run_metrics(scen);
      claw::write_report(res.report, opts.out_dir);
      return finish(res, opts);
    }
    if (cmd == "steer") {
      claw::CommandResult res = claw::run_steer(scen, opts.dx, opts.force, opts.out_dir);
      return finish(res, opts);
    }
    if (cmd == "bv") {
      std::vector<int> ns = scen.bv_n;
      if (!bv_n_list.empty()) {
        ns.clear();
        std::stringstream ss(bv_n_list);
        std::string tok;
        while (std::getline(ss, tok, ',')) ns.push_back(std::stoi(tok));
      }
      const double dx = opts.dx.value_or(scen.grid.dx);
      claw::CommandResult res = claw::run_bv(scen, ns, dx, opts.out_dir);
      return finish(res, opts);
    }
    claw::CommandResult res = claw::run_trace(scen, opts.out_dir);
    return finish(res, opts);
  } catch (const claw::FeasibilityError& e) {
    std::cerr << "hypothesis failure: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const claw::H2Violation& e) {
    std::cerr << "hypothesis failure: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const claw::OneSidedViolation& e) {
    std::cerr << "hypothesis failure: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const claw::ExtensionInfeasible& e) {
    std::cerr << "hypothesis failure: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const claw::NotControllable& e) {
    std::cerr << "hypothesis failure: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const claw::BlowUp& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const claw::StepFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const claw::WindowTooSmall& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const claw::CertificateViolation& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return kExitVerification;
  } catch (const claw::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mcl/errors.hpp"
#include "mcl/harness.hpp"

// Command-line front end.
//
//   mcl verify <kind> --config FILE [--out DIR] [--seed N] [--quad-order N]
//              [--json] [--csv] [--plots]
//   mcl list experiments
//   mcl selftest
//
// Exit code 0 when every check passes, 1 on a failed or invalidated run,
// 2 on usage or configuration errors.

namespace {

struct VerifyOptions {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int quad_order = 0;
  bool want_json = false;
  bool want_csv = false;
  bool want_plots = false;
};

void print_report(const mcl::harness::VerificationReport& rep) {
  std::cout << "experiment " << rep.experiment_id << "\n";
  for (const auto& row : rep.rows) {
    std::cout << "  " << (row.pass ? "pass" : "FAIL") << "  " << row.name
              << "  computed=" << row.computed.dump();
    if (!row.reference.is_null())
      std::cout << "  reference=" << row.reference.dump();
    if (row.tolerance > 0.0) std::cout << "  tol=" << row.tolerance;
    std::cout << "\n";
  }
  std::cout << "status " << rep.status << "\n";
}

int run_verify(const std::string& kind, const VerifyOptions& opt) {
  mcl::harness::ExperimentConfig cfg = mcl::harness::load_config(opt.config_path);
  if (cfg.kind != kind)
    throw std::invalid_argument("config kind '" + cfg.kind +
                                "' does not match subcommand '" + kind + "'");
  if (opt.seed_set) {
    cfg.seed = opt.seed;
    cfg.quadrature.seed = opt.seed;
  }
  if (opt.quad_order > 0) cfg.quadrature.order = opt.quad_order;

  const auto rep = mcl::harness::run_experiment(cfg);
  print_report(rep);
  if (!opt.out_dir.empty()) {
    const bool any = opt.want_json || opt.want_csv || opt.want_plots;
    mcl::harness::write_outputs(rep, opt.out_dir,
                                opt.want_json || !any, opt.want_csv,
                                opt.want_plots);
    std::cout << "outputs written to " << opt.out_dir << "\n";
  }
  return rep.overall_pass() ? 0 : 1;
}

int run_list() {
  const auto entries = mcl::harness::list_experiments();
  std::size_t width = 0;
  for (const auto& e : entries) width = std::max(width, e.id.size());
  for (const auto& e : entries)
    std::cout << std::left << std::setw(static_cast<int>(width) + 2) << e.id
              << e.kind << "  " << e.description << "\n";
  return 0;
}

int run_selftest() {
  const auto results = mcl::harness::run_acceptance();
  bool all = true;
  for (const auto& r : results) {
    std::cout << r.id << " " << (r.pass ? "PASS" : "FAIL") << " ("
              << std::fixed << std::setprecision(1) << r.runtime_ms
              << " ms)  " << r.detail << "\n";
    all = all && r.pass;
  }
  std::cout << (all ? "selftest PASS" : "selftest FAIL") << "\n";
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical checks for stratified unitary flows and odd "
               "characteristic forms"};
  app.require_subcommand(1);

  auto* verify = app.add_subcommand("verify", "run one experiment family");
  verify->require_subcommand(1);
  VerifyOptions opt;
  std::string chosen_kind;
  for (const std::string kind :
       {"duality", "flow", "bvp", "forms", "reduction"}) {
    auto* sub = verify->add_subcommand(kind, "run a " + kind + " experiment");
    sub->add_option("--config", opt.config_path, "experiment config (JSON)")
        ->required();
    sub->add_option("--out", opt.out_dir, "directory for report artifacts");
    sub->add_option("--seed", opt.seed, "override the config seed")
        ->each([&opt](const std::string&) { opt.seed_set = true; });
    sub->add_option("--quad-order", opt.quad_order,
                    "override the quadrature order");
    sub->add_flag("--json", opt.want_json, "write report.json (default)");
    sub->add_flag("--csv", opt.want_csv, "write rows.csv");
    sub->add_flag("--plots", opt.want_plots, "write plot data when available");
    sub->callback([&chosen_kind, kind] { chosen_kind = kind; });
  }

  auto* list = app.add_subcommand("list", "enumerate built-in experiments");
  list->add_subcommand("experiments", "list experiment ids")->callback([] {});

  app.add_subcommand("selftest", "run the acceptance checklist");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("selftest")) return run_selftest();
    if (app.got_subcommand("list")) return run_list();
    return run_verify(chosen_kind, opt);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const mcl::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

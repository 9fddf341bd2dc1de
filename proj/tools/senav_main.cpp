// CLI wrapper: simulate / replay / montecarlo / selftest.
//
// Exit codes: 0 success, 1 configuration error, 2 filter divergence,
// 3 I/O error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "senav/errors.hpp"
#include "senav/harness.hpp"
#include "senav/selfcheck.hpp"

namespace {

senav::RunConfig make_config(const std::string& config_path, long long seed_override,
                             const std::string& out_override) {
  senav::RunConfig cfg;
  if (!config_path.empty()) cfg = senav::load_config(config_path);
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
  if (!out_override.empty()) cfg.out = out_override;
  return cfg;
}

void print_summary(const senav::RunSummary& s) {
  std::printf("steady_att_mse=%.6g steady_pos_mse=%.6g steady_vel_mse=%.6g\n", s.steady_att_mse,
              s.steady_pos_mse, s.steady_vel_mse);
  std::printf("inflation_count=%ld diverged=%d wall_ms=%.1f\n", s.inflation_count,
              s.diverged ? 1 : 0, s.wall_ms);
}

int run(int argc, char** argv) {
  CLI::App app{"Geometric stochastic navigation filter on SE2(3) with prescribed performance"};
  app.require_subcommand(1);

  std::string config_path, out_override;
  long long seed_override = -1;
  int trials = 50;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value config file");
    sub->add_option("--seed", seed_override, "override the config seed");
    sub->add_option("--out", out_override, "report CSV path");
  };

  auto* sim = app.add_subcommand("simulate", "run the synthetic-trajectory simulation");
  add_common(sim);
  auto* rep = app.add_subcommand("replay", "re-run the filter on recorded CSV streams");
  add_common(rep);
  auto* mc = app.add_subcommand("montecarlo", "independent seeded trials of the simulate scenario");
  add_common(mc);
  mc->add_option("--trials", trials, "number of trials")->check(CLI::PositiveNumber);
  auto* st = app.add_subcommand("selftest", "run the built-in property suites");

  CLI11_PARSE(app, argc, argv);

  if (st->parsed()) {
    bool all = true;
    for (const auto& r : senav::run_selfchecks()) {
      std::printf("%-4s %s (%s)\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
      all = all && r.pass;
    }
    return all ? 0 : 1;
  }

  senav::RunConfig cfg = make_config(config_path, seed_override, out_override);
  if (sim->parsed()) {
    cfg.mode = senav::RunConfig::Mode::Simulate;
    auto report = senav::run_simulate(cfg);
    senav::emit_report(report, cfg.out, senav::summary_path_for(cfg.out));
    print_summary(report.summary);
    return report.summary.diverged ? 2 : 0;
  }
  if (rep->parsed()) {
    cfg.mode = senav::RunConfig::Mode::Replay;
    auto report = senav::run_replay(cfg);
    senav::emit_report(report, cfg.out, senav::summary_path_for(cfg.out));
    print_summary(report.summary);
    return report.summary.diverged ? 2 : 0;
  }
  if (mc->parsed()) {
    cfg.mode = senav::RunConfig::Mode::Simulate;
    auto result = senav::run_monte_carlo(cfg, trials);
    for (size_t i = 0; i < result.trials.size(); ++i) {
      const auto& t = result.trials[i];
      std::printf("trial=%zu seed=%llu steady_att_mse=%.6g steady_pos_mse=%.6g "
                  "steady_vel_mse=%.6g inflations=%ld diverged=%d\n",
                  i, static_cast<unsigned long long>(cfg.seed + i), t.steady_att_mse,
                  t.steady_pos_mse, t.steady_vel_mse, t.inflation_count, t.diverged ? 1 : 0);
    }
    std::printf("trials=%zu divergences=%d\n", result.trials.size(), result.divergences);
    std::printf("mean_steady_att_mse=%.6g max_steady_att_mse=%.6g\n", result.mean_steady_att_mse,
                result.max_steady_att_mse);
    std::printf("mean_steady_pos_mse=%.6g mean_steady_vel_mse=%.6g\n", result.mean_steady_pos_mse,
                result.mean_steady_vel_mse);
    return result.divergences == 0 ? 0 : 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const senav::config_error& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 1;
  } catch (const senav::divergence_error& ex) {
    std::cerr << "divergence: " << ex.what() << "\n";
    return 2;
  } catch (const senav::io_error& ex) {
    std::cerr << "io error: " << ex.what() << "\n";
    return 3;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}

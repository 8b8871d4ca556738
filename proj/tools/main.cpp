#include "phasordyn/engine.hpp"
#include "phasordyn/outputs.hpp"
#include "phasordyn/reduced.hpp"
#include "phasordyn/scenario_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

using namespace phasordyn;

struct Overrides {
  double dt = 0.0;    // 0 = keep scenario value
  double t_end = 0.0; // 0 = keep scenario value
  std::string out_dir;
};

void apply_overrides(Scenario& sc, const Overrides& ov) {
  if (ov.dt > 0.0) sc.sim.dt_s = ov.dt;
  if (ov.t_end > 0.0) sc.sim.t_end_s = ov.t_end;
}

int run_and_emit(Scenario sc, const Overrides& ov, bool eigen_only) {
  apply_overrides(sc, ov);
  if (eigen_only) sc.sim.eigen_scan = true;
  RunArtifacts run = run_scenario(sc);
  if (!ov.out_dir.empty()) {
    if (eigen_only) {
      std::filesystem::create_directories(ov.out_dir);
      std::ofstream scan_out(ov.out_dir + "/eigenscan.csv", std::ios::binary);
      scan_out << "time_s,mode,real,imag\n";
      char buf[128];
      for (const auto& snap : run.scan.snapshots) {
        for (int m = 0; m < snap.eigenvalues.size(); ++m) {
          std::snprintf(buf, sizeof buf, "%.12g,%d,%.12g,%.12g\n", snap.t, m,
                        snap.eigenvalues[m].real(), snap.eigenvalues[m].imag());
          scan_out << buf;
        }
      }
      std::ofstream sum_out(ov.out_dir + "/summary.txt", std::ios::binary);
      sum_out << summary_text(run, sc);
    } else {
      emit_outputs(run, sc, ov.out_dir);
    }
  }
  std::fputs(summary_text(run, sc).c_str(), stdout);
  return verdict_exit_code(run.verdict);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasi-steady-state multi-time-scale power system simulator"};
  app.require_subcommand(1);

  Overrides ov;
  std::string scenario_path;
  int preset_number = 1;
  std::string dump_path;
  bool dump_only = false;
  bool want_tune_report = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", ov.out_dir, "output directory for CSV artifacts");
    sub->add_option("--dt", ov.dt, "integration step override, s");
    sub->add_option("--t-end", ov.t_end, "horizon override, s");
  };

  CLI::App* cmd_run = app.add_subcommand("run", "simulate a scenario file");
  cmd_run->add_option("scenario", scenario_path, "scenario file")->required();
  add_common(cmd_run);

  CLI::App* cmd_preset = app.add_subcommand("preset", "simulate a built-in study case");
  cmd_preset->add_option("number", preset_number, "case number 1-4")->required();
  cmd_preset->add_option("--dump", dump_path, "write the preset scenario file here");
  cmd_preset->add_flag("--dump-only", dump_only, "write the scenario file and skip the run");
  cmd_preset->add_flag("--tune-report", want_tune_report,
                       "print the corridor tuning report and skip the run");
  add_common(cmd_preset);

  CLI::App* cmd_scan = app.add_subcommand("scan", "eigen scan only (no timeseries/phase files)");
  cmd_scan->add_option("scenario", scenario_path, "scenario file")->required();
  add_common(cmd_scan);

  CLI::App* cmd_check = app.add_subcommand("check", "parse and validate only");
  cmd_check->add_option("scenario", scenario_path, "scenario file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_check->parsed()) {
      const Scenario sc = load_scenario_file(scenario_path);
      std::printf("ok: %s (%zu buses, %zu events)\n", sc.name.c_str(),
                  sc.network.buses.size(), sc.events.size());
      return 0;
    }
    if (cmd_run->parsed()) {
      return run_and_emit(load_scenario_file(scenario_path), ov, false);
    }
    if (cmd_scan->parsed()) {
      return run_and_emit(load_scenario_file(scenario_path), ov, true);
    }
    if (cmd_preset->parsed()) {
      if (want_tune_report) {
        CorridorConfig cfg;
        if (preset_number == 3) cfg.pll_bw_hz = 4.0;
        if (preset_number == 4) cfg.with_gfm = true;
        if (preset_number >= 2) cfg.with_cvr = true;
        std::fputs(tune_report(cfg).c_str(), stdout);
        return 0;
      }
      Scenario sc = build_preset(preset_number);
      if (!dump_path.empty()) save_scenario_file(sc, dump_path);
      if (dump_only) {
        std::printf("wrote %s\n", dump_path.c_str());
        return 0;
      }
      return run_and_emit(std::move(sc), ov, false);
    }
  } catch (const ScenarioError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}

#include "phasordyn/outputs.hpp"

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

namespace phasordyn {

namespace {

std::string fmt_real(Real v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary); // no platform newline translation
  if (!out) throw ConfigError("outputs: cannot write '" + path + "'");
  return out;
}

void write_timeseries(const RunArtifacts& run, const Scenario& sc,
                      const std::string& path) {
  auto out = open_out(path);
  const TimeSeries& ts = run.series;
  out << "t_s";
  for (const auto& name : ts.names) out << ',' << name;
  out << '\n';
  const int every = std::max(1, sc.sim.output_every);
  std::string line;
  for (int i = 0; i < ts.samples(); i += every) {
    line = fmt_real(ts.t[static_cast<size_t>(i)]);
    for (int ch = 0; ch < static_cast<int>(ts.names.size()); ++ch) {
      line += ',';
      line += fmt_real(ts.value(ch, i));
    }
    out << line << '\n';
  }
}

void write_events(const RunArtifacts& run, const std::string& path) {
  auto out = open_out(path);
  out << "time_s,kind,payload\n";
  for (const auto& e : run.journal.entries) {
    out << fmt_real(e.t) << ',' << e.kind << ',' << e.payload << '\n';
  }
}

void write_eigenscan(const RunArtifacts& run, const std::string& path) {
  auto out = open_out(path);
  out << "time_s,mode,real,imag\n";
  for (const auto& snap : run.scan.snapshots) {
    for (int m = 0; m < snap.eigenvalues.size(); ++m) {
      out << fmt_real(snap.t) << ',' << m << ','
          << fmt_real(snap.eigenvalues[m].real()) << ','
          << fmt_real(snap.eigenvalues[m].imag()) << '\n';
    }
  }
}

void write_phase(const PhaseTrace& trace, const std::string& path) {
  auto out = open_out(path);
  const bool annotated = trace.annotation.size() > 0;
  out << trace.name_a << ',' << trace.name_b;
  if (annotated) out << ',' << trace.name_annotation;
  out << '\n';
  for (int i = 0; i < trace.a.size(); ++i) {
    out << fmt_real(trace.a[i]) << ',' << fmt_real(trace.b[i]);
    if (annotated) out << ',' << fmt_real(trace.annotation[i]);
    out << '\n';
  }
}

} // namespace

std::string phase_file_name(const std::string& a, const std::string& b) {
  auto sanitize = [](const std::string& s) {
    std::string r;
    for (char c : s) {
      r += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    }
    return r;
  };
  return "phase_" + sanitize(a) + "_" + sanitize(b) + ".csv";
}

std::string summary_text(const RunArtifacts& run, const Scenario& sc) {
  std::string s;
  s += "scenario: " + sc.name + "\n";
  s += "verdict: " + verdict_name(run.verdict) + "\n";
  s += "exit_code: " + std::to_string(verdict_exit_code(run.verdict)) + "\n";
  const char* term = run.termination == Termination::completed ? "completed"
                     : run.termination == Termination::collapsed ? "collapsed"
                                                                 : "runaway";
  s += std::string("termination: ") + term + "\n";
  if (!run.termination_detail.empty()) s += "termination_detail: " + run.termination_detail + "\n";
  s += "t_final_s: " + fmt_real(run.t_final) + "\n";
  s += "detect_channel: " + run.detect_channel + "\n";
  s += "hopf_crossing_t_s: " +
       (run.hopf_crossing_t ? fmt_real(*run.hopf_crossing_t) : std::string("none")) + "\n";
  s += "cycle_onset_t_s: " +
       (run.cycle_onset_t ? fmt_real(*run.cycle_onset_t) : std::string("none")) + "\n";
  s += "final_cycle_exists: " + std::string(run.final_cycle.exists ? "yes" : "no") + "\n";
  s += "final_cycle_pkpk: " + fmt_real(run.final_cycle.amplitude_pkpk) + "\n";
  s += "final_cycle_period_s: " + fmt_real(run.final_cycle.period_s) + "\n";

  s += "crossings: " + std::to_string(run.scan.crossings.size()) + "\n";
  for (const auto& c : run.scan.crossings) {
    s += "  t_s=" + fmt_real(c.t) +
         " kind=" + (c.kind == CrossingKind::hopf ? std::string("hopf") : std::string("snb")) +
         " direction=" + (c.direction > 0 ? std::string("+1") : std::string("-1")) +
         " imag_abs=" + fmt_real(c.imag_abs) + "\n";
  }

  std::map<std::string, int> counts;
  for (const auto& e : run.journal.entries) ++counts[e.kind];
  s += "events: " + std::to_string(run.journal.entries.size()) + "\n";
  for (const auto& [kind, n] : counts) {
    s += "  " + kind + ": " + std::to_string(n) + "\n";
  }
  for (const char* kind : {"branch_trip", "oel_limit", "cvr_activate"}) {
    if (auto t = run.journal.first_time(kind)) {
      s += std::string(kind) + "_t_s: " + fmt_real(*t) + "\n";
    }
  }
  if (auto t0 = run.journal.first_time("tap_step")) {
    s += "tap_first_t_s: " + fmt_real(*t0) + "\n";
    s += "tap_last_t_s: " + fmt_real(*run.journal.last_time("tap_step")) + "\n";
  }
  return s;
}

std::vector<std::string> emit_outputs(const RunArtifacts& run, const Scenario& sc,
                                      const std::string& out_dir,
                                      const PhaseWindow& window) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> paths;
  auto at = [&](const std::string& name) { return out_dir + "/" + name; };

  paths.push_back(at("timeseries.csv"));
  write_timeseries(run, sc, paths.back());

  paths.push_back(at("events.csv"));
  write_events(run, paths.back());

  paths.push_back(at("eigenscan.csv"));
  write_eigenscan(run, paths.back());

  std::string annotation = sc.outputs.annotation_channel;
  if (annotation.empty() && run.series.channel("zone.p_mw") >= 0) {
    annotation = "zone.p_mw";
  }
  for (const auto& [a, b] : sc.outputs.phase_pairs) {
    const PhaseTrace trace =
        extract_phase_trace(run.series, a, b, annotation, window.t0, window.t1);
    paths.push_back(at(phase_file_name(a, b)));
    write_phase(trace, paths.back());
  }

  paths.push_back(at("summary.txt"));
  open_out(paths.back()) << summary_text(run, sc);

  return paths;
}

} // namespace phasordyn

#pragma once

#include "phasordyn/engine.hpp"

#include <string>
#include <vector>

namespace phasordyn {

// CSV/text artifacts for a finished run.  Layouts are fixed:
//   timeseries.csv  t_s, then one column per channel (decimated by output_every)
//   events.csv      time_s, kind, payload
//   eigenscan.csv   time_s, mode, real, imag
//   phase_<a>_<b>.csv  a, b, annotation (full rate inside the window)
//   summary.txt     verdict, crossings, limit-cycle report, event counts
// Numbers are printed with a fixed format, so repeated runs of the same
// scenario produce byte-identical files.

struct PhaseWindow {
  Real t0 = 0.0;
  Real t1 = 0.0; // 0/0 = last second of the run
};

/// Writes every artifact for the run into out_dir (created if needed) and
/// returns the file paths.
std::vector<std::string> emit_outputs(const RunArtifacts& run, const Scenario& sc,
                                      const std::string& out_dir,
                                      const PhaseWindow& window = {});

/// Sanitized "phase_<a>_<b>.csv" name for a channel pair.
[[nodiscard]] std::string phase_file_name(const std::string& a, const std::string& b);

[[nodiscard]] std::string summary_text(const RunArtifacts& run, const Scenario& sc);

} // namespace phasordyn

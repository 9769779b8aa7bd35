#pragma once

#include <ostream>
#include <string>

namespace safecrl {

/// Reads a completed run directory and emits the learning-curve artifacts:
/// per-step reward/cost curves with cross-seed mean and std plus the
/// immediate-nominal-reward series, each as a CSV and a matching SVG whose
/// plotted numbers come from exactly that CSV. Returns 0, or 2 with a
/// per-file report when inputs are missing.
int emit_curves(const std::string& run_dir, std::ostream& report);

}  // namespace safecrl

#pragma once

#include <span>
#include <string>

#include "radpair/analysis.hpp"
#include "radpair/experiments.hpp"

namespace radpair::io {

// Self-contained SVG line plot. NaN points are skipped; a single point is
// drawn as a marker. Throws EmptyResult when nothing is plottable.
std::string svg_line_plot(std::span<const double> x, std::span<const double> y,
                          const std::string& x_label, const std::string& y_label,
                          const std::string& title);

// Contrast for ODMR results, fluorescence for MFE curves.
std::string emit_svg_plot(const SweepResult& result);
std::string emit_svg_plot(const Spectrum& spectrum, const std::string& title = "spectrum");

}  // namespace radpair::io

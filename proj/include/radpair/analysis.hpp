#pragma once

#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "radpair/trace.hpp"

namespace radpair {

struct Spectrum {
  std::vector<double> frequency;  // MHz, ascending
  std::vector<double> contrast;
  std::vector<double> uncertainty;  // empty or same length

  std::size_t size() const { return frequency.size(); }
};

void validate(const Spectrum& spectrum);

// ---- bleach correction ---------------------------------------------------

struct FitRange {
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();
  bool contains(double t) const { return t >= t_min && t <= t_max; }
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_sigma = 0.0;
  double intercept_sigma = 0.0;
  double residual_sigma = 0.0;
  std::size_t points = 0;

  double operator()(double t) const { return intercept + slope * t; }
};

struct BleachCorrection {
  LinearFit fit;
  std::vector<double> corrected;  // values - fit(t)
};

// Ordinary least-squares line over the samples with t in `range` (and
// mask[i] set, when a mask is given), subtracted from the whole series.
// Needs >= 3 points; a constant time axis throws FitError.
BleachCorrection bleach_correct(std::span<const double> times, std::span<const double> values,
                                const FitRange& range = {},
                                const std::vector<bool>& mask = {});

// values - slope * t: removes the drift but keeps the intercept level, which
// is what ratio-based contrast needs.
std::vector<double> remove_trend(std::span<const double> times, std::span<const double> values,
                                 double slope);

// ---- contrast extraction -------------------------------------------------

enum class BaselineMode {
  Unity,          // ratio baseline 1
  Value,          // fixed ratio supplied by the caller
  LeadingCycles,  // mean ratio of the first n cycles (pre-pulse)
};

struct BaselineSpec {
  BaselineMode mode = BaselineMode::Unity;
  double value = 1.0;
  std::size_t cycles = 0;
};

struct ContrastReport {
  std::vector<double> cycle_times;  // s, time of the RF-on frame
  std::vector<double> ratios;       // on / off per cycle
  double mean_ratio = 0.0;
  double sem = 0.0;
  double baseline = 1.0;
  double contrast = 0.0;  // mean_ratio - baseline
};

// Pairs each RF-on frame with the following reference frame. Throws
// ProtocolShapeError for unpaired frames, DivisionDomain for a zero
// reference intensity.
ContrastReport contrast_from_pairs(const ProtocolTrace& trace, const BaselineSpec& baseline = {});

struct ContrastAnalysis {
  LinearFit bleach;
  ContrastReport contrast;
};

// Linear bleach fit on the reference frames inside `range`, drift removal,
// then contrast_from_pairs.
ContrastAnalysis analyze_contrast(const ProtocolTrace& trace, const FitRange& range = {},
                                  const BaselineSpec& baseline = {});

// ---- spectra -------------------------------------------------------------

// Subtracts the mean contrast of the outer `fraction` of points (split
// evenly between both ends of the sweep).
Spectrum subtract_baseline(const Spectrum& spectrum, double fraction = 0.1);

// Flips the sign so the largest-magnitude feature is positive.
Spectrum polarity_normalized(const Spectrum& spectrum);

enum class PeakRefinement { Parabolic, Lorentzian };

struct PeakReport {
  std::vector<double> centers;  // MHz
  std::vector<double> heights;
  std::vector<double> fwhm;  // MHz, NaN when a half-height crossing is missing
  std::vector<double> prominences;
  std::vector<double> splitting;  // adjacent center differences

  std::size_t size() const { return centers.size(); }
};

// Local maxima with prominence >= min_prominence. Needs >= 5 points; an empty
// report is returned when nothing qualifies.
PeakReport peak_find(const Spectrum& spectrum, double min_prominence,
                     PeakRefinement refinement = PeakRefinement::Parabolic);

// Contrast-weighted mean frequency over points above `threshold_fraction`
// of the maximum.
double spectral_centroid(const Spectrum& spectrum, double threshold_fraction = 0.1);

// ---- fits ----------------------------------------------------------------

struct GFactorFit {
  double g = 0.0;
  double slope = 0.0;      // MHz/mT
  double intercept = 0.0;  // MHz, zero unless free_intercept
  double r_squared = 0.0;
};

// Center frequency vs field. The default forces the line through the origin.
GFactorFit line_fit_g_factor(std::span<const std::pair<double, double>> points,
                             bool free_intercept = false);

struct BHalfFit {
  double amplitude = 0.0;
  double b_half = 0.0;  // mT
  double residual_norm = 0.0;
  bool warning = false;
  std::string message;
};

// Least squares of A B^2 / (B^2 + B_half^2) to (B, amplitude) points.
BHalfFit b_half_fit(std::span<const std::pair<double, double>> curve);

}  // namespace radpair

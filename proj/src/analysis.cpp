#include "radpair/analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "radpair/errors.hpp"
#include "radpair/hamiltonian.hpp"

namespace radpair {

void validate(const ProtocolTrace& trace) {
  if (trace.intensities.size() != trace.frame_times.size() ||
      trace.rf_on_mask.size() != trace.frame_times.size()) {
    throw ProtocolShapeError("trace columns differ in length");
  }
  for (std::size_t i = 1; i < trace.frame_times.size(); ++i) {
    if (!(trace.frame_times[i] > trace.frame_times[i - 1])) {
      throw ProtocolShapeError("frame times must be strictly ascending");
    }
  }
}

void validate(const Spectrum& s) {
  if (s.contrast.size() != s.frequency.size() ||
      (!s.uncertainty.empty() && s.uncertainty.size() != s.frequency.size())) {
    throw InvalidArgument("spectrum columns differ in length");
  }
  for (std::size_t i = 1; i < s.frequency.size(); ++i) {
    if (!(s.frequency[i] > s.frequency[i - 1])) {
      throw InvalidArgument("spectrum frequencies must be strictly ascending");
    }
  }
}

BleachCorrection bleach_correct(std::span<const double> times, std::span<const double> values,
                                const FitRange& range, const std::vector<bool>& mask) {
  if (times.size() != values.size() || (!mask.empty() && mask.size() != times.size())) {
    throw InvalidArgument("bleach_correct: series lengths differ");
  }
  std::vector<double> t;
  std::vector<double> y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (range.contains(times[i]) && (mask.empty() || mask[i])) {
      t.push_back(times[i]);
      y.push_back(values[i]);
    }
  }
  if (t.size() < 3) throw FitError("bleach fit needs at least 3 points in the fit range");
  const double n = static_cast<double>(t.size());
  const double t_mean = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sxx += (t[i] - t_mean) * (t[i] - t_mean);
    sxy += (t[i] - t_mean) * (y[i] - y_mean);
  }
  if (!(sxx > 0.0)) throw FitError("bleach fit: time axis is constant");

  BleachCorrection out;
  LinearFit& f = out.fit;
  f.points = t.size();
  f.slope = sxy / sxx;
  f.intercept = y_mean - f.slope * t_mean;
  double ssr = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - f(t[i]);
    ssr += r * r;
  }
  f.residual_sigma = std::sqrt(ssr / (n - 2.0));
  f.slope_sigma = f.residual_sigma / std::sqrt(sxx);
  f.intercept_sigma = f.residual_sigma * std::sqrt(1.0 / n + t_mean * t_mean / sxx);

  out.corrected.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out.corrected[i] = values[i] - f(times[i]);
  return out;
}

std::vector<double> remove_trend(std::span<const double> times, std::span<const double> values,
                                 double slope) {
  if (times.size() != values.size()) throw InvalidArgument("remove_trend: lengths differ");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] - slope * times[i];
  return out;
}

ContrastReport contrast_from_pairs(const ProtocolTrace& trace, const BaselineSpec& baseline) {
  validate(trace);
  ContrastReport rep;
  const std::size_t n = trace.size();
  if (n == 0) throw ProtocolShapeError("trace has no frames");
  for (std::size_t i = 0; i < n;) {
    if (!trace.rf_on_mask[i]) {
      throw ProtocolShapeError("reference frame at index " + std::to_string(i) +
                               " has no preceding RF-on frame");
    }
    if (i + 1 >= n || trace.rf_on_mask[i + 1]) {
      throw ProtocolShapeError("RF-on frame at index " + std::to_string(i) +
                               " has no reference frame");
    }
    const double off = trace.intensities[i + 1];
    if (off == 0.0) throw DivisionDomain("reference intensity is zero at frame " +
                                         std::to_string(i + 1));
    rep.ratios.push_back(trace.intensities[i] / off);
    rep.cycle_times.push_back(trace.frame_times[i]);
    i += 2;
  }
  const double m = static_cast<double>(rep.ratios.size());
  rep.mean_ratio = std::accumulate(rep.ratios.begin(), rep.ratios.end(), 0.0) / m;
  if (rep.ratios.size() > 1) {
    double ss = 0.0;
    for (double r : rep.ratios) ss += (r - rep.mean_ratio) * (r - rep.mean_ratio);
    rep.sem = std::sqrt(ss / (m - 1.0)) / std::sqrt(m);
  }
  switch (baseline.mode) {
    case BaselineMode::Unity: rep.baseline = 1.0; break;
    case BaselineMode::Value: rep.baseline = baseline.value; break;
    case BaselineMode::LeadingCycles: {
      if (baseline.cycles == 0 || baseline.cycles > rep.ratios.size()) {
        throw InvalidArgument("baseline cycle count outside [1, number of cycles]");
      }
      rep.baseline = std::accumulate(rep.ratios.begin(),
                                     rep.ratios.begin() + static_cast<long>(baseline.cycles), 0.0) /
                     static_cast<double>(baseline.cycles);
      break;
    }
  }
  rep.contrast = rep.mean_ratio - rep.baseline;
  return rep;
}

ContrastAnalysis analyze_contrast(const ProtocolTrace& trace, const FitRange& range,
                                  const BaselineSpec& baseline) {
  validate(trace);
  std::vector<bool> reference(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) reference[i] = !trace.rf_on_mask[i];
  ContrastAnalysis out;
  out.bleach = bleach_correct(trace.frame_times, trace.intensities, range, reference).fit;
  ProtocolTrace detrended = trace;
  detrended.intensities = remove_trend(trace.frame_times, trace.intensities, out.bleach.slope);
  out.contrast = contrast_from_pairs(detrended, baseline);
  return out;
}

Spectrum subtract_baseline(const Spectrum& s, double fraction) {
  validate(s);
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("baseline fraction in (0, 1]");
  if (s.size() < 2) throw InvalidArgument("baseline needs at least 2 points");
  const std::size_t per_side =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(0.5 * fraction * s.size())));
  double sum = 0.0;
  for (std::size_t i = 0; i < per_side; ++i) {
    sum += s.contrast[i] + s.contrast[s.size() - 1 - i];
  }
  const double base = sum / static_cast<double>(2 * per_side);
  Spectrum out = s;
  for (double& c : out.contrast) c -= base;
  return out;
}

Spectrum polarity_normalized(const Spectrum& s) {
  Spectrum out = s;
  double extreme = 0.0;
  for (double c : s.contrast) {
    if (std::abs(c) > std::abs(extreme)) extreme = c;
  }
  if (extreme < 0.0) {
    for (double& c : out.contrast) c = -c;
  }
  return out;
}

namespace {

struct Vertex {
  double x;
  double y;
};

// Vertex of the parabola through three (possibly unevenly spaced) points.
Vertex parabolic_vertex(double x0, double y0, double x1, double y1, double x2, double y2) {
  const double d0 = (y1 - y0) / (x1 - x0);
  const double d1 = (y2 - y1) / (x2 - x1);
  const double curvature = (d1 - d0) / (x2 - x0);
  if (curvature >= 0.0) return {x1, y1};
  // y = y1 + b (x - x1) + curvature (x - x1)^2 with b from the two secants.
  const double b = d0 + curvature * (x1 - x0);
  const double shift = -b / (2.0 * curvature);
  if (std::abs(shift) > 0.5 * std::max(x1 - x0, x2 - x1)) return {x1, y1};
  return {x1 + shift, y1 + b * shift + curvature * shift * shift};
}

// Lorentzian height * w^2 / ((x - c)^2 + w^2) fitted by damped Gauss-Newton.
void lorentzian_refine(const Spectrum& s, std::size_t lo, std::size_t hi, double& center,
                       double& height, double& hwhm) {
  Eigen::Vector3d p(center, height, std::max(hwhm, 1e-9));
  double lambda = 1e-3;
  auto residual = [&](const Eigen::Vector3d& q) {
    double ss = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
      const double dx = s.frequency[i] - q(0);
      const double r = s.contrast[i] - q(1) * q(2) * q(2) / (dx * dx + q(2) * q(2));
      ss += r * r;
    }
    return ss;
  };
  double current = residual(p);
  for (int it = 0; it < 100; ++it) {
    Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
    Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
    for (std::size_t i = lo; i <= hi; ++i) {
      const double dx = s.frequency[i] - p(0);
      const double w2 = p(2) * p(2);
      const double den = dx * dx + w2;
      const double model = p(1) * w2 / den;
      Eigen::Vector3d j(2.0 * p(1) * w2 * dx / (den * den), w2 / den,
                        2.0 * p(1) * p(2) * dx * dx / (den * den));
      jtj += j * j.transpose();
      jtr += j * (s.contrast[i] - model);
    }
    Eigen::Matrix3d damped = jtj;
    damped.diagonal() *= 1.0 + lambda;
    const Eigen::Vector3d step = damped.ldlt().solve(jtr);
    const Eigen::Vector3d trial = p + step;
    const double next = trial(2) > 0.0 ? residual(trial) : std::numeric_limits<double>::infinity();
    if (next < current) {
      p = trial;
      const bool done = current - next < 1e-15 * std::max(1.0, current);
      current = next;
      lambda *= 0.3;
      if (done) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }
  if (p(0) >= s.frequency[lo] && p(0) <= s.frequency[hi] && p(1) > 0.0) {
    center = p(0);
    height = p(1);
    hwhm = p(2);
  }
}

}  // namespace

PeakReport peak_find(const Spectrum& s, double min_prominence, PeakRefinement refinement) {
  validate(s);
  if (s.size() < 5) throw InvalidArgument("peak_find needs at least 5 points");
  if (!(min_prominence > 0.0)) throw InvalidArgument("min_prominence must be positive");
  const auto& y = s.contrast;
  const auto& x = s.frequency;
  const std::size_t n = s.size();
  PeakReport rep;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1])) continue;
    // Plateaus: the peak sits on the first sample of the flat top.
    std::size_t j = i;
    while (j + 1 < n && y[j + 1] == y[i]) ++j;
    if (j + 1 >= n || !(y[j + 1] < y[i])) continue;

    double left_min = y[i];
    for (std::size_t k = i; k-- > 0;) {
      if (y[k] > y[i]) break;
      left_min = std::min(left_min, y[k]);
    }
    double right_min = y[i];
    for (std::size_t k = j + 1; k < n; ++k) {
      if (y[k] > y[i]) break;
      right_min = std::min(right_min, y[k]);
    }
    const double prominence = y[i] - std::max(left_min, right_min);
    if (prominence < min_prominence) continue;

    Vertex v{x[i], y[i]};
    if (j == i) v = parabolic_vertex(x[i - 1], y[i - 1], x[i], y[i], x[i + 1], y[i + 1]);
    else v = {0.5 * (x[i] + x[j]), y[i]};

    const double half = 0.5 * v.y;
    double left = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = i; k-- > 0;) {
      if (y[k] < half) {
        left = x[k] + (half - y[k]) * (x[k + 1] - x[k]) / (y[k + 1] - y[k]);
        break;
      }
    }
    double right = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = j + 1; k < n; ++k) {
      if (y[k] < half) {
        right = x[k - 1] + (y[k - 1] - half) * (x[k] - x[k - 1]) / (y[k - 1] - y[k]);
        break;
      }
    }
    double width = right - left;

    if (refinement == PeakRefinement::Lorentzian) {
      std::size_t lo = i;
      std::size_t hi = j;
      while (lo > 0 && y[lo - 1] >= half && i - lo < 50) --lo;
      while (hi + 1 < n && y[hi + 1] >= half && hi - j < 50) ++hi;
      lo = lo >= 2 ? lo - 2 : 0;
      hi = std::min(n - 1, hi + 2);
      double hwhm = std::isfinite(width) ? 0.5 * width : x[hi] - x[lo];
      lorentzian_refine(s, lo, hi, v.x, v.y, hwhm);
      width = 2.0 * hwhm;
    }

    rep.centers.push_back(v.x);
    rep.heights.push_back(v.y);
    rep.fwhm.push_back(width);
    rep.prominences.push_back(prominence);
    i = j;
  }
  for (std::size_t k = 1; k < rep.centers.size(); ++k) {
    rep.splitting.push_back(rep.centers[k] - rep.centers[k - 1]);
  }
  return rep;
}

double spectral_centroid(const Spectrum& s, double threshold_fraction) {
  validate(s);
  if (s.size() == 0) throw InvalidArgument("empty spectrum");
  const double peak = *std::max_element(s.contrast.begin(), s.contrast.end());
  if (!(peak > 0.0)) throw InvalidArgument("spectrum has no positive feature");
  const double cut = threshold_fraction * peak;
  double w = 0.0;
  double wf = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.contrast[i] > cut) {
      w += s.contrast[i];
      wf += s.contrast[i] * s.frequency[i];
    }
  }
  return wf / w;
}

GFactorFit line_fit_g_factor(std::span<const std::pair<double, double>> points,
                             bool free_intercept) {
  if (points.size() < 2) throw FitError("g-factor fit needs at least 2 points");
  const double x0 = points.front().first;
  const bool distinct = std::any_of(points.begin(), points.end(),
                                    [&](const auto& p) { return p.first != x0; });
  if (!distinct) throw FitError("g-factor fit needs distinct fields");

  const double n = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  GFactorFit fit;
  if (free_intercept) {
    const double den = n * sxx - sx * sx;
    if (!(std::abs(den) > 0.0)) throw FitError("g-factor fit: degenerate fields");
    fit.slope = (n * sxy - sx * sy) / den;
    fit.intercept = (sy - fit.slope * sx) / n;
  } else {
    if (!(sxx > 0.0)) throw FitError("g-factor fit: degenerate fields");
    fit.slope = sxy / sxx;
  }
  fit.g = fit.slope / PhysicalConstants::bohr_magneton_over_h;
  const double y_mean = sy / n;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (const auto& [x, y] : points) {
    const double r = y - (fit.intercept + fit.slope * x);
    ss_res += r * r;
    ss_tot += (y - y_mean) * (y - y_mean);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return fit;
}

BHalfFit b_half_fit(std::span<const std::pair<double, double>> curve) {
  if (curve.size() < 5) throw FitError("B1/2 fit needs at least 5 points");
  double b_max = 0.0;
  double b_min_pos = std::numeric_limits<double>::infinity();
  for (const auto& [b, a] : curve) {
    if (!std::isfinite(b) || !std::isfinite(a)) throw FitError("B1/2 fit: non-finite data");
    const double ab = std::abs(b);
    b_max = std::max(b_max, ab);
    if (ab > 0.0) b_min_pos = std::min(b_min_pos, ab);
  }
  if (!(b_max > 0.0)) throw FitError("B1/2 fit: all fields are zero");

  // For fixed B_half the amplitude is linear; minimise the profiled residual
  // over log(B_half).
  auto profile = [&](double log_h, double& amp) {
    const double h2 = std::exp(2.0 * log_h);
    double sfy = 0.0, sff = 0.0;
    for (const auto& [b, a] : curve) {
      const double f = b * b / (b * b + h2);
      sfy += f * a;
      sff += f * f;
    }
    amp = sff > 0.0 ? sfy / sff : 0.0;
    double ss = 0.0;
    for (const auto& [b, a] : curve) {
      const double r = a - amp * b * b / (b * b + h2);
      ss += r * r;
    }
    return ss;
  };

  const double lo = std::log(b_min_pos * 1e-3);
  const double hi = std::log(b_max * 1e3);
  constexpr int grid = 400;
  double best = std::numeric_limits<double>::infinity();
  int best_k = 0;
  double amp = 0.0;
  for (int k = 0; k <= grid; ++k) {
    const double v = profile(lo + (hi - lo) * k / grid, amp);
    if (v < best) {
      best = v;
      best_k = k;
    }
  }
  double a = lo + (hi - lo) * std::max(0, best_k - 1) / grid;
  double b = lo + (hi - lo) * std::min(grid, best_k + 1) / grid;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = profile(c, amp);
  double fd = profile(d, amp);
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = profile(c, amp);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = profile(d, amp);
    }
  }
  const double log_h = 0.5 * (a + b);
  BHalfFit fit;
  fit.residual_norm = std::sqrt(profile(log_h, amp));
  fit.amplitude = amp;
  fit.b_half = std::exp(log_h);
  if (fit.amplitude == 0.0) {
    fit.warning = true;
    fit.message = "flat curve: no field effect to fit";
  } else if (fit.b_half > b_max) {
    fit.warning = true;
    fit.message = "curve does not saturate within the sampled fields";
  } else if (fit.b_half < b_min_pos) {
    fit.warning = true;
    fit.message = "rise not resolved: B1/2 below the smallest sampled field";
  }
  return fit;
}

}  // namespace radpair

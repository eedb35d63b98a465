#include <doctest.h>

#include <cmath>
#include <vector>

#include "radpair/analysis.hpp"
#include "radpair/errors.hpp"
#include "radpair/hamiltonian.hpp"

using namespace radpair;

namespace {

ProtocolTrace alternating(std::size_t cycles, double contrast, double base, double slope) {
  ProtocolTrace tr;
  for (std::size_t c = 0; c < cycles; ++c) {
    const double t_on = 20.0 * c + 0.5;
    const double t_off = t_on + 10.0;
    tr.frame_times.push_back(t_on);
    tr.intensities.push_back(base * (1.0 + contrast) + slope * t_on);
    tr.rf_on_mask.push_back(true);
    tr.frame_times.push_back(t_off);
    tr.intensities.push_back(base + slope * t_off);
    tr.rf_on_mask.push_back(false);
  }
  return tr;
}

Spectrum lorentzians(const std::vector<double>& centers, double hwhm, double f0, double f1,
                     double step) {
  Spectrum s;
  for (double f = f0; f <= f1 + 1e-9; f += step) {
    double y = 0.0;
    for (double c : centers) y += hwhm * hwhm / ((f - c) * (f - c) + hwhm * hwhm);
    s.frequency.push_back(f);
    s.contrast.push_back(y);
  }
  return s;
}

}  // namespace

TEST_CASE("bleach correction") {
  std::vector<double> t, y;
  for (int i = 0; i < 40; ++i) {
    t.push_back(0.25 * i);
    y.push_back(3.0 - 0.02 * t.back());
  }
  const BleachCorrection bc = bleach_correct(t, y);
  CHECK(bc.fit.slope == doctest::Approx(-0.02).epsilon(1e-12));
  CHECK(bc.fit.intercept == doctest::Approx(3.0).epsilon(1e-12));
  for (double r : bc.corrected) CHECK(std::abs(r) < 1e-12);

  SUBCASE("range and mask restrict the fit") {
    std::vector<double> bumped = y;
    bumped[0] += 5.0;
    const BleachCorrection ranged = bleach_correct(t, bumped, FitRange{1.0, 100.0});
    CHECK(ranged.fit.slope == doctest::Approx(-0.02).epsilon(1e-12));
    std::vector<bool> mask(t.size(), true);
    mask[0] = false;
    CHECK(bleach_correct(t, bumped, {}, mask).fit.slope == doctest::Approx(-0.02).epsilon(1e-12));
  }
  SUBCASE("too few points or a constant time axis") {
    CHECK_THROWS_AS(bleach_correct(t, y, FitRange{0.0, 0.3}), FitError);
    const std::vector<double> same(5, 1.0);
    CHECK_THROWS_AS(bleach_correct(same, same), FitError);
  }
}

TEST_CASE("contrast from paired frames") {
  SUBCASE("noiseless trace returns the true contrast") {
    const ContrastAnalysis a = analyze_contrast(alternating(30, 0.01, 1.0, -0.0004));
    CHECK(a.contrast.contrast == doctest::Approx(0.0100).epsilon(1e-9));
    CHECK(a.bleach.slope == doctest::Approx(-0.0004).epsilon(1e-9));
  }
  SUBCASE("scale invariant") {
    const double c1 = analyze_contrast(alternating(10, -0.03, 1.0, 0.0)).contrast.contrast;
    const double c2 = analyze_contrast(alternating(10, -0.03, 250.0, 0.0)).contrast.contrast;
    CHECK(c1 == doctest::Approx(c2).epsilon(1e-12));
    CHECK(c1 == doctest::Approx(-0.03).epsilon(1e-12));
  }
  SUBCASE("baselines") {
    const ProtocolTrace tr = alternating(6, 0.02, 1.0, 0.0);
    CHECK(contrast_from_pairs(tr, BaselineSpec{BaselineMode::Value, 1.02, 0}).contrast ==
          doctest::Approx(0.0).scale(1.0));
    CHECK(contrast_from_pairs(tr, BaselineSpec{BaselineMode::LeadingCycles, 1.0, 2}).contrast ==
          doctest::Approx(0.0).scale(1.0));
    CHECK_THROWS_AS(contrast_from_pairs(tr, BaselineSpec{BaselineMode::LeadingCycles, 1.0, 9}),
                    InvalidArgument);
  }
  SUBCASE("shape errors") {
    ProtocolTrace tr = alternating(3, 0.0, 1.0, 0.0);
    tr.rf_on_mask[2] = false;
    CHECK_THROWS_AS(contrast_from_pairs(tr), ProtocolShapeError);
    tr = alternating(3, 0.0, 1.0, 0.0);
    tr.intensities[1] = 0.0;
    CHECK_THROWS_AS(contrast_from_pairs(tr), DivisionDomain);
    tr = alternating(3, 0.0, 1.0, 0.0);
    tr.frame_times[3] = tr.frame_times[2];
    CHECK_THROWS_AS(contrast_from_pairs(tr), ProtocolShapeError);
  }
}

TEST_CASE("peak finding") {
  SUBCASE("two lines 50 MHz apart") {
    const Spectrum s = lorentzians({1185.7, 1235.7}, 4.0, 1100.0, 1300.0, 2.0);
    for (auto mode : {PeakRefinement::Parabolic, PeakRefinement::Lorentzian}) {
      const PeakReport r = peak_find(s, 0.1, mode);
      REQUIRE(r.size() == 2);
      REQUIRE(r.splitting.size() == 1);
      CHECK(std::abs(r.splitting[0] - 50.0) < 0.5);
      CHECK(std::abs(r.centers[0] - 1185.7) < 0.3);
    }
    const PeakReport lor = peak_find(s, 0.1, PeakRefinement::Lorentzian);
    CHECK(lor.fwhm[0] == doctest::Approx(8.0).epsilon(0.05));
  }
  SUBCASE("flat spectrum has no peaks") {
    Spectrum s;
    for (int i = 0; i < 20; ++i) {
      s.frequency.push_back(i);
      s.contrast.push_back(0.3);
    }
    CHECK(peak_find(s, 0.01).size() == 0);
  }
  SUBCASE("argument checks") {
    const Spectrum s = lorentzians({10.0}, 1.0, 0.0, 3.0, 1.0);
    CHECK_THROWS_AS(peak_find(s, 0.1), InvalidArgument);
    const Spectrum ok = lorentzians({10.0}, 1.0, 0.0, 20.0, 1.0);
    CHECK_THROWS_AS(peak_find(ok, 0.0), InvalidArgument);
  }
}

TEST_CASE("spectrum helpers") {
  Spectrum s = lorentzians({1210.0}, 3.0, 1150.0, 1270.0, 1.0);
  CHECK(spectral_centroid(s, 0.1) == doctest::Approx(1210.0).epsilon(1e-9));
  for (double& c : s.contrast) c = -c + 0.2;
  const Spectrum flipped = polarity_normalized(subtract_baseline(s, 0.1));
  CHECK(*std::max_element(flipped.contrast.begin(), flipped.contrast.end()) > 0.9);
  CHECK(spectral_centroid(flipped, 0.1) == doctest::Approx(1210.0).epsilon(1e-6));
  Spectrum neg;
  neg.frequency = {1.0, 2.0};
  neg.contrast = {-1.0, -2.0};
  CHECK_THROWS_AS(spectral_centroid(neg), InvalidArgument);
}

TEST_CASE("g-factor line fit") {
  const double mu = PhysicalConstants::bohr_magneton_over_h;
  std::vector<std::pair<double, double>> pts;
  for (double b : {43.2, 49.9, 56.0, 62.0, 69.2}) pts.emplace_back(b, 2.0023 * mu * b);
  const GFactorFit fit = line_fit_g_factor(pts);
  CHECK(fit.g == doctest::Approx(2.0023).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  const GFactorFit free = line_fit_g_factor(pts, true);
  CHECK(free.g == doctest::Approx(2.0023).epsilon(1e-10));
  CHECK(std::abs(free.intercept) < 1e-8);

  const std::vector<std::pair<double, double>> unit{{1.0, 13.9962}};
  CHECK_THROWS_AS(line_fit_g_factor(unit), FitError);
  const std::vector<std::pair<double, double>> two{{1.0, 13.9962}, {2.0, 2 * 13.9962}};
  CHECK(line_fit_g_factor(two).g == doctest::Approx(1.0).epsilon(1e-5));
  const std::vector<std::pair<double, double>> same{{3.0, 1.0}, {3.0, 2.0}};
  CHECK_THROWS_AS(line_fit_g_factor(same), FitError);
}

TEST_CASE("B1/2 fit") {
  std::vector<std::pair<double, double>> curve;
  for (int i = 0; i <= 60; ++i) {
    const double b = 0.25 * i;
    curve.emplace_back(b, 0.02 * b * b / (b * b + 9.0));
  }
  const BHalfFit fit = b_half_fit(curve);
  CHECK(std::abs(fit.b_half - 3.0) < 1e-6);
  CHECK(std::abs(fit.amplitude - 0.02) < 1e-6);
  CHECK_FALSE(fit.warning);

  std::vector<std::pair<double, double>> flat;
  for (int i = 0; i < 10; ++i) flat.emplace_back(i, 0.0);
  const BHalfFit f = b_half_fit(flat);
  CHECK(f.warning);
  CHECK_FALSE(f.message.empty());

  const std::vector<std::pair<double, double>> few{{0, 0}, {1, 1}};
  CHECK_THROWS_AS(b_half_fit(few), FitError);
}

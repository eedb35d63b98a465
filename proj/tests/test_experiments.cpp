#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "frozen.hpp"
#include "radpair/errors.hpp"
#include "radpair/experiments.hpp"
#include "test_util.hpp"

using namespace radpair;
using testutil::one_proton;

namespace {

ModelConfig model_with(const SpinSystem& s) {
  ModelConfig m;
  m.system = s;
  m.fields.b0 = 43.2;
  m.fields.rf_b1 = 0.1;
  return m;
}

std::vector<double> range(double lo, double hi, double step) {
  std::vector<double> v;
  for (double x = lo; x <= hi + 1e-9; x += step) v.push_back(x);
  return v;
}

}  // namespace

TEST_CASE("null controls") {
  SUBCASE("no drive amplitude") {
    const ModelConfig m = model_with(one_proton(50.0));
    const SweepResult r = odmr_sweep(m, 43.2, 0.0, range(1150.0, 1270.0, 10.0));
    for (double c : r.contrast) CHECK(std::abs(c) < 1e-9);
  }
  SUBCASE("no hyperfine field") {
    const ModelConfig m = model_with(SpinSystem{});
    const SweepResult r = odmr_sweep(m, 43.2, 0.1, range(1150.0, 1270.0, 10.0));
    for (std::size_t i = 0; i < r.size(); ++i) {
      CHECK(std::abs(r.contrast[i]) < 1e-9);
      CHECK(r.phi_singlet[i] == doctest::Approx(1.0).epsilon(1e-9));
    }
    const SweepResult mfe = mfe_sweep(m, range(0.0, 100.0, 10.0));
    for (double phi : mfe.phi_singlet) CHECK(phi == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("MFE sweep") {
  ModelConfig m = model_with(one_proton(10.0));
  SUBCASE("frozen endpoints") {
    const SweepResult r = mfe_sweep(m, {0.0, 20.0});
    CHECK(r.phi_singlet[0] == doctest::Approx(frozen::kProton10PhiS_B0).epsilon(1e-9));
    CHECK(r.phi_singlet[1] == doctest::Approx(frozen::kProton10PhiS_B20).epsilon(1e-9));
    CHECK(r.metadata.at("experiment") == "mfe");
  }
  SUBCASE("field reversal symmetry") {
    m.numerics.allow_negative_fields = true;
    const SweepResult r = mfe_sweep(m, {-7.5, -1.0, 1.0, 7.5});
    CHECK(r.phi_singlet[0] == doctest::Approx(r.phi_singlet[3]).epsilon(1e-10));
    CHECK(r.phi_singlet[1] == doctest::Approx(r.phi_singlet[2]).epsilon(1e-10));
  }
  SUBCASE("scaling of field, coupling and rates together") {
    ModelConfig twice = model_with(one_proton(20.0));
    twice.kinetics = KineticModel{2.0, 2.0};
    const double a = mfe_sweep(m, {3.0}).phi_singlet[0];
    const double b = mfe_sweep(twice, {6.0}).phi_singlet[0];
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
  }
  SUBCASE("range checks") {
    CHECK_THROWS_AS(mfe_sweep(m, {-1.0, 2.0}), InvalidArgument);
    CHECK_THROWS_AS(mfe_sweep(m, {1.0, 101.0}), InvalidArgument);
    CHECK_THROWS_AS(mfe_sweep(m, {2.0, 1.0}), InvalidArgument);
  }
  SUBCASE("half-saturation field in the fast regime") {
    m.kinetics = KineticModel{100.0, 100.0};
    const SweepResult r = mfe_sweep(m, range(0.0, 30.0, 0.25));
    std::vector<std::pair<double, double>> curve;
    for (std::size_t i = 0; i < r.size(); ++i) {
      curve.emplace_back(r.axis_values[i], r.phi_singlet[i] - r.phi_singlet[0]);
    }
    const BHalfFit fit = b_half_fit(curve);
    CHECK(std::abs(fit.b_half / frozen::kProton10FastHalfField - 1.0) < 0.2);
  }
}

TEST_CASE("orientation averaging") {
  const auto pts = fibonacci_sphere(200);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : pts) {
    CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-12));
    mean += p;
  }
  CHECK((mean / 200.0).norm() < 1e-2);

  // isotropic couplings: every direction gives the same yield
  ModelConfig m = model_with(one_proton(10.0));
  const double single = mfe_sweep(m, {5.0}).phi_singlet[0];
  m.numerics.orientation_grid = 50;
  CHECK(mfe_sweep(m, {5.0}).phi_singlet[0] == doctest::Approx(single).epsilon(1e-10));
  m.numerics.orientation_grid = 10;
  CHECK_THROWS_AS(validate(m), InvalidArgument);
}

TEST_CASE("ODMR sweep") {
  ModelConfig m = model_with(one_proton(50.0));
  m.initial_state = InitialStateKind::TripletBorn;
  const auto freqs = frequency_grid(1150.0, 1270.0, 2.0);
  CHECK(freqs.size() == 61);
  CHECK(frequency_grid(1000.0, 1400.0, 2.0).size() == 201);
  const SweepResult r = odmr_sweep(m, 43.2, 0.1, freqs);
  CHECK(r.metadata.at("path") == "rotating_frame");
  CHECK(r.metadata.at("rwa_invalid_points") == "0");
  CHECK(std::stod(r.metadata.at("phi_singlet_off")) ==
        doctest::Approx(frozen::kToy50TripletPhiS).epsilon(1e-9));
  const Spectrum s = polarity_normalized(r.spectrum());
  const PeakReport peaks = peak_find(s, 0.05 * *std::max_element(s.contrast.begin(), s.contrast.end()));
  REQUIRE(peaks.size() >= 2);
  CHECK(std::abs(peaks.centers.back() - peaks.centers.front() - 50.0) < 5.0);
  CHECK_THROWS_AS(odmr_sweep(m, 43.2, -0.1, freqs), InvalidArgument);
}

TEST_CASE("marker line") {
  ModelConfig m = model_with(SpinSystem{});
  m.marker = MarkerLine{};
  const SweepResult r = odmr_sweep(m, 50.0, 0.1, frequency_grid(1300.0, 1500.0, 0.5));
  CHECK(r.metadata.at("path") == "marker");
  const auto it = std::max_element(r.contrast.begin(), r.contrast.end());
  const double f = r.axis_values[static_cast<std::size_t>(it - r.contrast.begin())];
  CHECK(std::abs(f - electron_larmor(kFreeElectronG, 50.0)) <= 0.25);
  CHECK(*it < 0.01);
  CHECK(*it > 0.0);

  const auto rows = field_frequency_map(m, {43.2, 69.2}, 100.0, 1.0);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].size() == 101);
  CHECK_THROWS_AS(field_frequency_map(m, {30.0, 50.0}), InvalidArgument);
  CHECK_THROWS_AS(field_frequency_map(m, {50.0}, 0.0, 1.0), InvalidArgument);
}

TEST_CASE("mutant comparison") {
  ModelConfig wt = model_with(one_proton(50.0));
  ModelConfig mut = wt;
  mut.photocycle.triplet_product_lifetime = 10.0;
  const auto cmp = mutant_comparison(wt, mut, range(0.0, 10.0, 1.0), range(1180.0, 1240.0, 5.0));
  CHECK(cmp.ordering_holds);
  CHECK(cmp.mutant.peak_contrast < cmp.wild_type.peak_contrast);
  mut.fields.b0 = 40.0;
  CHECK_THROWS_AS(mutant_comparison(wt, mut, {0.0, 1.0}, {1200.0}), InvalidArgument);
}

TEST_CASE("protocol emulator") {
  EmulatorConfig c;
  c.true_contrast = 0.01;
  c.bleach_slope = -0.0002;
  c.n_cycles = 20;
  c.noise.model = NoiseModel::Shot;
  c.seed = 42;
  const ProtocolTrace a = protocol_emulator(c);
  const ProtocolTrace b = protocol_emulator(c);
  CHECK(a.intensities == b.intensities);
  c.seed = 43;
  CHECK(protocol_emulator(c).intensities != a.intensities);
  CHECK(a.size() == 40);
  CHECK(a.frame_times[0] == doctest::Approx(0.5));
  CHECK(a.frame_times[1] == doctest::Approx(10.5));
  CHECK(a.frame_times[2] == doctest::Approx(20.5));

  SUBCASE("noiseless round trip") {
    c.noise.model = NoiseModel::None;
    const ContrastAnalysis an = analyze_contrast(protocol_emulator(c));
    CHECK(an.contrast.contrast == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(an.bleach.slope == doctest::Approx(-0.0002).epsilon(1e-9));
  }
  SUBCASE("MFE timing") {
    c.mode = EmulatorMode::Mfe;
    const ProtocolTrace t = protocol_emulator(c);
    CHECK(t.frame_times[1] - t.frame_times[0] == doctest::Approx(0.5));
  }
  SUBCASE("negative intensity") {
    c.bleach_slope = -1.0;
    CHECK_THROWS_AS(protocol_emulator(c), InvalidArgument);
  }
}

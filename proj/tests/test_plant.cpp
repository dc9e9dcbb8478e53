#include <cmath>
#include <numbers>
#include <set>
#include <utility>

#include "doctest.h"
#include "oracles.hpp"
#include "pcac/plant.hpp"

using namespace pcac;

namespace {

constexpr double kTs = 1e-3;

EmulatorParams quiet(EmulatorParams p = {}) {
  p.noise_std = 0.0;
  return p;
}

// Largest |q| over the last `window` seconds of an unforced run.
double late_amplitude(const EmulatorParams& p, double q0, double duration, double window) {
  PlantState x{q0, 0.0, 0.0};
  const int steps = static_cast<int>(std::lround(duration / kTs));
  const int from = steps - static_cast<int>(std::lround(window / kTs));
  double peak = 0.0;
  for (int k = 0; k < steps; ++k) {
    x = plant_zoh_step(x, 0.0, p, kTs);
    if (k >= from) peak = std::max(peak, std::fabs(x.q));
  }
  return peak;
}

}  // namespace

TEST_CASE("equilibrium is preserved without input") {
  const PlantState x = plant_zoh_step({0.0, 0.0, 0.0}, 0.0, quiet(), kTs);
  CHECK(x.q == 0.0);
  CHECK(x.qdot == 0.0);
  CHECK(x.t == kTs);
}

TEST_CASE("weakly nonlinear limit cycle has amplitude 2") {
  EmulatorParams p = quiet();
  p.mu = 0.01 * p.omega;
  CHECK(late_amplitude(p, 0.01, 4.0, 0.05) == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("halving the substep count barely changes a sample") {
  EmulatorParams fine = quiet();
  EmulatorParams coarse = fine;
  coarse.substeps = fine.substeps / 2;
  // relative to the scaled state norm |(q, qdot / omega)|
  auto norm = [&](double q, double qdot) { return std::hypot(q, qdot / fine.omega); };
  for (double u : {0.0, 8.0, -8.0}) {
    for (double phase = 0.0; phase < 6.2; phase += 0.5) {
      const PlantState x{2.0 * std::cos(phase), -2.0 * fine.omega * std::sin(phase), 0.0};
      const PlantState a = plant_zoh_step(x, u, fine, kTs);
      const PlantState b = plant_zoh_step(x, u, coarse, kTs);
      CHECK(norm(a.q - b.q, a.qdot - b.qdot) <= 1e-8 * norm(a.q, a.qdot));
    }
  }
}

TEST_CASE("integrator converges at fourth order") {
  EmulatorParams p = quiet();
  const PlantState x{1.5, 800.0, 0.0};
  const double u = 3.0;
  const auto ref = oracle::van_der_pol_reference({x.q, x.qdot}, {p.omega, p.mu, p.kappa, u}, kTs);
  auto error = [&](int substeps) {
    p.substeps = substeps;
    const PlantState y = plant_zoh_step(x, u, p, kTs);
    return std::hypot(y.q - ref[0], (y.qdot - ref[1]) / p.omega);
  };
  for (int n : {4, 8, 16}) {
    const double slope = std::log2(error(n) / error(2 * n));
    CHECK(slope == doctest::Approx(4.0).epsilon(0.3 / 4.0));
  }
}

TEST_CASE("held input enters through kappa") {
  // from rest with no damping contribution at q=0, qdot=0 the first-order
  // response to a held input is qdot ~ kappa u t
  EmulatorParams p = quiet();
  const double h = 1e-7;
  p.substeps = 1;
  const PlantState x = plant_zoh_step({0.0, 0.0, 0.0}, 2.0, p, h);
  CHECK(x.qdot == doctest::Approx(p.kappa * 2.0 * h).epsilon(1e-6));
}

TEST_CASE("output scaling and noise") {
  const EmulatorParams p = quiet();
  MeasurementNoise silent(p);
  CHECK(plant_output({0.4, 0.0, 0.0}, p, silent) == doctest::Approx(20.0).epsilon(1e-15));

  EmulatorParams noisy;
  noisy.seed = 42;
  MeasurementNoise a(noisy), b(noisy);
  noisy.seed = 43;
  MeasurementNoise c(noisy);
  bool any_diff = false;
  double sum_sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double da = a.draw();
    CHECK(da == b.draw());
    if (da != c.draw()) any_diff = true;
    sum_sq += da * da;
  }
  CHECK(any_diff);
  CHECK(std::sqrt(sum_sq / n) == doctest::Approx(noisy.noise_std).epsilon(0.03));
}

TEST_CASE("operating grid covers 3 frequencies by 3 growth rates") {
  const auto grid = operating_grid();
  REQUIRE(grid.size() == 9);
  std::set<std::pair<double, double>> distinct;
  for (const auto& p : grid) distinct.insert({p.omega, p.mu});
  CHECK(distinct.size() == 9);
  std::set<long> freqs;
  for (const auto& p : grid) freqs.insert(std::lround(p.omega / (2.0 * std::numbers::pi)));
  CHECK(freqs == std::set<long>{140, 150, 160});
  for (const auto& p : grid) {
    const double factor = p.mu / (0.01 * p.omega);
    CHECK(std::fabs(factor - std::round(factor)) < 1e-12);
    CHECK(factor >= 1.0);
    CHECK(factor <= 3.0);
  }
}

TEST_CASE("every grid point self-excites from a small perturbation") {
  for (const auto& p : operating_grid(quiet())) {
    const double amp = late_amplitude(p, 1e-3, 3.0, 0.05);
    CHECK(amp > 1.9);
    CHECK(amp < 2.1);
  }
}

TEST_CASE("limit cycle amplitude is stationary") {
  const EmulatorParams p = quiet();
  const double a = late_amplitude(p, 0.1, 2.0, 0.1);
  const double b = late_amplitude(p, 0.1, 3.0, 0.1);
  CHECK(a == doctest::Approx(b).epsilon(1e-3));
}

TEST_CASE("blow-up and bad parameters are reported") {
  EmulatorParams p = quiet();
  p.kappa = 1e12;
  CHECK_THROWS_AS(plant_zoh_step({0.0, 0.0, 0.0}, 8.0, p, kTs), PlantBlowUp);
  CHECK_THROWS_AS(plant_zoh_step({0.0, 0.0, 0.0}, 0.0, quiet(), 0.0), std::invalid_argument);
  p = quiet();
  p.substeps = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = quiet();
  p.noise_std = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "jjtune/constants.hpp"
#include "jjtune/rng.hpp"
#include "jjtune/transmon.hpp"

using namespace jjtune;
using Catch::Approx;

namespace {
const PhysicalConstants kK;
const MaterialParams kAl = MaterialParams::from_gap_ev(170e-6);
const QubitDesign kDesign = QubitDesign::standard();
}

TEST_CASE("physical constants validate") {
  CHECK_NOTHROW(PhysicalConstants::si().validate());
  PhysicalConstants bad;
  bad.planck_hbar *= 1.0 + 1e-9;
  CHECK_THROWS_AS(bad.validate(), validation_error);
  bad = PhysicalConstants{};
  bad.electron_charge = 0.0;
  CHECK_THROWS_AS(bad.validate(), validation_error);
}

TEST_CASE("qubit design derivations") {
  kDesign.validate(kK);
  CHECK(kDesign.charging_energy / kK.planck_h == Approx(200e6).epsilon(1e-12));
  CHECK(kDesign.anharmonicity == Approx(-200e6).epsilon(1e-12));
  // ~97 fF shunt capacitance for a 200 MHz charging energy
  CHECK(kDesign.capacitance == Approx(9.68e-14).epsilon(0.01));

  QubitDesign tampered = kDesign;
  tampered.anharmonicity *= 1.001;
  CHECK_THROWS_AS(tampered.validate(kK), validation_error);
  CHECK_THROWS_AS(QubitDesign::from_capacitance(-1e-13), validation_error);
}

TEST_CASE("critical current (Ambegaokar-Baratoff)") {
  const double ic = critical_current(5000.0, kAl, kK);
  CHECK(ic == Approx(53.407e-9).epsilon(1e-4));

  SECTION("1/R proportionality") {
    CHECK(critical_current(10000.0, kAl, kK) == Approx(ic / 2.0).epsilon(1e-14));
  }
  SECTION("vanishes as R grows") {
    CHECK(critical_current(1e9, kAl, kK) > critical_current(1e12, kAl, kK));
    CHECK(critical_current(1e12, kAl, kK) > 0.0);
  }
  SECTION("domain") {
    CHECK_THROWS_AS(critical_current(0.0, kAl, kK), std::domain_error);
    CHECK_THROWS_AS(critical_current(-5.0, kAl, kK), std::domain_error);
  }
}

TEST_CASE("josephson energy") {
  CHECK(josephson_energy(0.0, kK) == 0.0);
  const double ic = critical_current(5000.0, kAl, kK);
  CHECK(josephson_energy(ic, kK) / kK.planck_h ==
        Approx(26.5264e9).epsilon(1e-4));
  CHECK(josephson_energy(3.0 * ic, kK) ==
        Approx(3.0 * josephson_energy(ic, kK)).epsilon(1e-14));
  CHECK_THROWS_AS(josephson_energy(-1e-9, kK), std::domain_error);
}

TEST_CASE("qubit frequency") {
  const double ej = 26.5e9 * kK.planck_h;
  const double ec = 0.2e9 * kK.planck_h;
  CHECK(qubit_frequency(ej, ec, kK) == Approx(6.31153e9).epsilon(1e-4));

  SECTION("zero E_J with override gives -E_C/h") {
    CHECK(qubit_frequency(0.0, ec, kK, true) == Approx(-0.2e9).epsilon(1e-12));
  }
  SECTION("square-root scaling: E_J x4 doubles f + E_C/h") {
    const double f1 = qubit_frequency(ej, ec, kK) + 0.2e9;
    const double f4 = qubit_frequency(4.0 * ej, ec, kK) + 0.2e9;
    CHECK(f4 == Approx(2.0 * f1).epsilon(1e-12));
  }
  SECTION("regime guard") {
    CHECK_THROWS_AS(qubit_frequency(19.0 * ec, ec, kK), regime_error);
    CHECK_NOTHROW(qubit_frequency(19.0 * ec, ec, kK, true));
    CHECK_NOTHROW(qubit_frequency(20.0 * ec, ec, kK));
  }
}

TEST_CASE("frequency from resistance") {
  const double f = frequency_from_resistance(5000.0, kAl, kDesign, kK);
  CHECK(f == Approx(6.31477e9).epsilon(1e-4));

  SECTION("+3% resistance drops frequency by ~1.5%") {
    const double f2 = frequency_from_resistance(5150.0, kAl, kDesign, kK);
    const double rel_drop = (f - f2) / f;
    CHECK(rel_drop == Approx(0.0151354).epsilon(1e-4));
    // and exactly 1 - 1.03^(-1/2) in the (f + E_C/h) variable
    const double ec_hz = kDesign.charging_energy / kK.planck_h;
    CHECK((f2 + ec_hz) / (f + ec_hz) ==
          Approx(1.0 / std::sqrt(1.03)).epsilon(1e-12));
  }
  SECTION("strictly decreasing (random pairs)") {
    Rng rng(42);
    for (int i = 0; i < 200; ++i) {
      const double r1 = rng.uniform(1000.0, 20000.0);
      const double r2 = rng.uniform(1000.0, 20000.0);
      if (r1 == r2) continue;
      const double lo = std::min(r1, r2), hi = std::max(r1, r2);
      CHECK(frequency_from_resistance(lo, kAl, kDesign, kK) >
            frequency_from_resistance(hi, kAl, kDesign, kK));
    }
  }
}

TEST_CASE("resistance for frequency") {
  const double f0 = frequency_from_resistance(5000.0, kAl, kDesign, kK);

  SECTION("round trip identity") {
    CHECK(resistance_for_frequency(f0, kAl, kDesign, kK) ==
          Approx(5000.0).epsilon(1e-9));
  }
  SECTION("1% lower frequency needs ~2% more resistance") {
    const double r = resistance_for_frequency(0.99 * f0, kAl, kDesign, kK);
    CHECK(r == Approx(5098.3578).epsilon(1e-6));
    CHECK(r / 5000.0 - 1.0 == Approx(0.0197).epsilon(0.01));
  }
  SECTION("unreachable targets") {
    const double f_cap = 2.0 * kAl.gap_delta / kK.planck_h;
    CHECK_THROWS_AS(resistance_for_frequency(1.01 * f_cap, kAl, kDesign, kK),
                    std::domain_error);
    CHECK_THROWS_AS(resistance_for_frequency(0.0, kAl, kDesign, kK),
                    std::domain_error);
    // below the transmon-regime minimum: refused without the override
    CHECK_THROWS_AS(resistance_for_frequency(1.0e9, kAl, kDesign, kK),
                    regime_error);
    CHECK_NOTHROW(resistance_for_frequency(1.0e9, kAl, kDesign, kK, true));
  }
}

TEST_CASE("core model invariants") {
  SECTION("round trip over [1k, 20k] within 1e-9") {
    for (int i = 0; i <= 200; ++i) {
      const double r = 1000.0 + i * (19000.0 / 200.0);
      const double f = frequency_from_resistance(r, kAl, kDesign, kK);
      CHECK(resistance_for_frequency(f, kAl, kDesign, kK) ==
            Approx(r).epsilon(1e-9));
    }
  }
  SECTION("two algebraic E_J routes agree to 1e-12") {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
      const double r = rng.uniform(1000.0, 20000.0);
      const double route1 = josephson_energy(critical_current(r, kAl, kK), kK);
      const double route2 = (kAl.gap_delta / 2.0) *
                            (kK.planck_h / (4.0 * kK.electron_charge *
                                            kK.electron_charge)) /
                            r;
      CHECK(route1 == Approx(route2).epsilon(1e-12));
    }
  }
  SECTION("finite-difference derivative matches analytic at 5 kOhm") {
    const double r = 5000.0;
    const double step = r * 1e-5;
    const double fd = (frequency_from_resistance(r + step, kAl, kDesign, kK) -
                       frequency_from_resistance(r - step, kAl, kDesign, kK)) /
                      (2.0 * step);
    const double e_j = josephson_energy(critical_current(r, kAl, kK), kK);
    const double analytic =
        -0.5 * std::sqrt(8.0 * e_j * r * kDesign.charging_energy) *
        std::pow(r, -1.5) / kK.planck_h;
    CHECK(fd == Approx(analytic).epsilon(1e-6));
  }
}

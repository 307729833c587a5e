#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "jjtune/errors.hpp"

namespace jjtune {

/// Fundamental constants, SI units. Defaults are the 2019 exact SI values,
/// fixed here (not read from the environment) so results are reproducible
/// across builds.
struct PhysicalConstants {
  double electron_charge = 1.602176634e-19;                   // e [C]
  double planck_h = 6.62607015e-34;                           // h [J s]
  double planck_hbar = 6.62607015e-34 / (2.0 * std::numbers::pi); // hbar [J s]

  void validate() const {
    if (!(electron_charge > 0.0) || !(planck_h > 0.0) || !(planck_hbar > 0.0))
      throw validation_error("PhysicalConstants: all values must be positive");
    const double expected = planck_h / (2.0 * std::numbers::pi);
    if (std::abs(planck_hbar - expected) > 1e-12 * expected)
      throw validation_error("PhysicalConstants: hbar must equal h / 2pi");
  }

  static PhysicalConstants si() { return PhysicalConstants{}; }
};

/// Superconducting film parameters.
struct MaterialParams {
  double gap_delta = 170e-6 * 1.602176634e-19; // Delta [J]; default 170 ueV (thin-film Al)

  void validate() const {
    if (!(gap_delta > 0.0))
      throw validation_error("MaterialParams: gap_delta must be positive");
  }

  static MaterialParams from_gap_ev(double gap_ev) {
    MaterialParams m;
    m.gap_delta = gap_ev * 1.602176634e-19;
    return m;
  }
};

/// Transmon design values. charging_energy and anharmonicity are derived from
/// the shunt capacitance: E_C = e^2 / 2C, alpha = -E_C / h.
struct QubitDesign {
  double capacitance;     // C [F]
  double charging_energy; // E_C [J]
  double anharmonicity;   // alpha [Hz]

  static QubitDesign from_capacitance(double c_farad,
                                      const PhysicalConstants& k = {}) {
    if (!(c_farad > 0.0))
      throw validation_error("QubitDesign: capacitance must be positive");
    QubitDesign d;
    d.capacitance = c_farad;
    d.charging_energy =
        k.electron_charge * k.electron_charge / (2.0 * c_farad);
    d.anharmonicity = -d.charging_energy / k.planck_h;
    return d;
  }

  /// Build from E_C/h in hertz (the number usually quoted for a design).
  static QubitDesign from_charging_energy_hz(double ec_hz,
                                             const PhysicalConstants& k = {}) {
    if (!(ec_hz > 0.0))
      throw validation_error("QubitDesign: E_C/h must be positive");
    const double ec = ec_hz * k.planck_h;
    return from_capacitance(k.electron_charge * k.electron_charge / (2.0 * ec),
                            k);
  }

  /// Default design: E_C/h = 200 MHz, giving alpha = -200 MHz.
  static QubitDesign standard(const PhysicalConstants& k = {}) {
    return from_charging_energy_hz(200e6, k);
  }

  void validate(const PhysicalConstants& k = {}) const {
    if (!(capacitance > 0.0))
      throw validation_error("QubitDesign: capacitance must be positive");
    const double ec = k.electron_charge * k.electron_charge / (2.0 * capacitance);
    if (std::abs(charging_energy - ec) > 1e-12 * ec)
      throw validation_error("QubitDesign: charging_energy != e^2/2C");
    const double alpha = -charging_energy / k.planck_h;
    if (std::abs(anharmonicity - alpha) > 1e-12 * std::abs(alpha))
      throw validation_error("QubitDesign: anharmonicity != -E_C/h");
  }
};

/// Bundle passed around by the modules that convert resistances to
/// frequencies.
struct PhysicsConfig {
  PhysicalConstants constants{};
  MaterialParams material{};
  QubitDesign design = QubitDesign::standard();
};

} // namespace jjtune

#pragma once

#include <cmath>
#include <stdexcept>

#include "jjtune/constants.hpp"
#include "jjtune/errors.hpp"

namespace jjtune {

/// The f01 formula is an expansion valid for E_J >> E_C; below this ratio the
/// closed form is refused unless the caller overrides.
inline constexpr double kTransmonRegimeMinRatio = 20.0;

/// Ambegaokar-Baratoff: I_c = pi * Delta / (2 e R_n). Strictly decreasing in
/// R_n.
inline double critical_current(double r_n_ohm, const MaterialParams& m,
                               const PhysicalConstants& k = {}) {
  if (!(r_n_ohm > 0.0))
    throw std::domain_error("critical_current: R_n must be positive");
  if (!(m.gap_delta > 0.0))
    throw std::domain_error("critical_current: gap_delta must be positive");
  return std::numbers::pi * m.gap_delta / (2.0 * k.electron_charge * r_n_ohm);
}

/// E_J = hbar * I_c / (2 e).
inline double josephson_energy(double i_c_ampere,
                               const PhysicalConstants& k = {}) {
  if (i_c_ampere < 0.0)
    throw std::domain_error("josephson_energy: I_c must be non-negative");
  return k.planck_hbar * i_c_ampere / (2.0 * k.electron_charge);
}

/// f01 = (sqrt(8 E_J E_C) - E_C) / h. Guarded to the transmon regime
/// E_J/E_C >= 20 unless allow_regime_violation is set.
inline double qubit_frequency(double e_j_joule, double e_c_joule,
                              const PhysicalConstants& k = {},
                              bool allow_regime_violation = false) {
  if (!(e_c_joule > 0.0))
    throw std::domain_error("qubit_frequency: E_C must be positive");
  if (e_j_joule < 0.0)
    throw std::domain_error("qubit_frequency: E_J must be non-negative");
  if (!allow_regime_violation &&
      e_j_joule < kTransmonRegimeMinRatio * e_c_joule)
    throw regime_error("qubit_frequency: E_J/E_C below transmon regime");
  return (std::sqrt(8.0 * e_j_joule * e_c_joule) - e_c_joule) / k.planck_h;
}

/// Composition of the three maps above; strictly decreasing in R_n.
inline double frequency_from_resistance(double r_n_ohm,
                                        const MaterialParams& m,
                                        const QubitDesign& d,
                                        const PhysicalConstants& k = {},
                                        bool allow_regime_violation = false) {
  const double i_c = critical_current(r_n_ohm, m, k);
  return qubit_frequency(josephson_energy(i_c, k), d.charging_energy, k,
                         allow_regime_violation);
}

inline double frequency_from_resistance(double r_n_ohm,
                                        const PhysicsConfig& p,
                                        bool allow_regime_violation = false) {
  return frequency_from_resistance(r_n_ohm, p.material, p.design, p.constants,
                                   allow_regime_violation);
}

/// Analytic inverse of frequency_from_resistance:
///   R_n = h * Delta * E_C / (e^2 * (h f + E_C)^2).
/// Rejects targets at or above the pair-breaking frequency 2*Delta/h, and
/// targets whose inverse falls outside the transmon regime (overridable).
inline double resistance_for_frequency(double f_target_hz,
                                       const MaterialParams& m,
                                       const QubitDesign& d,
                                       const PhysicalConstants& k = {},
                                       bool allow_regime_violation = false) {
  if (!(f_target_hz > 0.0))
    throw std::domain_error("resistance_for_frequency: target must be positive");
  const double f_gap_limit = 2.0 * m.gap_delta / k.planck_h;
  if (f_target_hz >= f_gap_limit)
    throw std::domain_error(
        "resistance_for_frequency: target above the gap-limited maximum 2*Delta/h");
  const double e_c = d.charging_energy;
  const double hf_plus_ec = k.planck_h * f_target_hz + e_c;
  const double e_j_needed = hf_plus_ec * hf_plus_ec / (8.0 * e_c);
  if (!allow_regime_violation && e_j_needed < kTransmonRegimeMinRatio * e_c)
    throw regime_error(
        "resistance_for_frequency: inverse lies below the transmon regime");
  return k.planck_h * m.gap_delta /
         (8.0 * k.electron_charge * k.electron_charge * e_j_needed);
}

inline double resistance_for_frequency(double f_target_hz,
                                       const PhysicsConfig& p,
                                       bool allow_regime_violation = false) {
  return resistance_for_frequency(f_target_hz, p.material, p.design,
                                  p.constants, allow_regime_violation);
}

} // namespace jjtune

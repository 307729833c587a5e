#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jjtune/errors.hpp"

namespace jjtune {

/// Fraction of the saturation shift invert_dose treats as reachable; closer
/// to saturation the required shot count diverges.
inline constexpr double kHeadroomFrac = 0.95;

/// Proximity kernel family. The measured decay shape versus distance is not
/// tabulated, so the family is configurable; Gaussian is the default.
enum class ProximityKernel { Gaussian, Exponential };

/// Phenomenological e-beam dose response. The resistance shift of an exposed
/// junction saturates with shot count and falls off with beam distance:
///   dR(n, D) = g(D) * dR_sat * (1 - exp(-n / n0)),   g(D) = exp(-D^2 / 2 s^2)
/// Every junction additionally ages by ageing_per_round_ohm per campaign
/// round, exposed or not.
struct DoseResponseModel {
  double delta_r_sat_ohm = 250.0; // saturation shift at D = 0
  double shots_scale = 4.0;       // n0, exponential dose constant
  double proximity_sigma_um = 13.0;
  ProximityKernel kernel = ProximityKernel::Gaussian;
  double ageing_per_round_ohm = 15.0;
  double noise_rel_std = 0.15;    // lognormal scatter on applied shifts (simulator)

  void validate() const {
    if (delta_r_sat_ohm < 0.0)
      throw validation_error("dose model: delta_r_sat_ohm must be >= 0");
    if (!(shots_scale > 0.0))
      throw validation_error("dose model: shots_scale must be positive");
    if (!(proximity_sigma_um > 0.0))
      throw validation_error("dose model: proximity_sigma_um must be positive");
    if (ageing_per_round_ohm < 0.0)
      throw validation_error("dose model: ageing_per_round_ohm must be >= 0");
    if (noise_rel_std < 0.0)
      throw validation_error("dose model: noise_rel_std must be >= 0");
  }
};

/// Square exposure area placed at signed distance D from the junction center
/// (0 = centered; the response is even in D).
struct BeamPlacement {
  double distance_um = 0.0;
  double area_um = 15.0;
};

/// Proximity factor g(D) in [0, 1]; g(0) = 1, even, decreasing in |D|. The
/// default Gaussian sigma keeps g(40 um) < 1 %, so junctions at the qubit
/// pitch are untouched.
inline double proximity_factor(const BeamPlacement& d,
                               const DoseResponseModel& m) {
  const double s = m.proximity_sigma_um;
  if (m.kernel == ProximityKernel::Exponential)
    return std::exp(-std::abs(d.distance_um) / s);
  return std::exp(-d.distance_um * d.distance_um / (2.0 * s * s));
}

/// Resistance shift after `shots` pulses at placement `d`.
inline double delta_r(long shots, const BeamPlacement& d,
                      const DoseResponseModel& m) {
  if (shots < 0) throw std::domain_error("delta_r: shots must be >= 0");
  const double exposure =
      1.0 - std::exp(-static_cast<double>(shots) / m.shots_scale);
  return proximity_factor(d, m) * m.delta_r_sat_ohm * exposure;
}

inline double delta_r(long shots, const DoseResponseModel& m) {
  return delta_r(shots, BeamPlacement{}, m);
}

/// Shot count that reaches headroom_frac of the saturation shift.
inline long saturation_shots(const DoseResponseModel& m,
                             double headroom_frac = kHeadroomFrac) {
  return static_cast<long>(
      std::ceil(-m.shots_scale * std::log1p(-headroom_frac) - 1e-12));
}

/// Smallest shot count with delta_r(shots) >= target_shift, or nullopt when
/// the target exceeds headroom_frac of the reachable saturation shift.
inline std::optional<long> invert_dose(double target_shift_ohm,
                                       const BeamPlacement& d,
                                       const DoseResponseModel& m,
                                       double headroom_frac = kHeadroomFrac) {
  if (target_shift_ohm < 0.0)
    throw std::domain_error("invert_dose: target must be >= 0");
  if (target_shift_ohm == 0.0) return 0;
  const double ceiling = proximity_factor(d, m) * m.delta_r_sat_ohm;
  if (ceiling <= 0.0 || target_shift_ohm > headroom_frac * ceiling)
    return std::nullopt;
  const double exact =
      -m.shots_scale * std::log1p(-target_shift_ohm / ceiling);
  long shots = static_cast<long>(std::ceil(exact - 1e-12));
  while (delta_r(shots, d, m) < target_shift_ohm) ++shots; // fp safety
  return shots;
}

inline std::optional<long> invert_dose(double target_shift_ohm,
                                       const DoseResponseModel& m,
                                       double headroom_frac = kHeadroomFrac) {
  return invert_dose(target_shift_ohm, BeamPlacement{}, m, headroom_frac);
}

/// Ambient drift over `rounds` campaign rounds, applied to every junction.
inline double ambient_ageing(int rounds, const DoseResponseModel& m) {
  if (rounds < 0) throw std::domain_error("ambient_ageing: rounds must be >= 0");
  return static_cast<double>(rounds) * m.ageing_per_round_ohm;
}

// --- dose-response fit ----------------------------------------------------

struct DoseFitResult {
  DoseResponseModel model;  // delta_r_sat_ohm and shots_scale fitted
  double offset_ohm = 0.0;  // constant ageing offset absorbed by the fit
  double residual_norm = 0.0;
};

namespace detail {

/// For fixed n0, the model y = a + B(1 - e^{-n/n0}) is linear in (a, B);
/// solve the 2x2 normal equations and return the residual sum of squares.
struct LinearFit {
  double offset = 0.0, amplitude = 0.0, rss = 0.0;
};

inline LinearFit dose_fit_at(double n0,
                             std::span<const std::pair<long, double>> samples) {
  double s1 = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
  for (const auto& [n, y] : samples) {
    const double x = 1.0 - std::exp(-static_cast<double>(n) / n0);
    s1 += 1.0;
    sx += x;
    sxx += x * x;
    sy += y;
    sxy += x * y;
  }
  const double det = s1 * sxx - sx * sx;
  LinearFit f;
  if (std::abs(det) < 1e-300) {
    f.rss = std::numeric_limits<double>::infinity();
    return f;
  }
  f.offset = (sxx * sy - sx * sxy) / det;
  f.amplitude = (s1 * sxy - sx * sy) / det;
  f.rss = 0.0;
  for (const auto& [n, y] : samples) {
    const double x = 1.0 - std::exp(-static_cast<double>(n) / n0);
    const double r = y - f.offset - f.amplitude * x;
    f.rss += r * r;
  }
  return f;
}

} // namespace detail

/// Least-squares fit of (dR_sat, n0) plus a constant ageing offset to
/// mean-shift samples, via a log-spaced scan over n0 followed by
/// golden-section refinement (the two linear parameters are projected out at
/// each n0).
inline DoseFitResult fit_dose_response(
    std::span<const std::pair<long, double>> samples) {
  std::vector<long> distinct;
  for (const auto& [n, y] : samples) {
    (void)y;
    if (std::find(distinct.begin(), distinct.end(), n) == distinct.end())
      distinct.push_back(n);
  }
  if (distinct.size() < 3)
    throw fit_error("dose fit needs at least 3 distinct shot counts");
  const double y0 = samples.front().second;
  bool all_equal = true;
  for (const auto& [n, y] : samples)
    if (y != y0) { all_equal = false; break; }
  if (all_equal) throw fit_error("dose fit: all shifts equal (degenerate)");

  const long n_max = *std::max_element(distinct.begin(), distinct.end());
  const double lo = std::max(1e-3, 1e-3 * static_cast<double>(n_max));
  const double hi = 100.0 * static_cast<double>(std::max<long>(n_max, 1));

  // coarse scan
  double best_n0 = lo, best_rss = std::numeric_limits<double>::infinity();
  const int steps = 256;
  for (int i = 0; i <= steps; ++i) {
    const double n0 = lo * std::pow(hi / lo, static_cast<double>(i) / steps);
    const double rss = detail::dose_fit_at(n0, samples).rss;
    if (rss < best_rss) {
      best_rss = rss;
      best_n0 = n0;
    }
  }

  // golden-section refinement around the best coarse point
  const double ratio = std::pow(hi / lo, 1.0 / steps);
  double a = best_n0 / ratio, b = best_n0 * ratio;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = detail::dose_fit_at(c, samples).rss;
  double fd = detail::dose_fit_at(d, samples).rss;
  for (int it = 0; it < 200 && (b - a) > 1e-12 * b; ++it) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - gr * (b - a);
      fc = detail::dose_fit_at(c, samples).rss;
    } else {
      a = c; c = d; fc = fd;
      d = a + gr * (b - a);
      fd = detail::dose_fit_at(d, samples).rss;
    }
  }
  const double n0 = 0.5 * (a + b);
  const detail::LinearFit lin = detail::dose_fit_at(n0, samples);
  if (!(lin.amplitude > 0.0))
    throw fit_error("dose fit: response does not increase with dose");

  DoseFitResult out;
  out.model.delta_r_sat_ohm = lin.amplitude;
  out.model.shots_scale = n0;
  out.offset_ohm = lin.offset;
  out.residual_norm = std::sqrt(lin.rss);
  return out;
}

// --- JSON -------------------------------------------------------------

inline nlohmann::json to_json(const DoseResponseModel& m) {
  return {{"schema_version", 1},
          {"delta_r_sat_ohm", m.delta_r_sat_ohm},
          {"shots_scale", m.shots_scale},
          {"proximity_sigma_um", m.proximity_sigma_um},
          {"proximity_kernel",
           m.kernel == ProximityKernel::Exponential ? "exponential" : "gaussian"},
          {"ageing_per_round_ohm", m.ageing_per_round_ohm},
          {"noise_rel_std", m.noise_rel_std}};
}

inline DoseResponseModel dose_model_from_json(const nlohmann::json& j) {
  DoseResponseModel m;
  m.delta_r_sat_ohm = j.value("delta_r_sat_ohm", m.delta_r_sat_ohm);
  m.shots_scale = j.value("shots_scale", m.shots_scale);
  m.proximity_sigma_um = j.value("proximity_sigma_um", m.proximity_sigma_um);
  if (j.contains("proximity_kernel")) {
    const std::string kernel = j.at("proximity_kernel").get<std::string>();
    if (kernel == "gaussian") m.kernel = ProximityKernel::Gaussian;
    else if (kernel == "exponential") m.kernel = ProximityKernel::Exponential;
    else throw validation_error("dose model: unknown proximity_kernel " + kernel);
  }
  m.ageing_per_round_ohm = j.value("ageing_per_round_ohm", m.ageing_per_round_ohm);
  m.noise_rel_std = j.value("noise_rel_std", m.noise_rel_std);
  m.validate();
  return m;
}

} // namespace jjtune

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "oilsense/dielectric.hpp"

namespace oilsense {

// Board dimensions carried as metadata; the surrogate never derives
// electrical behaviour from them.
struct ResonatorGeometry {
  double a_mm = 110.0;
  double b_mm = 70.0;
  double c_mm = 18.35;
  double d_mm = 1.9;
  double e_mm = 38.1;
  double f_mm = 7.8;
  double g_mm = 15.7;
  double h_mm = 30.0;
  double i_mm = 0.5;
  double j_mm = 33.8;
  double k_mm = 23.0;
  double l_mm = 35.7;
  double substrate_thickness_mm = 1.6;
  double copper_thickness_mm = 0.035;

  void validate() const;  // all dimensions > 0
};

// One notch of the two-mode response.
struct ModeModel {
  double f0_hz = 0.0;      // unloaded resonance
  double q0 = 0.0;         // unloaded quality factor
  double depth0_db = 0.0;  // unloaded dip depth (positive, drawn downward)
  double kappa0 = 0.0;     // filling factor at contact, in (0,1)
  double delta_mm = 0.0;   // field decay length

  void validate() const;
};

struct ResonatorModel {
  ResonatorGeometry geometry;
  std::array<ModeModel, 2> modes{};
  // Frequency grids handed to s21_response must stay inside this band.
  double band_min_hz = 1.0e9;
  double band_max_hz = 4.0e9;

  void validate() const;  // per-mode validation + modes[0].f0 < modes[1].f0
};

ResonatorModel default_resonator();

struct TracePoint {
  double frequency_hz = 0.0;
  double s21_db = 0.0;
};

using Trace = std::vector<TracePoint>;

// kappa(z) = kappa0 * exp(-z/delta); throws ConfigError for negative z.
double effective_coupling(const ModeModel& mode, double z_mm);

struct LoadedResonance {
  double f_res_hz = 0.0;
  double q_loaded = 0.0;
};

// Solves the perturbation fixed point f = f0 / sqrt(1 + kappa*(eps'(f) - 1))
// by damped iteration (start f0, stop |df| < 1 kHz, cap 100 iterations) and
// degrades Q as 1/qL = 1/q0 + kappa * tan_delta(f_res).
// Throws NumericError if the iteration fails to settle.
LoadedResonance loaded_resonance(const ModeModel& mode,
                                 const MaterialModel& material, double z_mm);

// Two-notch transmission magnitude on the given grid:
//   S21_dB(f) = sum_m -D_m / (1 + 4 qL_m^2 ((f - f_m)/f_m)^2) + N(0, sigma)
// with D_m = depth0_db * qL_m / q0_m.  Noise is deterministic per seed.
// Throws ConfigError for an empty / non-increasing / out-of-band grid.
Trace s21_response(const ResonatorModel& resonator,
                   const MaterialModel& material, double z_mm,
                   const std::vector<double>& f_grid_hz, double noise_sigma_db,
                   std::uint64_t seed);

}  // namespace oilsense

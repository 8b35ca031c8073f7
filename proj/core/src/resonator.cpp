#include "oilsense/resonator.hpp"

#include <cmath>
#include <string>

#include "oilsense/common.hpp"
#include "oilsense/rng.hpp"

namespace oilsense {

void ResonatorGeometry::validate() const {
  const double dims[] = {a_mm, b_mm, c_mm, d_mm, e_mm, f_mm, g_mm,
                         h_mm, i_mm, j_mm, k_mm, l_mm,
                         substrate_thickness_mm, copper_thickness_mm};
  for (double v : dims) {
    if (!(v > 0.0))
      throw ConfigError("resonator geometry dimensions must be positive");
  }
}

void ModeModel::validate() const {
  if (!(f0_hz > 0.0)) throw ConfigError("mode f0 must be positive");
  if (!(q0 > 1.0)) throw ConfigError("mode q0 must be > 1");
  if (!(depth0_db > 0.0)) throw ConfigError("mode depth0_db must be positive");
  if (!(kappa0 > 0.0 && kappa0 < 1.0))
    throw ConfigError("mode kappa0 must lie in (0, 1)");
  if (!(delta_mm > 0.0)) throw ConfigError("mode delta_mm must be positive");
}

void ResonatorModel::validate() const {
  geometry.validate();
  for (const auto& mode : modes) mode.validate();
  if (!(modes[0].f0_hz < modes[1].f0_hz))
    throw ConfigError("resonator modes must be ordered by f0");
  if (!(band_min_hz > 0.0 && band_max_hz > band_min_hz))
    throw ConfigError("resonator band limits are invalid");
}

ResonatorModel default_resonator() {
  ResonatorModel r;
  r.modes[0] = {1.45e9, 8.0, 30.0, 0.40, 5.0};
  r.modes[1] = {2.80e9, 10.0, 25.0, 0.35, 4.2};
  return r;
}

double effective_coupling(const ModeModel& mode, double z_mm) {
  if (z_mm < 0.0) throw ConfigError("standoff distance must be >= 0");
  return mode.kappa0 * std::exp(-z_mm / mode.delta_mm);
}

LoadedResonance loaded_resonance(const ModeModel& mode,
                                 const MaterialModel& material, double z_mm) {
  double kappa = effective_coupling(mode, z_mm);
  double f = mode.f0_hz;
  bool converged = false;
  for (int i = 0; i < 100; ++i) {
    double eps_real = permittivity_at(material, f).eps_real;
    double next = mode.f0_hz / std::sqrt(1.0 + kappa * (eps_real - 1.0));
    double step = std::fabs(next - f);
    f = next;
    if (step < 1e3) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericError("loaded resonance fixed point did not settle for '" +
                       material.name + "'");
  double tan_delta = permittivity_at(material, f).loss_tangent();
  double q = 1.0 / (1.0 / mode.q0 + kappa * tan_delta);
  return {f, q};
}

Trace s21_response(const ResonatorModel& resonator,
                   const MaterialModel& material, double z_mm,
                   const std::vector<double>& f_grid_hz, double noise_sigma_db,
                   std::uint64_t seed) {
  if (f_grid_hz.empty()) throw ConfigError("frequency grid is empty");
  for (std::size_t i = 0; i < f_grid_hz.size(); ++i) {
    double f = f_grid_hz[i];
    if (f < resonator.band_min_hz || f > resonator.band_max_hz)
      throw ConfigError("frequency grid leaves the resonator band");
    if (i > 0 && !(f > f_grid_hz[i - 1]))
      throw ConfigError("frequency grid must be strictly increasing");
  }

  double f_res[2];
  double q_loaded[2];
  double depth[2];
  for (int m = 0; m < 2; ++m) {
    const ModeModel& mode = resonator.modes[m];
    LoadedResonance lr = loaded_resonance(mode, material, z_mm);
    f_res[m] = lr.f_res_hz;
    q_loaded[m] = lr.q_loaded;
    depth[m] = mode.depth0_db * lr.q_loaded / mode.q0;
  }

  Trace trace(f_grid_hz.size());
  for (std::size_t i = 0; i < f_grid_hz.size(); ++i) {
    double f = f_grid_hz[i];
    double s = 0.0;
    for (int m = 0; m < 2; ++m) {
      double x = (f - f_res[m]) / f_res[m];
      s -= depth[m] / (1.0 + 4.0 * q_loaded[m] * q_loaded[m] * x * x);
    }
    trace[i] = {f, s};
  }
  if (noise_sigma_db > 0.0) {
    Rng rng(seed);
    for (auto& point : trace) point.s21_db += rng.gaussian(noise_sigma_db);
  }
  return trace;
}

}  // namespace oilsense

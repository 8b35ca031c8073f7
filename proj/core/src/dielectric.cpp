#include "oilsense/dielectric.hpp"

#include <cmath>
#include <numbers>

#include "oilsense/common.hpp"

namespace oilsense {

void MaterialModel::validate() const {
  if (name.empty()) throw ConfigError("material has an empty name");
  if (eps_inf < 1.0)
    throw ConfigError("material '" + name + "': eps_inf must be >= 1");
  if (eps_static < eps_inf)
    throw ConfigError("material '" + name +
                      "': eps_static must be >= eps_inf");
  if (!(tau > 0.0))
    throw ConfigError("material '" + name + "': tau must be positive");
  if (sigma_dc < 0.0)
    throw ConfigError("material '" + name + "': sigma_dc must be >= 0");
}

ComplexPermittivity permittivity_at(const MaterialModel& model,
                                    double frequency_hz) {
  if (!(frequency_hz > 0.0))
    throw ConfigError("permittivity requested at non-positive frequency");
  double wt = 2.0 * std::numbers::pi * frequency_hz * model.tau;
  double denom = 1.0 + wt * wt;
  double delta = model.eps_static - model.eps_inf;
  ComplexPermittivity eps;
  eps.eps_real = model.eps_inf + delta / denom;
  eps.eps_imag = delta * wt / denom;
  if (model.sigma_dc > 0.0) {
    eps.eps_imag += model.sigma_dc /
                    (2.0 * std::numbers::pi * frequency_hz *
                     vacuum_permittivity);
  }
  return eps;
}

std::vector<MaterialModel> default_material_library() {
  // Alphabetical; eps_static ascends while tau descends across the
  // permittivity ladder so the two modes see distinct orderings.
  return {
      {"coconut", 2.82, 2.40, 55e-12, 0.0},
      {"olive", 3.18, 2.54, 28e-12, 0.0},
      {"peanut", 3.00, 2.47, 40e-12, 0.0},
      {"soybean", 3.36, 2.62, 18e-12, 0.0},
  };
}

MaterialModel air() { return {"air", 1.0, 1.0, 1e-12, 0.0}; }

}  // namespace oilsense

#pragma once

#include <string>
#include <vector>

namespace oilsense {

inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m

// Single-pole Debye description of one oil.
struct MaterialModel {
  std::string name;
  double eps_static = 1.0;  // relative permittivity at DC
  double eps_inf = 1.0;     // relative permittivity at optical frequencies
  double tau = 1e-12;       // relaxation time, seconds
  double sigma_dc = 0.0;    // DC conductivity, S/m

  // Throws ConfigError if eps_static < eps_inf, eps_inf < 1, tau <= 0 or
  // sigma_dc < 0.
  void validate() const;
};

struct ComplexPermittivity {
  double eps_real = 1.0;
  double eps_imag = 0.0;  // loss convention: positive

  double loss_tangent() const { return eps_imag / eps_real; }
};

// Debye dispersion:
//   eps'(f)  = eps_inf + (eps_static - eps_inf) / (1 + (2*pi*f*tau)^2)
//   eps''(f) = (eps_static - eps_inf) * (2*pi*f*tau) / (1 + (2*pi*f*tau)^2)
//            + sigma_dc / (2*pi*f*eps0)
// Throws ConfigError for non-positive frequency.
ComplexPermittivity permittivity_at(const MaterialModel& model,
                                    double frequency_hz);

// The four default oils, alphabetical by name (stable label order).
std::vector<MaterialModel> default_material_library();

// Lossless unity-permittivity load (empty sensor).
MaterialModel air();

}  // namespace oilsense

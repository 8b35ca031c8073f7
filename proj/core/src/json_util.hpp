#pragma once

#include <initializer_list>
#include <string>

#include "json.hpp"

// Strict-parse helpers shared by the config loader and the manifest readers.
// E picks the error class (ConfigError for user configs, SchemaError for
// artifacts).

namespace oilsense::detail {

using nlohmann::json;

template <class E>
void check_keys(const json& j, const std::string& ctx,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw E(ctx + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) throw E(ctx + ": unknown key '" + it.key() + "'");
  }
}

template <class E>
double get_num(const json& j, const std::string& ctx) {
  if (!j.is_number()) throw E(ctx + ": expected a number");
  return j.get<double>();
}

template <class E>
std::uint64_t get_u64(const json& j, const std::string& ctx) {
  if (!j.is_number_unsigned() && !j.is_number_integer())
    throw E(ctx + ": expected an unsigned integer");
  if (j.is_number_integer() && j.get<std::int64_t>() < 0)
    throw E(ctx + ": expected an unsigned integer");
  return j.get<std::uint64_t>();
}

template <class E>
long long get_int(const json& j, const std::string& ctx) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    throw E(ctx + ": expected an integer");
  return j.get<long long>();
}

template <class E>
bool get_bool(const json& j, const std::string& ctx) {
  if (!j.is_boolean()) throw E(ctx + ": expected a boolean");
  return j.get<bool>();
}

template <class E>
std::string get_str(const json& j, const std::string& ctx) {
  if (!j.is_string()) throw E(ctx + ": expected a string");
  return j.get<std::string>();
}

template <class E>
json parse_json(const std::string& text, const std::string& ctx) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw E(ctx + ": malformed JSON");
  return j;
}

}  // namespace oilsense::detail

#include "oilsense/dielectric.hpp"
#include "oilsense/resonator.hpp"

namespace oilsense::detail {

inline json material_to_json(const MaterialModel& m) {
  json j;
  j["name"] = m.name;
  j["eps_static"] = m.eps_static;
  j["eps_inf"] = m.eps_inf;
  j["tau_s"] = m.tau;
  j["sigma_dc"] = m.sigma_dc;
  return j;
}

template <class E>
MaterialModel material_from_json(const json& j, const std::string& ctx) {
  check_keys<E>(j, ctx, {"name", "eps_static", "eps_inf", "tau_s",
                         "sigma_dc"});
  MaterialModel m;
  if (!j.contains("name")) throw E(ctx + ": material needs a name");
  m.name = get_str<E>(j.at("name"), ctx + ".name");
  if (j.contains("eps_static"))
    m.eps_static = get_num<E>(j.at("eps_static"), ctx);
  if (j.contains("eps_inf")) m.eps_inf = get_num<E>(j.at("eps_inf"), ctx);
  if (j.contains("tau_s")) m.tau = get_num<E>(j.at("tau_s"), ctx);
  if (j.contains("sigma_dc")) m.sigma_dc = get_num<E>(j.at("sigma_dc"), ctx);
  return m;
}

inline json geometry_to_json(const ResonatorGeometry& g) {
  json j;
  j["a_mm"] = g.a_mm;
  j["b_mm"] = g.b_mm;
  j["c_mm"] = g.c_mm;
  j["d_mm"] = g.d_mm;
  j["e_mm"] = g.e_mm;
  j["f_mm"] = g.f_mm;
  j["g_mm"] = g.g_mm;
  j["h_mm"] = g.h_mm;
  j["i_mm"] = g.i_mm;
  j["j_mm"] = g.j_mm;
  j["k_mm"] = g.k_mm;
  j["l_mm"] = g.l_mm;
  j["substrate_thickness_mm"] = g.substrate_thickness_mm;
  j["copper_thickness_mm"] = g.copper_thickness_mm;
  return j;
}

template <class E>
ResonatorGeometry geometry_from_json(const json& j, const std::string& ctx) {
  check_keys<E>(j, ctx,
                {"a_mm", "b_mm", "c_mm", "d_mm", "e_mm", "f_mm", "g_mm",
                 "h_mm", "i_mm", "j_mm", "k_mm", "l_mm",
                 "substrate_thickness_mm", "copper_thickness_mm"});
  ResonatorGeometry g;
  auto field = [&](const char* key, double& slot) {
    if (j.contains(key)) slot = get_num<E>(j.at(key), ctx);
  };
  field("a_mm", g.a_mm);
  field("b_mm", g.b_mm);
  field("c_mm", g.c_mm);
  field("d_mm", g.d_mm);
  field("e_mm", g.e_mm);
  field("f_mm", g.f_mm);
  field("g_mm", g.g_mm);
  field("h_mm", g.h_mm);
  field("i_mm", g.i_mm);
  field("j_mm", g.j_mm);
  field("k_mm", g.k_mm);
  field("l_mm", g.l_mm);
  field("substrate_thickness_mm", g.substrate_thickness_mm);
  field("copper_thickness_mm", g.copper_thickness_mm);
  return g;
}

inline json mode_to_json(const ModeModel& m) {
  json j;
  j["f0_hz"] = m.f0_hz;
  j["q0"] = m.q0;
  j["depth0_db"] = m.depth0_db;
  j["kappa0"] = m.kappa0;
  j["delta_mm"] = m.delta_mm;
  return j;
}

template <class E>
ModeModel mode_from_json(const json& j, const std::string& ctx) {
  check_keys<E>(j, ctx, {"f0_hz", "q0", "depth0_db", "kappa0", "delta_mm"});
  ModeModel m;
  auto field = [&](const char* key, double& slot) {
    if (j.contains(key)) slot = get_num<E>(j.at(key), ctx);
  };
  field("f0_hz", m.f0_hz);
  field("q0", m.q0);
  field("depth0_db", m.depth0_db);
  field("kappa0", m.kappa0);
  field("delta_mm", m.delta_mm);
  return m;
}

inline json resonator_to_json(const ResonatorModel& r) {
  json j;
  j["band_min_hz"] = r.band_min_hz;
  j["band_max_hz"] = r.band_max_hz;
  j["geometry"] = geometry_to_json(r.geometry);
  j["modes"] =
      json::array({mode_to_json(r.modes[0]), mode_to_json(r.modes[1])});
  return j;
}

template <class E>
ResonatorModel resonator_from_json(const json& j, const std::string& ctx) {
  check_keys<E>(j, ctx, {"band_min_hz", "band_max_hz", "geometry", "modes"});
  ResonatorModel r;
  if (j.contains("band_min_hz"))
    r.band_min_hz = get_num<E>(j.at("band_min_hz"), ctx);
  if (j.contains("band_max_hz"))
    r.band_max_hz = get_num<E>(j.at("band_max_hz"), ctx);
  if (j.contains("geometry"))
    r.geometry = geometry_from_json<E>(j.at("geometry"), ctx + ".geometry");
  if (j.contains("modes")) {
    const json& modes = j.at("modes");
    if (!modes.is_array() || modes.size() != 2)
      throw E(ctx + ".modes: expected exactly two modes");
    r.modes[0] = mode_from_json<E>(modes[0], ctx + ".modes[0]");
    r.modes[1] = mode_from_json<E>(modes[1], ctx + ".modes[1]");
  }
  return r;
}

}  // namespace oilsense::detail

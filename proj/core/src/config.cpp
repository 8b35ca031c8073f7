#include "oilsense/config.hpp"

#include <algorithm>

#include "json_util.hpp"
#include "oilsense/csvio.hpp"
#include "oilsense/dataset.hpp"
#include "oilsense/rng.hpp"

namespace oilsense {

using detail::check_keys;
using detail::get_bool;
using detail::get_int;
using detail::get_num;
using detail::get_str;
using detail::get_u64;
using detail::json;

std::vector<double> GridConfig::materialize() const {
  if (kind == "geometric") return geometric_grid(min, max, count);
  if (kind == "uniform") return uniform_grid(min, max, count);
  throw ConfigError("grid kind must be 'geometric' or 'uniform', got '" +
                    kind + "'");
}

std::vector<MaterialModel> RunConfig::selected_materials() const {
  if (oils.empty()) return materials;
  for (const std::string& name : oils) {
    bool known = false;
    for (const auto& m : materials) {
      if (m.name == name) known = true;
    }
    if (!known) throw ConfigError("unknown oil '" + name + "' requested");
  }
  std::vector<MaterialModel> out;
  for (const auto& m : materials) {
    if (std::find(oils.begin(), oils.end(), m.name) != oils.end())
      out.push_back(m);
  }
  return out;
}

void RunConfig::validate() const {
  if (materials.empty()) throw ConfigError("config needs at least one material");
  for (const auto& m : materials) m.validate();
  for (std::size_t i = 0; i < materials.size(); ++i) {
    for (std::size_t j = i + 1; j < materials.size(); ++j) {
      if (materials[i].name == materials[j].name)
        throw ConfigError("duplicate material name '" + materials[i].name +
                          "'");
    }
  }
  resonator.validate();
  z_grid.materialize();
  f_grid.materialize();
  if (noise_sigma_db < 0.0)
    throw ConfigError("noise_sigma_db must be non-negative");
  if (feature_mode != "raw" && feature_mode != "resonance")
    throw ConfigError("feature_mode must be 'raw' or 'resonance', got '" +
                      feature_mode + "'");
  if (!(split.train_fraction > 0.0) || !(split.train_fraction < 1.0))
    throw ConfigError("split.train_fraction must be inside (0, 1)");
  selected_materials();
}

RunConfig default_config() {
  RunConfig c;
  c.materials = default_material_library();
  c.resonator = default_resonator();
  return c;
}

namespace {

GridConfig grid_from_json(const json& j, const std::string& ctx,
                          const GridConfig& defaults) {
  check_keys<ConfigError>(j, ctx, {"kind", "min", "max", "count"});
  GridConfig g = defaults;
  if (j.contains("kind")) g.kind = get_str<ConfigError>(j.at("kind"), ctx);
  if (j.contains("min")) g.min = get_num<ConfigError>(j.at("min"), ctx);
  if (j.contains("max")) g.max = get_num<ConfigError>(j.at("max"), ctx);
  if (j.contains("count"))
    g.count = static_cast<std::size_t>(get_u64<ConfigError>(j.at("count"),
                                                            ctx));
  return g;
}

json grid_to_json(const GridConfig& g) {
  json j;
  j["kind"] = g.kind;
  j["min"] = g.min;
  j["max"] = g.max;
  j["count"] = g.count;
  return j;
}

}  // namespace

RunConfig config_from_json_text(const std::string& text) {
  json j = detail::parse_json<ConfigError>(text, "config");
  check_keys<ConfigError>(
      j, "config",
      {"materials", "resonator", "z_grid", "f_grid", "noise_sigma_db",
       "feature_mode", "split", "logistic", "knn", "forest", "svm",
       "svm_subsample", "seed", "out_dir", "threads", "oils"});

  RunConfig c = default_config();
  if (j.contains("materials")) {
    const json& mats = j.at("materials");
    if (!mats.is_array())
      throw ConfigError("materials: expected an array");
    c.materials.clear();
    for (std::size_t i = 0; i < mats.size(); ++i) {
      c.materials.push_back(detail::material_from_json<ConfigError>(
          mats[i], "materials[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("resonator"))
    c.resonator =
        detail::resonator_from_json<ConfigError>(j.at("resonator"),
                                                 "resonator");
  if (j.contains("z_grid"))
    c.z_grid = grid_from_json(j.at("z_grid"), "z_grid", c.z_grid);
  if (j.contains("f_grid"))
    c.f_grid = grid_from_json(j.at("f_grid"), "f_grid", c.f_grid);
  if (j.contains("noise_sigma_db"))
    c.noise_sigma_db =
        get_num<ConfigError>(j.at("noise_sigma_db"), "noise_sigma_db");
  if (j.contains("feature_mode"))
    c.feature_mode = get_str<ConfigError>(j.at("feature_mode"),
                                          "feature_mode");
  if (j.contains("split")) {
    const json& s = j.at("split");
    check_keys<ConfigError>(s, "split",
                            {"train_fraction", "stratified", "trace_grouped"});
    if (s.contains("train_fraction"))
      c.split.train_fraction =
          get_num<ConfigError>(s.at("train_fraction"), "split.train_fraction");
    if (s.contains("stratified"))
      c.split.stratified =
          get_bool<ConfigError>(s.at("stratified"), "split.stratified");
    if (s.contains("trace_grouped"))
      c.split.trace_grouped =
          get_bool<ConfigError>(s.at("trace_grouped"), "split.trace_grouped");
  }
  if (j.contains("logistic")) {
    const json& l = j.at("logistic");
    check_keys<ConfigError>(l, "logistic",
                            {"learning_rate", "l2_penalty", "epochs"});
    if (l.contains("learning_rate"))
      c.logistic.learning_rate =
          get_num<ConfigError>(l.at("learning_rate"), "logistic.learning_rate");
    if (l.contains("l2_penalty"))
      c.logistic.l2_penalty =
          get_num<ConfigError>(l.at("l2_penalty"), "logistic.l2_penalty");
    if (l.contains("epochs"))
      c.logistic.epochs = static_cast<int>(
          get_int<ConfigError>(l.at("epochs"), "logistic.epochs"));
  }
  if (j.contains("knn")) {
    const json& k = j.at("knn");
    check_keys<ConfigError>(k, "knn", {"k"});
    if (k.contains("k"))
      c.knn.k = static_cast<int>(get_int<ConfigError>(k.at("k"), "knn.k"));
  }
  if (j.contains("forest")) {
    const json& f = j.at("forest");
    check_keys<ConfigError>(f, "forest",
                            {"n_trees", "max_depth", "min_leaf",
                             "features_per_split", "bootstrap"});
    if (f.contains("n_trees"))
      c.forest.n_trees = static_cast<int>(
          get_int<ConfigError>(f.at("n_trees"), "forest.n_trees"));
    if (f.contains("max_depth"))
      c.forest.max_depth = static_cast<int>(
          get_int<ConfigError>(f.at("max_depth"), "forest.max_depth"));
    if (f.contains("min_leaf"))
      c.forest.min_leaf = static_cast<int>(
          get_int<ConfigError>(f.at("min_leaf"), "forest.min_leaf"));
    if (f.contains("features_per_split"))
      c.forest.features_per_split = static_cast<int>(get_int<ConfigError>(
          f.at("features_per_split"), "forest.features_per_split"));
    if (f.contains("bootstrap"))
      c.forest.bootstrap =
          get_bool<ConfigError>(f.at("bootstrap"), "forest.bootstrap");
  }
  if (j.contains("svm")) {
    const json& s = j.at("svm");
    check_keys<ConfigError>(s, "svm",
                            {"c", "kernel", "gamma", "tolerance",
                             "max_passes"});
    if (s.contains("c")) c.svm.c = get_num<ConfigError>(s.at("c"), "svm.c");
    if (s.contains("kernel"))
      c.svm.kernel = get_str<ConfigError>(s.at("kernel"), "svm.kernel");
    if (s.contains("gamma"))
      c.svm.gamma = get_num<ConfigError>(s.at("gamma"), "svm.gamma");
    if (s.contains("tolerance"))
      c.svm.tolerance =
          get_num<ConfigError>(s.at("tolerance"), "svm.tolerance");
    if (s.contains("max_passes"))
      c.svm.max_passes = static_cast<int>(
          get_int<ConfigError>(s.at("max_passes"), "svm.max_passes"));
  }
  if (j.contains("svm_subsample"))
    c.svm_subsample = static_cast<std::size_t>(
        get_u64<ConfigError>(j.at("svm_subsample"), "svm_subsample"));
  if (j.contains("seed")) c.seed = get_u64<ConfigError>(j.at("seed"), "seed");
  if (j.contains("out_dir"))
    c.out_dir = get_str<ConfigError>(j.at("out_dir"), "out_dir");
  if (j.contains("threads"))
    c.threads = static_cast<unsigned>(
        get_u64<ConfigError>(j.at("threads"), "threads"));
  if (j.contains("oils")) {
    const json& o = j.at("oils");
    if (!o.is_array()) throw ConfigError("oils: expected an array");
    c.oils.clear();
    for (const auto& v : o)
      c.oils.push_back(get_str<ConfigError>(v, "oils"));
  }

  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  return config_from_json_text(read_text_file(path));
}

namespace {

json config_to_json_value(const RunConfig& c) {
  json j;
  json mats = json::array();
  for (const auto& m : c.materials) mats.push_back(detail::material_to_json(m));
  j["materials"] = std::move(mats);
  j["resonator"] = detail::resonator_to_json(c.resonator);
  j["z_grid"] = grid_to_json(c.z_grid);
  j["f_grid"] = grid_to_json(c.f_grid);
  j["noise_sigma_db"] = c.noise_sigma_db;
  j["feature_mode"] = c.feature_mode;
  j["split"]["train_fraction"] = c.split.train_fraction;
  j["split"]["stratified"] = c.split.stratified;
  j["split"]["trace_grouped"] = c.split.trace_grouped;
  j["logistic"]["learning_rate"] = c.logistic.learning_rate;
  j["logistic"]["l2_penalty"] = c.logistic.l2_penalty;
  j["logistic"]["epochs"] = c.logistic.epochs;
  j["knn"]["k"] = c.knn.k;
  j["forest"]["n_trees"] = c.forest.n_trees;
  j["forest"]["max_depth"] = c.forest.max_depth;
  j["forest"]["min_leaf"] = c.forest.min_leaf;
  j["forest"]["features_per_split"] = c.forest.features_per_split;
  j["forest"]["bootstrap"] = c.forest.bootstrap;
  j["svm"]["c"] = c.svm.c;
  j["svm"]["kernel"] = c.svm.kernel;
  j["svm"]["gamma"] = c.svm.gamma;
  j["svm"]["tolerance"] = c.svm.tolerance;
  j["svm"]["max_passes"] = c.svm.max_passes;
  j["svm_subsample"] = c.svm_subsample;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["threads"] = c.threads;
  j["oils"] = c.oils;
  return j;
}

}  // namespace

std::string config_to_json(const RunConfig& config) {
  return config_to_json_value(config).dump(2) + "\n";
}

std::uint64_t config_hash(const RunConfig& config) {
  json j = config_to_json_value(config);
  j.erase("out_dir");
  j.erase("threads");
  std::string canonical = j.dump();
  return fnv1a64(canonical);
}

}  // namespace oilsense

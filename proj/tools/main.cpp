// oilsense CLI: generate / train / evaluate / reproduce.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oilsense/common.hpp"
#include "oilsense/config.hpp"
#include "oilsense/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> oils;
  std::string feature_mode;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool seed_set = false;
  bool out_set = false;
  bool feature_mode_set = false;
  bool threads_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path,
                  "JSON run configuration (defaults are used when omitted)")
      ->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", args.out_dir, "Output directory")
      ->each([&args](const std::string&) { args.out_set = true; });
  cmd->add_option("--oils", args.oils,
                  "Restrict to these oil names (comma separated)")
      ->delimiter(',');
  cmd->add_option("--feature-mode", args.feature_mode,
                  "Feature representation: raw or resonance")
      ->each([&args](const std::string&) { args.feature_mode_set = true; });
  cmd->add_option("-s,--seed", args.seed, "Master random seed")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_option("-t,--threads", args.threads,
                  "Worker threads (0 = all hardware threads)")
      ->each([&args](const std::string&) { args.threads_set = true; });
}

oilsense::RunConfig build_config(const CommonArgs& args) {
  oilsense::RunConfig config = args.config_path.empty()
                                   ? oilsense::default_config()
                                   : oilsense::load_config(args.config_path);
  if (args.out_set) config.out_dir = args.out_dir;
  if (!args.oils.empty()) config.oils = args.oils;
  if (args.feature_mode_set) config.feature_mode = args.feature_mode;
  if (args.seed_set) config.seed = args.seed;
  if (args.threads_set) config.threads = args.threads;
  config.validate();
  return config;
}

std::string default_path(const oilsense::RunConfig& config,
                         const char* artifact_name) {
  std::string dir = config.out_dir;
  if (!dir.empty() && dir.back() != '/') dir += '/';
  return dir + artifact_name;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "oilsense: simulated microwave resonator sweeps for edible oils, "
      "plus classical classifiers trained and scored on them"};
  app.require_subcommand(1);

  CommonArgs gen_args, train_args, eval_args, repro_args;
  std::string dataset_csv;
  std::vector<std::string> train_kinds;
  std::vector<std::string> eval_models;
  std::string eval_split;
  bool eval_force = false;

  CLI::App* gen = app.add_subcommand(
      "generate", "Simulate sweeps and write dataset.csv plus its manifest");
  add_common(gen, gen_args);

  CLI::App* train = app.add_subcommand(
      "train", "Train classifiers on a generated dataset");
  add_common(train, train_args);
  train->add_option("dataset", dataset_csv, "Path to dataset.csv")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("-m,--models", train_kinds,
                    "Model kinds to train (default: forest,knn,logistic,svm)")
      ->delimiter(',');

  CLI::App* eval = app.add_subcommand(
      "evaluate", "Score trained models on the held-out split");
  add_common(eval, eval_args);
  eval->add_option("-m,--models", eval_models,
                   "Model files to score (default: the four in the output "
                   "directory)")
      ->delimiter(',');
  eval->add_option("--split", eval_split,
                   "Split manifest written by train (default: "
                   "<out>/split.manifest.json)");
  eval->add_flag("-f,--force", eval_force,
                 "Score even when config or dataset hashes disagree");

  CLI::App* repro = app.add_subcommand(
      "reproduce", "Full generate -> train -> evaluate run with a summary");
  add_common(repro, repro_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? oilsense::exit_ok : oilsense::exit_usage;
  }

  try {
    if (gen->parsed()) {
      oilsense::run_generate(build_config(gen_args), std::cout);
    } else if (train->parsed()) {
      oilsense::run_train(build_config(train_args), dataset_csv, train_kinds,
                          std::cout);
    } else if (eval->parsed()) {
      oilsense::RunConfig config = build_config(eval_args);
      std::vector<std::string> models = eval_models;
      if (models.empty()) {
        for (const char* kind : {"forest", "knn", "logistic", "svm"})
          models.push_back(
              default_path(config, oilsense::artifact::model_file(kind).c_str()));
      }
      for (const std::string& m : models) {
        if (m.empty()) {
          std::cerr << "error: empty model path in --models\n";
          return oilsense::exit_usage;
        }
      }
      std::string split = eval_split.empty()
                              ? default_path(config,
                                             oilsense::artifact::split_manifest)
                              : eval_split;
      oilsense::run_evaluate(config, models, split, eval_force, std::cout);
    } else {
      oilsense::run_reproduce(build_config(repro_args), std::cout);
    }
  } catch (const oilsense::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return oilsense::exit_config;
  } catch (const oilsense::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return oilsense::exit_schema;
  } catch (const oilsense::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return oilsense::exit_numeric;
  } catch (const oilsense::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return oilsense::exit_io;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return oilsense::exit_usage;
  }
  return oilsense::exit_ok;
}

#include "entropica/entropica.h"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <string>

namespace {

int fail(entropica_status s) {
  std::fprintf(stderr, "entropica: %s: %s\n", entropica_status_string(s), entropica_last_error());
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy and randomness experiments over computable measure spaces"};
  std::string experiment, config_path, out_path, seed;
  unsigned threads = 1;
  std::string names;
  for (size_t i = 0; i < entropica_experiment_count(); ++i) {
    names += std::string(i ? ", " : "") + entropica_experiment_name(i);
  }
  app.add_option("experiment", experiment, "one of: " + names)->required();
  app.add_option("--config", config_path, "flat key = value config file")->required();
  app.add_option("--out", out_path, "output CSV path (default: the config's out key, else <experiment>.csv)");
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--threads", threads, "worker threads; 0 uses every core");
  app.set_version_flag("--version", entropica_version());
  CLI11_PARSE(app, argc, argv);

  entropica_config* config = nullptr;
  if (auto s = entropica_config_load(config_path.c_str(), &config)) return fail(s);
  if (!seed.empty()) {
    if (auto s = entropica_config_set(config, "seed", seed.c_str())) return fail(s);
  }
  if (out_path.empty()) {
    const char* v = entropica_config_get(config, "out");
    out_path = v && *v ? v : experiment + ".csv";
  }

  const auto start = std::chrono::steady_clock::now();
  entropica_result* result = nullptr;
  const entropica_status s = entropica_run(experiment.c_str(), config, threads, &result);
  entropica_config_destroy(config);
  if (s) return fail(s);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (auto w = entropica_result_write(result, out_path.c_str(), wall)) {
    entropica_result_destroy(result);
    return fail(w);
  }
  std::printf("%s -> %s (%.2f s)\n", experiment.c_str(), out_path.c_str(), wall);
  for (size_t i = 0; i < entropica_result_summary_count(result); ++i) {
    std::printf("  %s = %s\n", entropica_result_summary_key(result, i), entropica_result_summary_value(result, i));
  }
  entropica_result_destroy(result);
  return 0;
}

#include "entropica/entropica.h"

#include "entropica/complexity.hpp"
#include "entropica/error.hpp"
#include "entropica/experiments.hpp"
#include "entropica/measure.hpp"
#include "entropica/randomness.hpp"

#include <exception>
#include <new>
#include <string>

struct entropica_config {
  entropica::Config config;
};

struct entropica_result {
  entropica::ExperimentResult result;
  std::string csv;
};

namespace {

thread_local std::string last_error;

entropica_status status_of(entropica::ErrorCode code) {
  using entropica::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return ENTROPICA_INVALID_ARGUMENT;
    case ErrorCode::UnknownName: return ENTROPICA_UNKNOWN_NAME;
    case ErrorCode::ConsistencyViolation: return ENTROPICA_CONSISTENCY_VIOLATION;
    case ErrorCode::PrecisionUnreachable: return ENTROPICA_PRECISION_UNREACHABLE;
    case ErrorCode::Boundary: return ENTROPICA_BOUNDARY;
    case ErrorCode::ZeroMass: return ENTROPICA_ZERO_MASS;
    case ErrorCode::ZeroCylinder: return ENTROPICA_ZERO_CYLINDER;
    case ErrorCode::ZeroCell: return ENTROPICA_ZERO_CELL;
    case ErrorCode::EmptyCell: return ENTROPICA_EMPTY_CELL;
    case ErrorCode::SearchExhausted: return ENTROPICA_SEARCH_EXHAUSTED;
    case ErrorCode::Unsupported: return ENTROPICA_UNSUPPORTED;
    case ErrorCode::Config: return ENTROPICA_CONFIG;
    case ErrorCode::Io: return ENTROPICA_IO;
    case ErrorCode::Parse: return ENTROPICA_PARSE;
  }
  return ENTROPICA_INTERNAL;
}

template <class F>
entropica_status guard(F&& f) {
  try {
    last_error.clear();
    f();
    return ENTROPICA_OK;
  } catch (const entropica::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return ENTROPICA_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) throw entropica::Error(entropica::ErrorCode::InvalidArgument, what);
}

entropica::Bits bits_from(const uint8_t* bits, size_t length) {
  require(bits != nullptr || length == 0, "null bit buffer");
  entropica::Bits x(bits, bits + length);
  for (auto b : x) require(b <= 1, "bits must be 0 or 1");
  return x;
}

}  // namespace

extern "C" {

const char* entropica_version(void) {
  static const std::string v = entropica::version_string();
  return v.c_str();
}

const char* entropica_status_string(entropica_status status) {
  switch (status) {
    case ENTROPICA_OK: return "ok";
    case ENTROPICA_INTERNAL: return "internal";
    default: return entropica::to_string(static_cast<entropica::ErrorCode>(status - 1));
  }
}

const char* entropica_last_error(void) { return last_error.c_str(); }

size_t entropica_experiment_count(void) { return entropica::experiment_names().size(); }

const char* entropica_experiment_name(size_t index) {
  static const std::vector<std::string> names = entropica::experiment_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

entropica_status entropica_config_create(entropica_config** out) {
  return guard([&] {
    require(out != nullptr, "null output");
    *out = new entropica_config{};
  });
}

entropica_status entropica_config_parse(const char* text, entropica_config** out) {
  return guard([&] {
    require(text != nullptr && out != nullptr, "null argument");
    *out = new entropica_config{entropica::Config::parse(text)};
  });
}

entropica_status entropica_config_load(const char* path, entropica_config** out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new entropica_config{entropica::Config::load(path)};
  });
}

entropica_status entropica_config_set(entropica_config* config, const char* key, const char* value) {
  return guard([&] {
    require(config != nullptr && key != nullptr && value != nullptr, "null argument");
    config->config.set(key, value);
  });
}

const char* entropica_config_get(const entropica_config* config, const char* key) {
  if (!config || !key) return nullptr;
  const auto& v = config->config.values();
  const auto it = v.find(key);
  return it == v.end() ? nullptr : it->second.c_str();
}

void entropica_config_destroy(entropica_config* config) { delete config; }

entropica_status entropica_run(const char* experiment, const entropica_config* config, unsigned threads,
                               entropica_result** out) {
  return guard([&] {
    require(experiment != nullptr && config != nullptr && out != nullptr, "null argument");
    auto* r = new entropica_result{entropica::run_experiment(experiment, config->config, threads), {}};
    r->csv = r->result.table.to_csv();
    *out = r;
  });
}

const char* entropica_result_csv(const entropica_result* result) { return result ? result->csv.c_str() : nullptr; }

size_t entropica_result_summary_count(const entropica_result* result) {
  return result ? result->result.summary.size() : 0;
}

const char* entropica_result_summary_key(const entropica_result* result, size_t index) {
  if (!result || index >= result->result.summary.size()) return nullptr;
  return result->result.summary[index].first.c_str();
}

const char* entropica_result_summary_value(const entropica_result* result, size_t index) {
  if (!result || index >= result->result.summary.size()) return nullptr;
  return result->result.summary[index].second.c_str();
}

const char* entropica_result_config_value(const entropica_result* result, const char* key) {
  if (!result || !key) return nullptr;
  const auto it = result->result.resolved.find(key);
  return it == result->result.resolved.end() ? nullptr : it->second.c_str();
}

entropica_status entropica_result_write(const entropica_result* result, const char* out_path, double wall_seconds) {
  return guard([&] {
    require(result != nullptr && out_path != nullptr, "null argument");
    entropica::write_result(result->result, out_path, wall_seconds);
  });
}

void entropica_result_destroy(entropica_result* result) { delete result; }

entropica_status entropica_code_length(const char* compressor, const uint8_t* bits, size_t length, size_t* out) {
  return guard([&] {
    require(compressor != nullptr && out != nullptr, "null argument");
    *out = entropica::find_compressor(compressor)->code_length(bits_from(bits, length));
  });
}

entropica_status entropica_deficiency(const char* measure, const char* compressor, const uint8_t* bits,
                                      size_t length, size_t depth, double* value, int* infinite) {
  return guard([&] {
    require(measure != nullptr && compressor != nullptr && value != nullptr, "null argument");
    auto mu = entropica::builtin_measure(measure);
    require(mu->space()->name() == "cantor", "deficiency of bit strings needs a Cantor-space measure");
    const auto d = entropica::deficiency(bits_from(bits, length), *mu, *entropica::find_compressor(compressor), depth,
                                         16);
    *value = d.value;
    if (infinite) *infinite = d.infinite ? 1 : 0;
  });
}

}  // extern "C"

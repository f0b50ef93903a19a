#include "gmocp/cli_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gmocp/stream.hpp"
#include "json.hpp"

namespace gmocp {

namespace {

using nlohmann::json;

std::uint64_t parse_seed_value(const std::string& text) {
  std::uint64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw DataError("bad seed '" + text + "'");
  }
  return value;
}

void check(bool ok, const std::string& message) {
  if (!ok) throw DataError(message);
}

}  // namespace

std::vector<std::uint64_t> parse_seed_spec(const std::string& spec) {
  check(!spec.empty(), "empty seed spec");
  const auto range = spec.find("..");
  if (range != std::string::npos) {
    const std::uint64_t lo = parse_seed_value(spec.substr(0, range));
    const std::uint64_t hi = parse_seed_value(spec.substr(range + 2));
    check(hi >= lo, "seed range '" + spec + "' is descending");
    check(hi - lo < 100000, "seed range '" + spec + "' is implausibly large");
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::vector<std::uint64_t> seeds;
  std::istringstream in(spec);
  std::string token;
  while (std::getline(in, token, ',')) seeds.push_back(parse_seed_value(token));
  check(!seeds.empty(), "empty seed spec");
  return seeds;
}

void apply_config_json(const std::string& json_text, RunOptions& options) {
  json cfg;
  try {
    cfg = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed config JSON: ") + e.what());
  }
  check(cfg.is_object(), "config must be a JSON object with flat keys");

  RunConfig& rc = options.config;
  for (const auto& [key, value] : cfg.items()) {
    try {
      if (key == "alpha") {
        rc.alpha_target = value.get<double>();
        check(rc.alpha_target > 0.0 && rc.alpha_target < 1.0, "alpha outside (0,1)");
      } else if (key == "eta") {
        rc.eta = value.get<double>();
        check(rc.eta > 0.0, "eta must be > 0");
      } else if (key == "epsilon") {
        rc.epsilon = value.get<double>();
        check(rc.epsilon > 0.0 && rc.epsilon < 1.0, "epsilon outside (0,1)");
      } else if (key == "eta_e") {
        rc.eta_e = value.get<double>();
        check(rc.eta_e >= 0.0 && rc.eta_e <= 1.0, "eta_e outside [0,1]");
      } else if (key == "N") {
        rc.n_trials = value.get<int>();
        check(rc.n_trials >= 1, "N must be >= 1");
      } else if (key == "J") {
        rc.n_selective = value.get<int>();
        check(rc.n_selective >= 1, "J must be >= 1");
      } else if (key == "xi") {
        rc.score.xi = value.get<double>();
        check(rc.score.xi >= 0.0, "xi must be >= 0");
      } else if (key == "k_reg") {
        rc.score.k_reg = value.get<int>();
        check(rc.score.k_reg >= 0, "k_reg must be >= 0");
      } else if (key == "warmup") {
        rc.warmup = value.get<int>();
        check(rc.warmup >= 0, "warmup must be >= 0");
      } else if (key == "method") {
        rc.method = parse_method(value.get<std::string>());
      } else if (key == "model") {
        rc.model_index = value.get<int>();
        check(rc.model_index >= 0, "model must be >= 0");
      } else if (key == "seeds") {
        if (value.is_string()) {
          options.seeds = parse_seed_spec(value.get<std::string>());
        } else if (value.is_array()) {
          options.seeds.clear();
          for (const auto& s : value) options.seeds.push_back(s.get<std::uint64_t>());
          check(!options.seeds.empty(), "seeds array is empty");
        } else {
          options.seeds = {value.get<std::uint64_t>()};
        }
      } else {
        throw DataError("unknown config key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw DataError("config key '" + key + "': " + e.what());
    }
  }
}

void load_config_file(const std::string& path, RunOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    apply_config_json(buffer.str(), options);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace gmocp

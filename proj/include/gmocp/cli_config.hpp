#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gmocp/engine.hpp"

namespace gmocp {

struct RunOptions {
  RunConfig config;
  std::vector<std::uint64_t> seeds{0};
};

// "7", "0,2,5", or an inclusive range "0..9".
std::vector<std::uint64_t> parse_seed_spec(const std::string& spec);

// Applies a flat-key JSON config (alpha, eta, epsilon, eta_e, N, J, xi,
// k_reg, warmup, seeds, method, model) onto the options. Unknown keys and
// out-of-range values are rejected.
void apply_config_json(const std::string& json_text, RunOptions& options);

void load_config_file(const std::string& path, RunOptions& options);

}  // namespace gmocp

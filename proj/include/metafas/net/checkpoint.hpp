#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "metafas/net/network.hpp"
#include "metafas/net/params.hpp"

namespace metafas::net {

// Checkpoint directory: one binary blob file per parameter group
// (theta_f.bin .. theta_m.bin), optional optimizer state, and meta.json with
// the architecture hyperparameters, training step and RNG state. Save/load
// round-trips bit-exactly.
struct Checkpoint {
    NetConfig config;
    std::int64_t step = 0;
    std::string rng_state;
    NetworkParams params;
    // Optimizer state as named value groups aligned with the parameter
    // layout (e.g. "adam_m.theta_f"). Empty when not training.
    std::vector<std::pair<std::string, GradBuffer>> extras;
    std::int64_t adam_t = 0;
};

void save_checkpoint(const std::string& dir, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& dir);

}  // namespace metafas::net

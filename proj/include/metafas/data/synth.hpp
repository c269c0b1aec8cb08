#pragma once

#include <vector>

#include "metafas/data/types.hpp"

namespace metafas::data {

// Renders one synthetic multi-domain anti-spoofing dataset. Deterministic
// given cfg.seed: every domain draws from its own derived RNG stream, so
// generation order (or per-domain parallelism) cannot change the output.
//
// Live samples are an ellipsoidal face with shading tied to a radially
// decaying depth dome and a 13-region parsing layout. Spoof samples reuse a
// live render, flatten its contrast and composite the domain's periodic
// moire grid; their depth ground truth is all zero. The domain's hue/blur/
// noise transforms are applied to both classes.
Domain generate_synthetic_domain(const SynthConfig& cfg, int domain_index);

std::vector<Domain> generate_all_domains(const SynthConfig& cfg, int threads = 1);

}  // namespace metafas::data

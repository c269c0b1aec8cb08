#pragma once

#include <string>

#include "metafas/data/types.hpp"

namespace metafas::data {

// On-disk layout: <root>/<domain>/manifest.json with records
// {id, split, label, image, depth, parsing}; paths relative to the domain
// directory. Images 8-bit RGB PNG, depth 8-bit gray 32x32 (value/255),
// parsing 8-bit gray with pixel value = label index.
void save_domain(const Domain& domain, const std::string& root);

// Loads and validates a domain directory. Every referenced file must exist
// (errors name the offending sample id) and every sample must satisfy the
// ImageSample invariants; each split present in the manifest must contain
// at least one live and one spoof record.
Domain load_domain(const std::string& path);

}  // namespace metafas::data

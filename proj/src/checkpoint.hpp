#pragma once

#include <string>

#include "hostr.hpp"

namespace hostr {

// Binary model snapshot: config JSON, trainer RNG state, free-form metadata,
// then every parameter tensor by name. Doubles are stored raw, so a saved and
// reloaded model reproduces bit-identical forward passes.
void save_checkpoint(const std::string& path, const HOSTRModel& model,
                     const std::string& rng_state, const std::string& metadata_json);

struct LoadedCheckpoint {
    HOSTRModel model;
    std::string rng_state;
    std::string metadata_json;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

} // namespace hostr

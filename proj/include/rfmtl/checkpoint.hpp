#pragma once

// Float32 model checkpoints: graph structure as a JSON header plus named
// parameter tensors (including batch-norm running moments). Optimizer state
// is not persisted; a loaded model starts with fresh Adam accumulators.

#include <string>

#include "rfmtl/graph.hpp"

namespace rfmtl {

// Structure header used by both the float and quantized formats.
std::string graph_structure_json(const ModelGraph& g);
ModelGraph graph_from_structure_json(const std::string& json_text);

void save_checkpoint(const ModelGraph& g, const std::string& path);
ModelGraph load_checkpoint(const std::string& path);

}  // namespace rfmtl

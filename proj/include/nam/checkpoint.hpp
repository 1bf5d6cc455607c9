#pragma once

#include <string>

#include "nam/model.hpp"

// Self-describing binary model container: variant tag, dimensions,
// vocabulary, tuned threshold and every tensor, little-endian throughout.
// save -> load -> save is byte-stable.

namespace nam {

struct Model {
  Vocabulary vocab;
  NamParams params;
  double threshold = 0.5;  // dev-tuned decision threshold, if any
};

void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

}  // namespace nam

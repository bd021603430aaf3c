#pragma once

#include <string>

#include "histgbt/boosting.hpp"

// Model persistence as versioned JSON. Numbers print with shortest
// round-trip decimals, so a reloaded model predicts bit-identically;
// identical training runs produce byte-identical files.

namespace histgbt {

inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const Model& model);

// Raises ParseError on malformed or truncated documents and VersionError
// when format_version is not recognized.
Model model_from_json(const std::string& text);

// Writes to a sibling temp file and renames over `path`, so readers never
// observe a torn model file.
void save_model(const Model& model, const std::string& path);

Model load_model(const std::string& path);

}  // namespace histgbt

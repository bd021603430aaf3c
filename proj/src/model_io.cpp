#include "histgbt/model_io.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include "histgbt/error.hpp"
#include "json.hpp"

namespace histgbt {

namespace {

using nlohmann::json;

json node_to_json(const Tree& tree, std::int32_t id) {
  const TreeNode& node = tree.nodes()[id];
  if (node.is_leaf()) {
    return json{{"value", node.value}};
  }
  return json{{"feature", node.feature_id},
              {"threshold", node.threshold},
              {"left", node_to_json(tree, node.left)},
              {"right", node_to_json(tree, node.right)}};
}

// Appends the node and its subtrees in preorder, returning the node's id.
std::int32_t node_from_json(const json& j, std::vector<TreeNode>& nodes,
                            std::size_t n_features) {
  if (!j.is_object()) {
    throw Error(ErrorCode::ParseError, "tree node must be an object");
  }
  const auto id = static_cast<std::int32_t>(nodes.size());
  nodes.emplace_back();
  if (j.contains("value")) {
    if (!j.at("value").is_number()) {
      throw Error(ErrorCode::ParseError, "leaf value must be a number");
    }
    nodes[id].value = j.at("value").get<double>();
    return id;
  }
  if (!j.contains("feature") || !j.contains("threshold") ||
      !j.contains("left") || !j.contains("right")) {
    throw Error(ErrorCode::ParseError,
                "internal node needs feature, threshold, left and right");
  }
  if (!j.at("feature").is_number_unsigned() ||
      !j.at("threshold").is_number()) {
    throw Error(ErrorCode::ParseError, "malformed internal node");
  }
  const auto feature = j.at("feature").get<std::uint64_t>();
  if (feature >= n_features) {
    throw Error(ErrorCode::ParseError,
                "node references feature " + std::to_string(feature) +
                    " but the model has " + std::to_string(n_features));
  }
  nodes[id].feature_id = static_cast<std::uint32_t>(feature);
  nodes[id].threshold = j.at("threshold").get<double>();
  const std::int32_t left = node_from_json(j.at("left"), nodes, n_features);
  const std::int32_t right = node_from_json(j.at("right"), nodes, n_features);
  nodes[id].left = left;
  nodes[id].right = right;
  return id;
}

}  // namespace

std::string model_to_json(const Model& model) {
  json trees = json::array();
  for (const Tree& tree : model.trees) {
    trees.push_back(node_to_json(tree, 0));
  }
  const json j{{"format_version", kModelFormatVersion},
               {"objective", objective_name(model.objective)},
               {"base_score", model.base_score},
               {"learning_rate", model.learning_rate},
               {"feature_names", model.feature_names},
               {"trees", std::move(trees)},
               {"metadata",
                {{"seed", model.seed},
                 {"num_trees", model.configured_num_trees},
                 {"bin_counts", model.bin_counts}}}};
  return j.dump();
}

Model model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!j.is_object() || !j.contains("format_version") ||
      !j.at("format_version").is_number_integer()) {
    throw Error(ErrorCode::ParseError, "missing format_version");
  }
  const auto version = j.at("format_version").get<std::int64_t>();
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::VersionError,
                "unsupported model format_version " +
                    std::to_string(version));
  }
  try {
    Model model;
    model.objective = objective_from_name(j.at("objective").get<std::string>());
    model.base_score = j.at("base_score").get<double>();
    model.learning_rate = j.at("learning_rate").get<double>();
    model.feature_names =
        j.at("feature_names").get<std::vector<std::string>>();
    const json& metadata = j.at("metadata");
    model.seed = metadata.at("seed").get<std::uint64_t>();
    model.configured_num_trees =
        metadata.at("num_trees").get<std::uint32_t>();
    model.bin_counts =
        metadata.at("bin_counts").get<std::vector<std::uint32_t>>();
    for (const json& jt : j.at("trees")) {
      Tree tree;
      node_from_json(jt, tree.nodes(), model.feature_names.size());
      model.trees.push_back(std::move(tree));
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

void save_model(const Model& model, const std::string& path) {
  const std::string text = model_to_json(model);
  const std::string temp = path + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::ConfigError,
                  "cannot open '" + temp + "' for writing");
    }
    out << text << '\n';
    if (!out.flush()) {
      throw Error(ErrorCode::ConfigError, "write to '" + temp + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    throw Error(ErrorCode::ConfigError,
                "cannot move model into place at '" + path +
                    "': " + ec.message());
  }
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::ParseError, "cannot open model file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

}  // namespace histgbt

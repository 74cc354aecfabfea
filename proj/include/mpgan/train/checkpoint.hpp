#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

namespace mpgan::train {

/// A checkpoint directory holds `manifest.json` (metadata, tensor table,
/// text-encoded RNG / stream states) and `tensors.bin` (raw little-endian
/// float32, concatenated in manifest order).
struct Checkpoint {
  nlohmann::json meta = nlohmann::json::object();
  std::map<std::string, torch::Tensor> tensors;
  std::map<std::string, std::string> states;
};

/// Writes into a sibling temporary directory and renames it into place.
void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace mpgan::train

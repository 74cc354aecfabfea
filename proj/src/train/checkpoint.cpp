#include "mpgan/train/checkpoint.hpp"

#include <fstream>

#include "mpgan/core/volume.hpp"

namespace mpgan::train {

namespace fs = std::filesystem;

void save_checkpoint(const fs::path& dir, const Checkpoint& ckpt) {
  const fs::path tmp = dir.string() + ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  nlohmann::json table = nlohmann::json::array();
  {
    std::ofstream blob(tmp / "tensors.bin", std::ios::binary | std::ios::trunc);
    if (!blob) throw std::runtime_error("cannot write '" + (tmp / "tensors.bin").string() + "'");
    std::int64_t offset = 0;
    for (const auto& [name, t] : ckpt.tensors) {
      const torch::Tensor f = t.detach().to(torch::kCPU).to(torch::kFloat32).contiguous();
      blob.write(reinterpret_cast<const char*>(f.data_ptr<float>()), f.numel() * 4);
      table.push_back({{"name", name}, {"shape", f.sizes().vec()}, {"offset", offset}, {"count", f.numel()}});
      offset += f.numel();
    }
    if (!blob) throw std::runtime_error("write failed for the checkpoint blob");
  }
  nlohmann::json manifest = {{"format", "mpgan-checkpoint"}, {"version", 1}, {"meta", ckpt.meta},
                             {"tensors", table}, {"states", ckpt.states}};
  {
    std::ofstream out(tmp / "manifest.json", std::ios::trunc);
    out << manifest.dump(1) << '\n';
    if (!out) throw std::runtime_error("write failed for the checkpoint manifest");
  }

  const fs::path old = dir.string() + ".old";
  fs::remove_all(old);
  if (fs::exists(dir)) fs::rename(dir, old);
  fs::rename(tmp, dir);
  fs::remove_all(old);
}

Checkpoint load_checkpoint(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw ValidationError("no checkpoint manifest in '" + dir.string() + "'");
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed checkpoint manifest: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != "mpgan-checkpoint") throw ValidationError("not an mpgan checkpoint");

  Checkpoint ck;
  ck.meta = manifest.at("meta");
  ck.states = manifest.at("states").get<std::map<std::string, std::string>>();

  std::ifstream blob(dir / "tensors.bin", std::ios::binary);
  if (!blob) throw ValidationError("checkpoint blob missing in '" + dir.string() + "'");
  blob.seekg(0, std::ios::end);
  const std::int64_t floats = static_cast<std::int64_t>(blob.tellg()) / 4;
  for (const auto& e : manifest.at("tensors")) {
    const auto shape = e.at("shape").get<std::vector<std::int64_t>>();
    const std::int64_t offset = e.at("offset"), count = e.at("count");
    if (offset < 0 || offset + count > floats) throw ValidationError("checkpoint blob is truncated");
    torch::Tensor t = torch::empty(shape, torch::kFloat32);
    if (t.numel() != count) throw ValidationError("checkpoint tensor table is inconsistent");
    blob.seekg(offset * 4);
    blob.read(reinterpret_cast<char*>(t.data_ptr<float>()), count * 4);
    ck.tensors[e.at("name").get<std::string>()] = t;
  }
  return ck;
}

}  // namespace mpgan::train

#include "mpgan/core/fvol.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace mpgan {
namespace {

void put_u32(std::vector<char>& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_fvol(const std::filesystem::path& path, const Volume& volume) {
  std::vector<char> buf;
  buf.reserve(24 + volume.size() * 4);
  buf.insert(buf.end(), {'F', 'V', 'O', 'L'});
  put_u32(buf, kFvolVersion);
  put_u32(buf, static_cast<std::uint32_t>(volume.nx()));
  put_u32(buf, static_cast<std::uint32_t>(volume.ny()));
  put_u32(buf, static_cast<std::uint32_t>(volume.nz()));
  put_u32(buf, static_cast<std::uint32_t>(volume.channels()));
  for (double v : volume.data()) put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(v)));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Volume read_fvol(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 24 || std::memcmp(bytes.data(), "FVOL", 4) != 0) {
    throw ValidationError("'" + path.string() + "' is not an FVOL file");
  }
  const std::uint32_t version = get_u32(&bytes[4]);
  if (version != kFvolVersion) {
    throw ValidationError("'" + path.string() + "': unsupported FVOL version " + std::to_string(version));
  }
  const Dims dims{static_cast<int>(get_u32(&bytes[8])), static_cast<int>(get_u32(&bytes[12])),
                  static_cast<int>(get_u32(&bytes[16]))};
  const int channels = static_cast<int>(get_u32(&bytes[20]));
  Volume vol(dims, channels);
  if (bytes.size() != 24 + vol.size() * 4) {
    throw ValidationError("'" + path.string() + "': payload size does not match header " + dims.str());
  }
  auto data = vol.data();
  for (std::size_t i = 0; i < vol.size(); ++i) {
    data[i] = static_cast<double>(std::bit_cast<float>(get_u32(&bytes[24 + 4 * i])));
  }
  return vol;
}

Volume quantize_f32(const Volume& volume) {
  Volume out = volume;
  for (double& v : out.data()) v = static_cast<double>(static_cast<float>(v));
  return out;
}

}  // namespace mpgan

#include "mpgan/data/shard.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace mpgan::data {
namespace {

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void volume(const Volume& v) {
    u32(static_cast<std::uint32_t>(v.nx()));
    u32(static_cast<std::uint32_t>(v.ny()));
    u32(static_cast<std::uint32_t>(v.channels()));
    for (double x : v.data()) u32(std::bit_cast<std::uint32_t>(static_cast<float>(x)));
  }
  void header(ShardKind kind, std::size_t count) {
    buf_.insert(buf_.end(), {'M', 'P', 'S', 'H'});
    u32(kShardVersion);
    u32(static_cast<std::uint32_t>(kind));
    u32(static_cast<std::uint32_t>(count));
  }
  void record(Axis axis, int sim, int frame, int j, std::uint32_t volumes) {
    u32(static_cast<std::uint32_t>(axis));
    u32(static_cast<std::uint32_t>(sim));
    u32(static_cast<std::uint32_t>(frame));
    u32(static_cast<std::uint32_t>(j));
    u32(volumes);
  }
  void save(const std::filesystem::path& path) const {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
      out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
      if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
  }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    bytes_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  std::uint32_t u32() {
    need(4);
    const unsigned char* p = bytes_.data() + pos_;
    pos_ += 4;
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  }
  Volume volume() {
    const int nx = static_cast<int>(u32()), ny = static_cast<int>(u32()), ch = static_cast<int>(u32());
    if (nx <= 0 || ny <= 0 || ch <= 0) fail("bad tile header");
    Volume v(Dims{nx, ny, 1}, ch);
    need(v.size() * 4);
    for (double& x : v.data()) x = static_cast<double>(std::bit_cast<float>(u32()));
    return v;
  }
  std::uint32_t header(ShardKind expected) {
    need(16);
    if (std::memcmp(bytes_.data(), "MPSH", 4) != 0) fail("not a shard file");
    pos_ = 4;
    if (u32() != kShardVersion) fail("unsupported shard version");
    if (u32() != static_cast<std::uint32_t>(expected)) fail("wrong shard kind");
    return u32();
  }
  void done() const {
    if (pos_ != bytes_.size()) fail("trailing bytes");
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ValidationError("'" + path_.string() + "': " + msg); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) fail("truncated");
  }
  std::filesystem::path path_;
  std::vector<unsigned char> bytes_;
  std::size_t pos_ = 0;
};

Axis checked_axis(Reader& r) {
  const std::uint32_t a = r.u32();
  if (a > 2) r.fail("bad axis");
  return static_cast<Axis>(a);
}

}  // namespace

void write_spatial_shard(const std::filesystem::path& path, const std::vector<SliceSample>& samples) {
  Writer w;
  w.header(ShardKind::Spatial, samples.size());
  for (const auto& s : samples) {
    const bool flow = s.flow.size() > 0;
    w.record(s.axis, s.sim_id, s.frame_id, s.j, flow ? 3 : 2);
    w.volume(s.input);
    w.volume(s.target);
    if (flow) w.volume(s.flow);
  }
  w.save(path);
}

void write_temporal_shard(const std::filesystem::path& path, const std::vector<TripletSample>& samples) {
  Writer w;
  w.header(ShardKind::Temporal, samples.size());
  for (const auto& s : samples) {
    w.record(s.axis, s.sim_id, s.frame_id, s.j, 9);
    for (const auto& v : s.inputs) w.volume(v);
    for (const auto& v : s.targets) w.volume(v);
    for (const auto& v : s.flows) w.volume(v);
  }
  w.save(path);
}

std::vector<SliceSample> read_spatial_shard(const std::filesystem::path& path) {
  Reader r(path);
  const std::uint32_t n = r.header(ShardKind::Spatial);
  std::vector<SliceSample> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    SliceSample s;
    s.axis = checked_axis(r);
    s.sim_id = static_cast<int>(r.u32());
    s.frame_id = static_cast<int>(r.u32());
    s.j = static_cast<int>(r.u32());
    const std::uint32_t vols = r.u32();
    if (vols != 2 && vols != 3) r.fail("spatial record must hold 2 or 3 tiles");
    s.input = r.volume();
    s.target = r.volume();
    if (vols == 3) s.flow = r.volume();
    out.push_back(std::move(s));
  }
  r.done();
  return out;
}

std::vector<TripletSample> read_temporal_shard(const std::filesystem::path& path) {
  Reader r(path);
  const std::uint32_t n = r.header(ShardKind::Temporal);
  std::vector<TripletSample> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    TripletSample s;
    s.axis = checked_axis(r);
    s.sim_id = static_cast<int>(r.u32());
    s.frame_id = static_cast<int>(r.u32());
    s.j = static_cast<int>(r.u32());
    if (r.u32() != 9) r.fail("temporal record must hold 9 tiles");
    for (auto& v : s.inputs) v = r.volume();
    for (auto& v : s.targets) v = r.volume();
    for (auto& v : s.flows) v = r.volume();
    out.push_back(std::move(s));
  }
  r.done();
  return out;
}

std::string spatial_shard_name(int j) { return "spatial_x" + std::to_string(j) + ".shard"; }
std::string temporal_shard_name(int j) { return "temporal_x" + std::to_string(j) + ".shard"; }

}  // namespace mpgan::data

#include "mpgan/eval/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <new>
#include <random>
#include <sstream>

#include "mpgan/solver/simulation.hpp"

namespace mpgan::eval {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

BenchRecord failed(const std::string& subsystem, Dims d, const std::string& why) {
  return BenchRecord{subsystem, d, d.count(), 0.0, 0, false, why};
}

// Smooth plume-like LR input; timing does not depend on content.
void bench_input(Dims d, std::uint64_t seed, Volume& density, Volume& velocity) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  density = Volume(d, 1);
  velocity = Volume(d, 3);
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        const double dx = (x + 0.5) / d.nx - 0.5, dy = (y + 0.5) / d.ny - 0.3, dz = (z + 0.5) / d.nz - 0.5;
        density.at(x, y, z) = std::exp(-10.0 * (dx * dx + dy * dy + dz * dz)) * (1.0 + 0.1 * u(rng));
        for (int c = 0; c < 3; ++c) velocity.at(x, y, z, c) = 0.3 * u(rng);
      }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("linear_fit: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("linear_fit: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    sse += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return f;
}

LinearFit time_fit(const std::vector<BenchRecord>& records) {
  std::vector<double> x, y;
  for (const auto& r : records)
    if (r.ok) x.push_back(static_cast<double>(r.voxels)), y.push_back(r.seconds);
  return linear_fit(x, y);
}

double scaling_exponent(const std::vector<BenchRecord>& records) {
  std::vector<double> x, y;
  for (const auto& r : records)
    if (r.ok) x.push_back(std::log(static_cast<double>(r.voxels))), y.push_back(std::log(r.seconds));
  return linear_fit(x, y).slope;
}

std::vector<BenchRecord> bench_inference(const std::vector<Dims>& sizes, const infer::Generator& g1,
                                         const infer::Generator* g2, int factor, int frames,
                                         const infer::MultipassOptions& opt, std::uint64_t seed) {
  if (frames < 1) throw ValidationError("bench: frames must be >= 1");
  std::vector<BenchRecord> out;
  for (const Dims& d : sizes) {
    try {
      Volume density, velocity;
      bench_input(d, seed, density, velocity);
      infer::multipass_upscale(density, velocity, g1, g2, factor, opt);  // warm-up
      const auto t0 = Clock::now();
      for (int i = 0; i < frames; ++i) infer::multipass_upscale(density, velocity, g1, g2, factor, opt);
      out.push_back({"multipass", d, d.count(), seconds_since(t0) / frames, frames, true, ""});
    } catch (const std::bad_alloc&) {
      out.push_back(failed("multipass", d, "out of memory"));
    } catch (const c10::Error&) {
      out.push_back(failed("multipass", d, "runtime error"));
    }
  }
  return out;
}

std::vector<BenchRecord> bench_solver(const std::vector<Dims>& sizes, int substeps, int frames, double dt,
                                      std::uint64_t seed) {
  if (substeps < 1) throw ValidationError("bench: substeps must be >= 1");
  if (frames < 1) throw ValidationError("bench: frames must be >= 1");
  std::vector<BenchRecord> out;
  for (const Dims& d : sizes) {
    try {
      solver::SimConfig cfg;
      cfg.hr_resolution = d;
      cfg.seed = seed;
      const solver::Scenario sc = solver::sample_scenario(cfg);
      const solver::StepParams params{solver::effective_buoyancy(cfg, sc), dt / substeps, cfg.cg_tolerance,
                                      cfg.cg_max_iter};
      solver::SimState state(d);
      auto frame = [&] {
        for (int s = 0; s < substeps; ++s) solver::sim_step(state, sc.sources, params);
      };
      frame();  // warm-up
      const auto t0 = Clock::now();
      for (int i = 0; i < frames; ++i) frame();
      out.push_back({"solver", d, d.count(), seconds_since(t0) / frames, frames, true, ""});
    } catch (const std::bad_alloc&) {
      out.push_back(failed("solver", d, "out of memory"));
    }
  }
  return out;
}

std::string bench_csv(const std::vector<BenchRecord>& records) {
  std::string s = "subsystem,nx,ny,nz,voxels,seconds,frames,ok,note\n";
  char buf[256];
  for (const auto& r : records) {
    if (r.note.find_first_of(",\n") != std::string::npos) throw ValidationError("bench note must not contain ',' or newlines");
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%zu,%.17g,%d,%d,", r.subsystem.c_str(), r.resolution.nx, r.resolution.ny,
                  r.resolution.nz, r.voxels, r.seconds, r.frames, r.ok ? 1 : 0);
    s += buf;
    s += r.note + "\n";
  }
  return s;
}

std::vector<BenchRecord> parse_bench_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "subsystem,nx,ny,nz,voxels,seconds,frames,ok,note")
    throw ValidationError("bench csv: unexpected header");
  std::vector<BenchRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 9) throw ValidationError("bench csv: expected 9 fields in '" + line + "'");
    BenchRecord r;
    try {
      r.subsystem = f[0];
      r.resolution = {std::stoi(f[1]), std::stoi(f[2]), std::stoi(f[3])};
      r.voxels = std::stoull(f[4]);
      r.seconds = std::stod(f[5]);
      r.frames = std::stoi(f[6]);
      r.ok = f[7] == "1";
      r.note = f[8];
    } catch (const std::logic_error&) {
      throw ValidationError("bench csv: malformed line '" + line + "'");
    }
    if (r.voxels != r.resolution.count()) throw ValidationError("bench csv: voxel count does not match dims");
    out.push_back(r);
  }
  return out;
}

void write_bench_csv(const std::filesystem::path& path, const std::vector<BenchRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << bench_csv(records);
}

std::vector<BenchRecord> read_bench_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_bench_csv(ss.str());
}

std::string performance_table(const std::vector<BenchRecord>& solver, const std::vector<BenchRecord>& multipass) {
  auto cell = [](const BenchRecord& r) {
    char b[64];
    if (r.ok)
      std::snprintf(b, sizeof b, "%.3f", r.seconds);
    else
      std::snprintf(b, sizeof b, "failed");
    return std::string(b);
  };
  auto res = [](const BenchRecord& r) { return r.resolution.str(); };
  std::string s = "Local performance (seconds per frame)\n";
  s += "| Method | Resolution | Computation time (s) |\n|---|---|---|\n";
  for (const auto& r : solver) s += "| Solver | " + res(r) + " | " + cell(r) + " |\n";
  for (const auto& r : multipass) s += "| Multi-pass GAN | " + res(r) + " (input) | " + cell(r) + " |\n";
  s += "\nPublished reference (different hardware, not comparable):\n";
  s += "| | Regular solver | | Multi-grid solver | | Multi-pass GAN | |\n";
  s += "|---|---|---|---|---|---|---|\n";
  s += "| Resolution | 256 | 512 | 256 | 512 | 256 | 512 |\n";
  s += "| Computation time (s) | 116.90 | 1376.54 | 41.90 | 463.81 | 10.14 | 59.65 |\n";
  return s;
}

}  // namespace mpgan::eval

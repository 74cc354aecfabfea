#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mpgan/infer/multipass.hpp"

namespace mpgan::eval {

struct BenchRecord {
  std::string subsystem;  ///< "solver" or "multipass"
  Dims resolution;        ///< input grid (multipass) or simulated grid (solver)
  std::size_t voxels = 0;
  double seconds = 0.0;   ///< mean wall-clock per frame, warm-up excluded
  int frames = 0;
  bool ok = true;         ///< false marks a size that failed (e.g. out of memory)
  std::string note;

  bool operator==(const BenchRecord&) const = default;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least-squares line y = slope x + intercept; needs two distinct x.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);
/// Exponent p of seconds ~ voxels^p from a log-log fit over the ok records.
double scaling_exponent(const std::vector<BenchRecord>& records);
/// Linear fit of seconds against voxel count over the ok records.
LinearFit time_fit(const std::vector<BenchRecord>& records);

/// Times multipass_upscale per input size over `frames` frames after one
/// untimed warm-up frame.
std::vector<BenchRecord> bench_inference(const std::vector<Dims>& sizes, const infer::Generator& g1,
                                         const infer::Generator* g2, int factor, int frames,
                                         const infer::MultipassOptions& opt = {}, std::uint64_t seed = 0);

/// Times `substeps` solver steps of dt / substeps per output frame at each
/// HR size, after one untimed warm-up frame.
std::vector<BenchRecord> bench_solver(const std::vector<Dims>& sizes, int substeps, int frames, double dt = 0.5,
                                      std::uint64_t seed = 0);

std::string bench_csv(const std::vector<BenchRecord>& records);
std::vector<BenchRecord> parse_bench_csv(const std::string& text);
void write_bench_csv(const std::filesystem::path& path, const std::vector<BenchRecord>& records);
std::vector<BenchRecord> read_bench_csv(const std::filesystem::path& path);

/// Solver vs multi-pass seconds per frame at each measured resolution, in
/// the layout of a two-method performance table, followed by the published
/// reference numbers (other hardware; context only).
std::string performance_table(const std::vector<BenchRecord>& solver, const std::vector<BenchRecord>& multipass);

}  // namespace mpgan::eval

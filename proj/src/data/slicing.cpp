#include "mpgan/data/slicing.hpp"

namespace mpgan::data {
namespace {

int extent(const Dims& d, int axis) { return axis == 0 ? d.nx : (axis == 1 ? d.ny : d.nz); }

}  // namespace

PlaneAxes plane_axes(Axis normal) {
  switch (normal) {
    case Axis::Z: return {0, 1};
    case Axis::X: return {2, 1};
    case Axis::Y: return {0, 2};
  }
  return {0, 1};
}

Volume extract_slice(const Volume& vol, Axis normal, int index) {
  const Dims d = vol.dims();
  const int n = static_cast<int>(normal);
  if (index < 0 || index >= extent(d, n)) {
    throw ValidationError("slice index " + std::to_string(index) + " out of range along " + axis_name(normal));
  }
  const PlaneAxes pa = plane_axes(normal);
  const int w = extent(d, pa.horizontal), h = extent(d, pa.vertical);
  const int ch = vol.channels();
  Volume s(Dims{w, h, 1}, ch);
  int p[3];
  p[n] = index;
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      p[pa.horizontal] = i;
      p[pa.vertical] = j;
      for (int c = 0; c < ch; ++c) s.at(i, j, 0, c) = vol.at(p[0], p[1], p[2], c);
    }
  return s;
}

std::vector<Volume> slice_volume(const Volume& vol, Axis normal) {
  const int n = extent(vol.dims(), static_cast<int>(normal));
  std::vector<Volume> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) out.push_back(extract_slice(vol, normal, k));
  return out;
}

Volume restack_slices(const std::vector<Volume>& slices, Axis normal) {
  if (slices.empty()) throw ValidationError("restack_slices: no slices");
  const PlaneAxes pa = plane_axes(normal);
  const int n = static_cast<int>(normal);
  const int w = slices.front().nx(), h = slices.front().ny(), ch = slices.front().channels();
  int e[3];
  e[n] = static_cast<int>(slices.size());
  e[pa.horizontal] = w;
  e[pa.vertical] = h;
  Volume vol(Dims{e[0], e[1], e[2]}, ch);
  int p[3];
  for (int k = 0; k < e[n]; ++k) {
    const Volume& s = slices[k];
    if (s.nx() != w || s.ny() != h || s.nz() != 1 || s.channels() != ch) {
      throw ValidationError("restack_slices: inconsistent slice shapes");
    }
    p[n] = k;
    for (int j = 0; j < h; ++j)
      for (int i = 0; i < w; ++i) {
        p[pa.horizontal] = i;
        p[pa.vertical] = j;
        for (int c = 0; c < ch; ++c) vol.at(p[0], p[1], p[2], c) = s.at(i, j, 0, c);
      }
  }
  return vol;
}

double mean_density(const Volume& slice) {
  const std::size_t n = slice.dims().count();
  long double s = 0.0L;
  for (std::size_t i = 0; i < n; ++i) s += slice.data()[i * slice.channels()];
  return static_cast<double>(s / static_cast<long double>(n));
}

std::vector<int> filter_slices(const std::vector<Volume>& slices, double threshold) {
  std::vector<int> kept;
  for (int i = 0; i < static_cast<int>(slices.size()); ++i) {
    // Inclusive; the relative slack absorbs summation rounding on constant slices.
    if (mean_density(slices[i]) >= threshold * (1.0 - 1e-12)) kept.push_back(i);
  }
  return kept;
}

}  // namespace mpgan::data

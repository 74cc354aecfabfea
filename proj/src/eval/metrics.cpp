#include "mpgan/eval/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace mpgan::eval {

double psnr(const Volume& a, const Volume& b, double peak) {
  require_same_dims(a.dims(), b.dims(), "psnr");
  if (a.channels() != b.channels()) throw ValidationError("psnr: channel counts differ");
  if (!(peak > 0.0)) throw ValidationError("psnr: peak must be positive");
  if (a.size() == 0) throw ValidationError("psnr: empty volumes");
  double sse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    sse += d * d;
  }
  if (!std::isfinite(sse)) throw NumericalError("psnr: non-finite input");
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(a.size());
  return 10.0 * std::log10(peak * peak / mse);
}

std::string format_psnr(double db) {
  if (std::isinf(db) && db > 0) return "identical";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f dB", db);
  return buf;
}

}  // namespace mpgan::eval

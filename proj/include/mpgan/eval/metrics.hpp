#pragma once

#include <string>

#include "mpgan/core/volume.hpp"

namespace mpgan::eval {

/// 10 log10(peak^2 / MSE) over all cells and channels; +inf when a == b.
double psnr(const Volume& a, const Volume& b, double peak);

/// "identical" for +inf, otherwise the value in dB with two decimals.
std::string format_psnr(double db);

}  // namespace mpgan::eval

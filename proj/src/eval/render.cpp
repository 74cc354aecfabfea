#include "mpgan/eval/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>

#include "mpgan/data/slicing.hpp"

namespace mpgan::eval {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_file(const std::filesystem::path& p, const char* mode) {
  File f(std::fopen(p.c_str(), mode));
  if (!f) throw std::runtime_error("cannot open '" + p.string() + "'");
  return f;
}

[[noreturn]] void on_png_error(png_structp, png_const_charp msg) { throw std::runtime_error(std::string("png: ") + msg); }
void on_png_warning(png_structp, png_const_charp) {}

}  // namespace

GrayImage slice_image(const Volume& volume, Axis normal, int index) {
  const int n = normal == Axis::X ? volume.nx() : (normal == Axis::Y ? volume.ny() : volume.nz());
  if (index < 0 || index >= n)
    throw ValidationError("slice index " + std::to_string(index) + " outside [0, " + std::to_string(n) + ")");
  const Volume s = data::extract_slice(volume, normal, index);
  double mx = 0.0;
  for (int v = 0; v < s.ny(); ++v)
    for (int u = 0; u < s.nx(); ++u) mx = std::max(mx, s.at(u, v, 0, 0));
  if (!std::isfinite(mx)) throw NumericalError("render: non-finite density");
  GrayImage img;
  img.width = s.nx();
  img.height = s.ny();
  img.density_max = mx;
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  // The vertical axis increases upwards in the volume, downwards in the image.
  const bool flip = data::plane_axes(normal).vertical == 1;
  for (int v = 0; v < s.ny(); ++v) {
    const int row = flip ? s.ny() - 1 - v : v;
    for (int u = 0; u < s.nx(); ++u) {
      const double t = mx > 0.0 ? std::clamp(s.at(u, v, 0, 0) / mx, 0.0, 1.0) : 0.0;
      img.pixels[static_cast<std::size_t>(row) * img.width + u] = static_cast<std::uint8_t>(std::lround(255.0 * t));
    }
  }
  return img;
}

double render_slice(const Volume& volume, Axis normal, int index, const std::filesystem::path& out_png) {
  const GrayImage img = slice_image(volume, normal, index);
  write_png(out_png, img);
  return *img.density_max;
}

void write_png(const std::filesystem::path& path, const GrayImage& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * image.height)
    throw ValidationError("write_png: malformed image");
  File f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, on_png_error, on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png: out of memory");
  }
  try {
    png_init_io(png, f.get());
    png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    std::string value;
    if (image.density_max) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", *image.density_max);
      value = buf;
    }
    png_text text{};
    text.compression = PNG_TEXT_COMPRESSION_NONE;
    text.key = const_cast<char*>("density_max");
    text.text = value.data();
    if (image.density_max) png_set_text(png, info, &text, 1);
    png_write_info(png, info);
    for (int r = 0; r < image.height; ++r)
      png_write_row(png, image.pixels.data() + static_cast<std::size_t>(r) * image.width);
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
}

GrayImage read_png(const std::filesystem::path& path) {
  File f = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, on_png_error, on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png: out of memory");
  }
  GrayImage img;
  try {
    png_init_io(png, f.get());
    png_read_info(png, info);
    if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY || png_get_bit_depth(png, info) != 8)
      throw ValidationError("read_png: expected 8-bit grayscale");
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    for (int r = 0; r < img.height; ++r)
      png_read_row(png, img.pixels.data() + static_cast<std::size_t>(r) * img.width, nullptr);
    png_read_end(png, info);
    png_textp texts = nullptr;
    int count = 0;
    png_get_text(png, info, &texts, &count);
    for (int i = 0; i < count; ++i)
      if (std::string(texts[i].key) == "density_max") img.density_max = std::stod(texts[i].text);
  } catch (...) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

}  // namespace mpgan::eval

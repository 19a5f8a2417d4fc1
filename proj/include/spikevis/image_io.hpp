#pragma once

// PNG (via libpng) and PGM readers/writers. 8- and 16-bit grayscale or RGB
// inputs are accepted; luminance is normalized to [0,1] by the format's max
// representable value.

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "spikevis/error.hpp"
#include "spikevis/image.hpp"

namespace spikevis {

namespace detail {

inline int pnm_next_token(std::istream& in) {
  // Skips whitespace and '#' comments, returns the next integer.
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      while (in.get(ch) && ch != '\n') {
      }
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      in.unget();
      int v;
      if (!(in >> v)) break;
      return v;
    }
  }
  throw DataError("pgm: truncated header");
}

}  // namespace detail

inline MultiImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("pgm: cannot open " + path);
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || (m1 != '2' && m1 != '5')) {
    throw DataError("pgm: " + path + " is not a P2/P5 file");
  }
  const bool binary = (m1 == '5');
  const int w = detail::pnm_next_token(in);
  const int h = detail::pnm_next_token(in);
  const int maxval = detail::pnm_next_token(in);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
    throw DataError("pgm: bad header in " + path);
  }
  MultiImage img;
  img.width = w;
  img.height = h;
  img.channels = 1;
  img.data.resize(static_cast<std::size_t>(w) * h);
  const double scale = 1.0 / maxval;
  if (binary) {
    in.get();  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * bytes);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw DataError("pgm: truncated pixel data in " + path);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      const unsigned v = bytes == 2 ? (buf[2 * i] << 8 | buf[2 * i + 1]) : buf[i];
      img.data[i] = v * scale;
    }
  } else {
    for (double& px : img.data) px = detail::pnm_next_token(in) * scale;
  }
  return img;
}

inline void write_pgm(const std::string& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("pgm: cannot write " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  for (double v : img.pixels) {
    const int q = static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    out.put(static_cast<char>(q));
  }
  if (!out) throw DataError("pgm: write failed for " + path);
}

inline MultiImage read_png(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw DataError("png: cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw DataError("png: libpng init failed");
  }
  std::vector<png_bytep> row_ptrs;
  std::vector<unsigned char> buf;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw DataError("png: failed to decode " + path);
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  png_set_expand(png);       // palette -> rgb, low bit depths -> 8
  png_set_strip_alpha(png);  // luminance only
  png_read_update_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int channels = png_get_channels(png, info);
  if ((channels != 1 && channels != 3) || (depth != 8 && depth != 16)) {
    longjmp(png_jmpbuf(png), 1);
  }
  const std::size_t stride = png_get_rowbytes(png, info);
  buf.resize(stride * h);
  row_ptrs.resize(h);
  for (png_uint_32 r = 0; r < h; ++r) row_ptrs[r] = buf.data() + r * stride;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);

  MultiImage img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.channels = channels;
  img.data.resize(static_cast<std::size_t>(w) * h * channels);
  const std::size_t n = img.data.size();
  if (depth == 8) {
    for (std::size_t i = 0; i < n; ++i) img.data[i] = buf[i] / 255.0;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      img.data[i] = (buf[2 * i] << 8 | buf[2 * i + 1]) / 65535.0;  // network byte order
    }
  }
  return img;
}

inline void write_png(const std::string& path, const GrayImage& img) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw DataError("png: cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw DataError("png: libpng init failed");
  }
  std::vector<unsigned char> buf;
  std::vector<png_bytep> row_ptrs;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw DataError("png: failed to encode " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  buf.resize(static_cast<std::size_t>(img.width) * img.height);
  for (std::size_t i = 0; i < buf.size(); ++i) {
    buf[i] = static_cast<unsigned char>(
        std::lround(std::clamp(img.pixels[i], 0.0, 1.0) * 255.0));
  }
  row_ptrs.resize(img.height);
  for (int r = 0; r < img.height; ++r) {
    row_ptrs[r] = buf.data() + static_cast<std::size_t>(r) * img.width;
  }
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

/// Reads PNG or PGM (sniffed from the file's magic bytes).
inline MultiImage read_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw DataError("image: cannot open " + path);
  char magic[2] = {0, 0};
  probe.read(magic, 2);
  probe.close();
  if (magic[0] == 'P' && (magic[1] == '2' || magic[1] == '5')) return read_pgm(path);
  if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P') return read_png(path);
  throw DataError("image: " + path + " is neither PGM nor PNG");
}

/// Reads an image as grayscale; if resize_height > 0, rescales to that height
/// preserving aspect ratio.
inline GrayImage load_image_gray(const std::string& path, int resize_height = 0) {
  GrayImage img = to_grayscale(read_image(path));
  if (resize_height > 0 && img.height != resize_height) {
    const int w = std::max(
        1, static_cast<int>(std::lround(static_cast<double>(img.width) * resize_height /
                                        img.height)));
    img = resize_bilinear(img, w, resize_height);
  }
  return img;
}

/// Writes PNG or PGM depending on the path extension (default PGM).
inline void write_image(const std::string& path, const GrayImage& img) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".png") == 0) {
    write_png(path, img);
  } else {
    write_pgm(path, img);
  }
}

}  // namespace spikevis

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "spikevis/error.hpp"

namespace spikevis {

/// Single-channel image, luminance in [0,1], row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  double at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * width + c]; }
  double& at(int r, int c) { return pixels[static_cast<std::size_t>(r) * width + c]; }
};

/// Interleaved multi-channel image (1 = gray, 3 = RGB), values in [0,1].
struct MultiImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;
};

inline GrayImage make_gray(int width, int height, double fill = 0.0) {
  GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width) * height, fill);
  return img;
}

/// ITU-R BT.601 luminance; single-channel input passes through unchanged.
inline GrayImage to_grayscale(const MultiImage& image) {
  if (image.width <= 0 || image.height <= 0 || image.data.empty()) {
    throw InvalidInputError("to_grayscale: empty image");
  }
  if (image.channels != 1 && image.channels != 3) {
    throw InvalidInputError("to_grayscale: expected 1 or 3 channels, got " +
                            std::to_string(image.channels));
  }
  GrayImage out = make_gray(image.width, image.height);
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  if (image.channels == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      out.pixels[i] = std::clamp(image.data[i], 0.0, 1.0);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double r = image.data[3 * i];
      const double g = image.data[3 * i + 1];
      const double b = image.data[3 * i + 2];
      out.pixels[i] = std::clamp(0.299 * r + 0.587 * g + 0.114 * b, 0.0, 1.0);
    }
  }
  return out;
}

/// Bilinear resample with half-pixel-center coordinate mapping.
inline GrayImage resize_bilinear(const GrayImage& src, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0) {
    throw InvalidInputError("resize_bilinear: nonpositive output size");
  }
  GrayImage out = make_gray(out_w, out_h);
  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;
  for (int r = 0; r < out_h; ++r) {
    double fy = (r + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(src.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    for (int c = 0; c < out_w; ++c) {
      double fx = (c + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(src.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;
      const double top = src.at(y0, x0) * (1.0 - wx) + src.at(y0, x1) * wx;
      const double bot = src.at(y1, x0) * (1.0 - wx) + src.at(y1, x1) * wx;
      out.at(r, c) = top * (1.0 - wy) + bot * wy;
    }
  }
  return out;
}

constexpr int kNumScales = 5;
constexpr std::array<double, kNumScales> kScaleFactors = {1.00, 0.71, 0.50, 0.30, 0.25};
constexpr int kKernelSize = 5;       // S1 Gabor kernels are 5x5
constexpr int kNumOrientations = 4;  // S1/C1 maps per scale

/// The five scaled copies of an input image processed by the hierarchy.
struct Pyramid {
  std::array<GrayImage, kNumScales> levels;
};

inline int scaled_dim(int dim, double factor) {
  return static_cast<int>(std::lround(factor * dim));
}

inline Pyramid build_pyramid(const GrayImage& img) {
  if (img.width < kKernelSize || img.height < kKernelSize) {
    throw InvalidInputError("build_pyramid: image smaller than 5x5");
  }
  Pyramid pyr;
  for (int s = 0; s < kNumScales; ++s) {
    const int w = scaled_dim(img.width, kScaleFactors[s]);
    const int h = scaled_dim(img.height, kScaleFactors[s]);
    if (w < kKernelSize || h < kKernelSize) {
      throw InvalidInputError("build_pyramid: level " + std::to_string(s) + " (factor " +
                              std::to_string(kScaleFactors[s]) + ") would be " +
                              std::to_string(w) + "x" + std::to_string(h) +
                              ", below the 5x5 minimum");
    }
    pyr.levels[s] = (s == 0) ? img : resize_bilinear(img, w, h);
  }
  return pyr;
}

}  // namespace spikevis

#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "spikevis/image.hpp"

namespace spikevis {

constexpr double kPi = 3.14159265358979323846;

/// Preferred orientations (radians): the angle of the bar/edge the kernel
/// responds to, measured from the horizontal row axis.
constexpr std::array<double, kNumOrientations> kOrientations = {
    kPi / 8.0, 3.0 * kPi / 8.0, 5.0 * kPi / 8.0, 7.0 * kPi / 8.0};

struct GaborKernel {
  double theta = 0.0;
  std::array<double, kKernelSize * kKernelSize> k{};

  double at(int dr, int dc) const { return k[(dr + 2) * kKernelSize + (dc + 2)]; }
};

/// Four 5x5 edge-detector kernels, one per preferred orientation.
/// Each kernel is mean-subtracted and L2-normalized.
struct GaborBank {
  std::array<GaborKernel, kNumOrientations> kernels;
  double wavelength = 5.0;
  double sigma = 2.0;
  double gamma = 0.5;
  double phase = 0.0;  // carrier is sin(2*pi*u/lambda + phase); 0 = antisymmetric
};

inline GaborBank make_gabor_bank(double sigma = 2.0, double gamma = 0.5, double phase = 0.0,
                                 double wavelength = 5.0) {
  GaborBank bank;
  bank.sigma = sigma;
  bank.gamma = gamma;
  bank.phase = phase;
  bank.wavelength = wavelength;
  for (int o = 0; o < kNumOrientations; ++o) {
    GaborKernel& ker = bank.kernels[o];
    ker.theta = kOrientations[o];
    const double ct = std::cos(ker.theta);
    const double st = std::sin(ker.theta);
    for (int dr = -2; dr <= 2; ++dr) {
      for (int dc = -2; dc <= 2; ++dc) {
        // u: along the edge normal (carrier direction), v: along the edge.
        const double u = -dc * st + dr * ct;
        const double v = dc * ct + dr * st;
        const double envelope = std::exp(-(u * u + gamma * gamma * v * v) / (2.0 * sigma * sigma));
        ker.k[(dr + 2) * kKernelSize + (dc + 2)] =
            envelope * std::sin(2.0 * kPi * u / wavelength + phase);
      }
    }
    // Zero mean, then unit L2 norm.
    double mean = 0.0;
    for (double x : ker.k) mean += x;
    mean /= static_cast<double>(ker.k.size());
    for (double& x : ker.k) x -= mean;
    double norm2 = 0.0;
    for (double x : ker.k) norm2 += x * x;
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : ker.k) x *= inv;
  }
  return bank;
}

/// One response map per orientation via valid-region correlation: each output
/// map is (h-4)x(w-4) and holds |kernel . patch|.
inline std::array<GrayImage, kNumOrientations> s1_responses(const GrayImage& level,
                                                            const GaborBank& bank) {
  const int out_h = level.height - kKernelSize + 1;
  const int out_w = level.width - kKernelSize + 1;
  if (out_h <= 0 || out_w <= 0) {
    throw InvalidInputError("s1_responses: level smaller than the 5x5 kernel");
  }
  std::array<GrayImage, kNumOrientations> maps;
  for (int o = 0; o < kNumOrientations; ++o) {
    maps[o] = make_gray(out_w, out_h);
    const GaborKernel& ker = bank.kernels[o];
    for (int r = 0; r < out_h; ++r) {
      for (int c = 0; c < out_w; ++c) {
        double acc = 0.0;
        for (int dr = 0; dr < kKernelSize; ++dr) {
          const double* row = &level.pixels[static_cast<std::size_t>(r + dr) * level.width + c];
          const double* krow = &ker.k[dr * kKernelSize];
          for (int dc = 0; dc < kKernelSize; ++dc) {
            acc += row[dc] * krow[dc];
          }
        }
        maps[o].at(r, c) = std::fabs(acc);
      }
    }
  }
  return maps;
}

}  // namespace spikevis

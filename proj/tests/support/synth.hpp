#pragma once

// Deterministic synthetic inputs shared by the unit and acceptance suites.

#include <cmath>
#include <cstdint>
#include <vector>

#include "raloha/rng.hpp"
#include "raloha/types.hpp"

namespace raloha::testsupport {

inline double uniform_in(const CounterRng& rng, std::uint64_t k, double lo,
                         double hi) {
  return lo + (hi - lo) * rng.uniform01(k);
}

/// Patch whose 2-D spectrum has exactly `k_deltas` point masses
/// (k=1: constant, k=2: one cosine, k=3: constant + cosine), so its
/// block-Hankel lift has rank k when the filter window exceeds k.
/// Values are not range-normalized; use for operator-level tests.
inline Patch spectral_mode_patch(int rows, int cols, int k_deltas,
                                 std::uint64_t seed) {
  const CounterRng rng(seed);
  Patch out = Patch::Zero(rows, cols);
  const double dc = uniform_in(rng, 0, 0.4, 0.8);
  const double amp = uniform_in(rng, 1, 0.2, 0.4);
  const double wr = uniform_in(rng, 2, 0.35, 2.4);
  const double wc = uniform_in(rng, 3, 0.35, 2.4);
  const double phase = uniform_in(rng, 4, 0.0, 6.28318530717958647);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      double v = 0.0;
      if (k_deltas == 1 || k_deltas == 3) v += dc;
      if (k_deltas >= 2) v += amp * std::cos(wr * i + wc * j + phase);
      out(i, j) = v;
    }
  }
  return out;
}

/// [0,1]-valued patch built from a constant plus `n_cosines` plane waves;
/// its lift has rank 2*n_cosines + 1.  The family behind the synthetic
/// recovery experiments.
inline Patch texture_patch(int n, int n_cosines, std::uint64_t seed) {
  const CounterRng rng(seed);
  Patch out = Patch::Constant(n, n, 0.5);
  const double total_amp = 0.42;
  for (int m = 0; m < n_cosines; ++m) {
    const std::uint64_t base = 16 * std::uint64_t(m);
    const double amp = total_amp / n_cosines;
    const double wr = uniform_in(rng, base + 0, 0.4, 2.2);
    const double wc = uniform_in(rng, base + 1, 0.4, 2.2);
    const double phase = uniform_in(rng, base + 2, 0.0, 6.28318530717958647);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        out(i, j) += amp * std::cos(wr * i + wc * j + phase);
      }
    }
  }
  return out;
}

/// Strongly textured grayscale test image: four quadrants of oriented
/// gratings over a common offset, locally a handful of spectral modes.
inline Planes textured_image(int n, std::uint64_t seed) {
  const CounterRng rng(seed);
  Patch img(n, n);
  const int half = n / 2;
  // quadrant -> (row frequency, col frequency)
  const double freqs[4][2] = {
      {uniform_in(rng, 0, 0.9, 1.4), uniform_in(rng, 1, 0.2, 0.5)},
      {uniform_in(rng, 2, 0.2, 0.5), uniform_in(rng, 3, 0.9, 1.4)},
      {uniform_in(rng, 4, 0.7, 1.1), uniform_in(rng, 5, 0.7, 1.1)},
      {uniform_in(rng, 6, 1.2, 1.7), uniform_in(rng, 7, 0.1, 0.3)},
  };
  const double phases[4] = {
      uniform_in(rng, 8, 0.0, 6.28), uniform_in(rng, 9, 0.0, 6.28),
      uniform_in(rng, 10, 0.0, 6.28), uniform_in(rng, 11, 0.0, 6.28)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int q = (i >= half ? 2 : 0) + (j >= half ? 1 : 0);
      img(i, j) = 0.5 + 0.35 * std::cos(freqs[q][0] * i + freqs[q][1] * j +
                                        phases[q]);
    }
  }
  return Planes{img};
}

/// Piecewise-smooth grayscale test image: low-frequency background with a
/// shaded disk and rectangle, values kept strictly inside (0, 1).
inline Patch piecewise_smooth_image(int n) {
  Patch img(n, n);
  const double cx = 0.30 * n, cy = 0.36 * n, radius = 0.20 * n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double v = 0.45 + 0.18 * std::sin(2.2 * i / n) * std::cos(1.7 * j / n) +
                 0.08 * (double(i) + j) / (2.0 * n);
      const double dx = i - cx, dy = j - cy;
      if (dx * dx + dy * dy < radius * radius) {
        v = 0.72 - 0.10 * (dx * dx + dy * dy) / (radius * radius);
      }
      if (i > 0.62 * n && i < 0.86 * n && j > 0.55 * n && j < 0.92 * n) {
        v = 0.25 + 0.002 * (i - 0.62 * n) + 0.0015 * (j - 0.55 * n);
      }
      img(i, j) = std::min(0.85, std::max(0.15, v));
    }
  }
  return img;
}

inline int reflect_index(int i, int n) {
  const int period = 2 * n - 2;
  i = std::abs(i) % period;
  return i < n ? i : period - i;
}

/// Zero-mean random field with Gaussian spatial correlation: white noise
/// smoothed by a separable Gaussian of the given sigma.
inline Patch smooth_noise(int n, double sigma, std::uint64_t seed) {
  const CounterRng rng(seed);
  Patch white(n, n);
  std::uint64_t k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) white(i, j) = rng.uniform01(k++) - 0.5;
  }
  const int half = std::max(1, int(3.0 * sigma));
  Eigen::VectorXd kernel(2 * half + 1);
  for (int t = -half; t <= half; ++t) {
    kernel(t + half) = std::exp(-0.5 * t * t / (sigma * sigma));
  }
  kernel /= kernel.sum();
  Patch tmp(n, n), out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int t = -half; t <= half; ++t) {
        s += kernel(t + half) * white(i, reflect_index(j + t, n));
      }
      tmp(i, j) = s;
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int t = -half; t <= half; ++t) {
        s += kernel(t + half) * tmp(reflect_index(i + t, n), j);
      }
      out(i, j) = s;
    }
  }
  return out;
}

/// Channels derived from one base texture by per-channel 3x3 filtering
/// (delta kernel plus a random perturbation), then normalized around 0.5.
/// Strong inter-channel correlation, stochastic spatial content.
inline Planes modulated_channels(int n, int channels, std::uint64_t seed) {
  const Patch base = smooth_noise(n, 2.0, seed * 77 + 1);
  const CounterRng rng(seed);
  Planes out;
  for (int c = 0; c < channels; ++c) {
    Eigen::Matrix3d ker = Eigen::Matrix3d::Zero();
    ker(1, 1) = 1.0;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        ker(a, b) +=
            0.5 * (rng.uniform01(100 + 16 * std::uint64_t(c) + 3 * a + b) -
                   0.5);
      }
    }
    Patch plane(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int a = -1; a <= 1; ++a) {
          for (int b = -1; b <= 1; ++b) {
            s += ker(a + 1, b + 1) *
                 base(reflect_index(i + a, n), reflect_index(j + b, n));
          }
        }
        plane(i, j) = s;
      }
    }
    const double mean = plane.mean();
    const double sd = std::sqrt((plane.array() - mean).square().mean());
    plane = (0.5 + 0.16 * (plane.array() - mean) / sd).matrix();
    out.push_back(clamp01(plane));
  }
  return out;
}

/// Uniform [0,1] random patch.
inline Patch random_patch(int rows, int cols, std::uint64_t seed) {
  const CounterRng rng(seed);
  Patch out(rows, cols);
  std::uint64_t k = 0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out(i, j) = rng.uniform01(k++);
  }
  return out;
}

}  // namespace raloha::testsupport

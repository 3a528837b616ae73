#include "raloha/noise.hpp"

#include <algorithm>
#include <vector>

#include "raloha/rng.hpp"

namespace raloha {

void NoiseSpec::validate() const {
  if (!(density >= 0.0 && density <= 1.0)) {
    throw InvalidConfigError("noise density must lie in [0,1], got " +
                             std::to_string(density));
  }
  if (!(d_min < d_max)) {
    throw InvalidConfigError("noise dynamic range requires d_min < d_max");
  }
}

namespace {

// Shared corruption loop: `value_at` maps the value draw u2 in [0,1) to the
// replacement pixel value.
template <typename ValueFn>
NoisyImage corrupt(const Planes& image, const NoiseSpec& spec,
                   ValueFn&& value_at) {
  spec.validate();
  if (image.empty()) {
    throw EmptyInputError("noise injection: image has no channels");
  }
  const auto rows = image.front().rows();
  const auto cols = image.front().cols();
  const std::uint64_t plane_size = std::uint64_t(rows) * std::uint64_t(cols);
  const CounterRng rng(spec.seed);

  NoisyImage out;
  out.planes = image;
  out.corrupted.assign(image.size(), Mask::Constant(rows, cols, false));

  for (std::size_t c = 0; c < image.size(); ++c) {
    if (image[c].rows() != rows || image[c].cols() != cols) {
      throw InvalidShapeError("noise injection: channel planes differ in size");
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        const std::uint64_t pix = std::uint64_t(i) * cols + j;
        const std::uint64_t chan_pix = c * plane_size + pix;
        const std::uint64_t loc_counter =
            spec.channel_locations == ChannelLocations::common ? 2 * pix
                                                               : 2 * chan_pix;
        if (rng.uniform01(loc_counter) < spec.density) {
          out.planes[c](i, j) = value_at(rng.uniform01(2 * chan_pix + 1));
          out.corrupted[c](i, j) = true;
        }
      }
    }
  }
  return out;
}

// Reflective padding: index -1 -> 1, n -> n-2, with wraparound for deep
// reflections on tiny images.
inline int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n - 2;
  i = std::abs(i) % period;
  return i < n ? i : period - i;
}

}  // namespace

NoisyImage add_rvin(const Planes& image, const NoiseSpec& spec) {
  if (spec.kind != NoiseKind::rvin) {
    throw InvalidConfigError("add_rvin called with a non-RVIN spec");
  }
  const double lo = spec.d_min;
  const double span = spec.d_max - spec.d_min;
  return corrupt(image, spec, [&](double u) { return lo + span * u; });
}

NoisyImage add_salt_pepper(const Planes& image, const NoiseSpec& spec) {
  if (spec.kind != NoiseKind::salt_pepper) {
    throw InvalidConfigError("add_salt_pepper called with a non-salt/pepper spec");
  }
  return corrupt(image, spec,
                 [&](double u) { return u < 0.5 ? spec.d_min : spec.d_max; });
}

Mask amf_detect(const Patch& image, int max_window) {
  if (max_window < 3 || max_window % 2 == 0) {
    throw InvalidConfigError("amf_detect: max_window must be odd and >= 3");
  }
  const int rows = int(image.rows());
  const int cols = int(image.cols());
  Mask out = Mask::Constant(rows, cols, false);
  std::vector<double> buf;
  buf.reserve(std::size_t(max_window) * max_window);

  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double z = image(i, j);
      for (int w = 3; w <= max_window; w += 2) {
        const int h = w / 2;
        buf.clear();
        for (int di = -h; di <= h; ++di) {
          const int ri = reflect(i + di, rows);
          for (int dj = -h; dj <= h; ++dj) {
            buf.push_back(image(ri, reflect(j + dj, cols)));
          }
        }
        auto mid = buf.begin() + buf.size() / 2;
        std::nth_element(buf.begin(), mid, buf.end());
        const double z_med = *mid;
        const double z_min = *std::min_element(buf.begin(), buf.end());
        const double z_max = *std::max_element(buf.begin(), buf.end());
        if (z_med > z_min && z_med < z_max) {
          // Stage B: the pixel is an impulse iff it sits at a window extreme.
          out(i, j) = !(z > z_min && z < z_max);
          break;
        }
        // Window exhausted without a valid median: leave unflagged.
      }
    }
  }
  return out;
}

Patch median_filter(const Patch& image, int window) {
  if (window < 1 || window % 2 == 0) {
    throw InvalidConfigError("median_filter: window must be odd");
  }
  const int rows = int(image.rows());
  const int cols = int(image.cols());
  const int h = window / 2;
  Patch out(rows, cols);
  std::vector<double> buf;
  buf.reserve(std::size_t(window) * window);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      buf.clear();
      for (int di = -h; di <= h; ++di) {
        const int ri = reflect(i + di, rows);
        for (int dj = -h; dj <= h; ++dj) {
          buf.push_back(image(ri, reflect(j + dj, cols)));
        }
      }
      auto mid = buf.begin() + buf.size() / 2;
      std::nth_element(buf.begin(), mid, buf.end());
      out(i, j) = *mid;
    }
  }
  return out;
}

}  // namespace raloha

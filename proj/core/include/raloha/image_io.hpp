#pragma once

#include <string>

#include "raloha/errors.hpp"
#include "raloha/types.hpp"

namespace raloha {

/// In-memory image: 1 (grayscale) or 3 (RGB) planes with values in [0,1],
/// plus where it came from.  Loading clamps to [0,1]; saving quantizes with
/// round-half-up at the requested bit depth.
struct ImageBuffer {
  Planes planes;
  int bit_depth = 8;  // sample depth of the source / save target: 8 or 16
  std::string source;

  int rows() const { return planes.empty() ? 0 : int(planes.front().rows()); }
  int cols() const { return planes.empty() ? 0 : int(planes.front().cols()); }
  int channels() const { return int(planes.size()); }
};

/// Reads a binary PGM (P5, grayscale) or PPM (P6, RGB) file, 8- or 16-bit,
/// 16-bit samples big-endian.  Comment lines in the header are accepted.
ImageBuffer load_image(const std::string& path);

/// As load_image but fails with a channel-mismatch error when the file's
/// channel count differs from `expect_channels`.
ImageBuffer load_image_expect(const std::string& path, int expect_channels);

/// Writes PGM for 1-plane and PPM for 3-plane buffers.  bit_depth must be 8
/// or 16; no comment lines are ever written.
void save_image(const std::string& path, const ImageBuffer& image,
                int bit_depth);
void save_image(const std::string& path, const ImageBuffer& image);

}  // namespace raloha

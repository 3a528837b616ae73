#pragma once

#include <cstdint>

#include "raloha/errors.hpp"
#include "raloha/types.hpp"

namespace raloha {

enum class NoiseKind { rvin, salt_pepper };

// Whether corrupted pixel locations are drawn per channel or once for all
// channels (values are always drawn per channel).
enum class ChannelLocations { independent, common };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::rvin;
  double density = 0.0;  // fraction p of corrupted pixels
  double d_min = 0.0;
  double d_max = 1.0;
  std::uint64_t seed = 0;
  ChannelLocations channel_locations = ChannelLocations::independent;

  void validate() const;
};

struct NoisyImage {
  Planes planes;
  Masks corrupted;
};

/// Replaces each pixel, with probability `density`, by a uniform draw on
/// [d_min, d_max].  The returned mask records every replaced pixel, even
/// when the drawn value happens to equal the original.
///
/// Draw layout for an H x W x C image (see CounterRng): the location draw
/// for pixel (i,j) of channel c uses counter 2*(c*H*W + i*W + j), or
/// 2*(i*W + j) shared across channels in `common` mode; the value draw
/// always uses 2*(c*H*W + i*W + j) + 1.
NoisyImage add_rvin(const Planes& image, const NoiseSpec& spec);

/// With probability p/2 the pixel becomes d_min, with p/2 it becomes d_max.
/// Same draw layout as add_rvin; the value draw picks the extreme.
NoisyImage add_salt_pepper(const Planes& image, const NoiseSpec& spec);

/// Adaptive median filter detector: per pixel, the median window grows from
/// 3x3 until the window median is strictly between the window extremes, then
/// the pixel is flagged unless it is itself strictly between them.  Pixels
/// whose window reaches max_window without a valid median are left unflagged
/// (an image of identical values offers no local discrimination).  Borders
/// are handled by reflective padding.  Note that a pixel sitting at its
/// window's extreme is flagged even on a noise-free image, so the global
/// extremes of smooth fields produce isolated false positives.
Mask amf_detect(const Patch& image, int max_window = 19);

/// Plain per-pixel median over an odd square window, reflective padding.
Patch median_filter(const Patch& image, int window);

}  // namespace raloha

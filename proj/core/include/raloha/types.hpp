#pragma once

#include <Eigen/Dense>
#include <vector>

namespace raloha {

// A single-channel image patch (or whole plane), values nominally in [0,1].
using Patch = Eigen::MatrixXd;

// Per-pixel boolean mask with the same indexing as Patch.
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Multi-channel data is an ordered list of equally sized planes.
using Planes = std::vector<Patch>;
using Masks = std::vector<Mask>;

inline Patch clamp01(const Patch& p) {
  return p.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace raloha

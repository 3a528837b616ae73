#pragma once

#include <array>
#include <vector>

#include "raloha/noise.hpp"
#include "raloha/solver.hpp"
#include "raloha/types.hpp"

namespace raloha {

/// Overlapping patch tiling.  Origins step by the stride and the last patch
/// per axis is clamped to the image edge, so every pixel is covered.
struct PatchGrid {
  int patch_rows = 0;
  int patch_cols = 0;
  int stride_rows = 0;
  int stride_cols = 0;
  std::vector<std::array<int, 2>> origins;  // row-major sorted {row, col}
};

PatchGrid plan_grid(int image_rows, int image_cols, int patch_rows,
                    int patch_cols, int stride_rows, int stride_cols);

/// Sum / count aggregation of overlapping patches.  Folding is sequential
/// and in a fixed order so the final average is bit-reproducible.
struct Accumulator {
  Eigen::MatrixXd sum;
  Eigen::MatrixXi count;

  Accumulator(int rows, int cols)
      : sum(Eigen::MatrixXd::Zero(rows, cols)),
        count(Eigen::MatrixXi::Zero(rows, cols)) {}

  void fold(int origin_row, int origin_col, const Patch& patch);
  Patch average() const;  // requires count >= 1 everywhere
};

struct DenoiseResult {
  Planes output;  // denoised image
  Planes sparse;  // aggregated sparse component (residual for salt/pepper)
};

/// Whole-image denoising: solve every grid patch (RVIN: sparse + low-rank
/// decomposition; salt/pepper: adaptive-median detection then inpainting)
/// and overlap-average the clean parts.  Patch solves may run on any number
/// of worker threads; aggregation folds results in origin order, so the
/// output does not depend on the thread count.  Inputs outside [0,1] are
/// min-max rescaled first and the transform is inverted on output.
DenoiseResult denoise_image(const Planes& image, NoiseKind kind,
                            const SolverConfig& cfg, const PatchGrid& grid,
                            int threads = 1, int amf_max_window = 19);

}  // namespace raloha

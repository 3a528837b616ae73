#pragma once

#include <vector>

#include "raloha/errors.hpp"
#include "raloha/types.hpp"

namespace raloha {

/// Geometry of the 2-D block-Hankel lifting: patch dimensions and the
/// annihilating-filter window that determines the block structure.
///
/// The lifting runs the inner 1-D Hankel over the patch's row axis with
/// window `filt_rows` and the outer block structure over the column axis
/// with window `filt_cols`.  The exact pixel -> entry mapping is
///
///   lifted(c*(R-p+1) + a, d*p + b) = patch(a + b, c + d)
///
/// with R = patch_rows, p = filt_rows, q = filt_cols,
/// a in [0, R-p], b in [0, p), c in [0, C-q], d in [0, q).
struct HankelShape {
  int patch_rows = 0;
  int patch_cols = 0;
  int filt_rows = 0;
  int filt_cols = 0;

  int lifted_rows() const {
    return (patch_rows - filt_rows + 1) * (patch_cols - filt_cols + 1);
  }
  int lifted_cols() const { return filt_rows * filt_cols; }

  bool operator==(const HankelShape&) const = default;

  // Throws InvalidShapeError unless 1 <= filter <= patch on both axes.
  void validate() const;
};

/// A dense block-Hankel matrix together with the geometry it was built from.
/// Every entry duplicates exactly one source pixel.
struct LiftedMatrix {
  Eigen::MatrixXd data;
  HankelShape shape;
};

/// Side-by-side concatenation of per-channel lifted matrices, kept as one
/// dense block so factor updates can treat it as a single matrix.
struct MultiChannelLifted {
  Eigen::MatrixXd data;  // lifted_rows x (channels * lifted_cols)
  HankelShape shape;
  int channels = 0;
};

/// Lifts a patch to its block-Hankel matrix.
LiftedMatrix lift(const Patch& patch, const HankelShape& shape);

/// Adjoint of the lifting: folds every lifted entry back onto the pixel it
/// came from, summing duplicates.
Patch adjoint(const LiftedMatrix& lifted);

/// How many lifted entries each pixel maps to.  Along an axis of length L
/// with window w, index i is covered min(i+1, w, L-w+1, L-i) times; the 2-D
/// count is the product of the two axis weights.
Patch multiplicity(const HankelShape& shape);

/// Left inverse of the lifting: adjoint divided by multiplicity, i.e. the
/// average of all entries that duplicate a pixel.
Patch pseudo_inverse(const LiftedMatrix& lifted);

MultiChannelLifted concat_channels(const std::vector<LiftedMatrix>& blocks);
std::vector<LiftedMatrix> split_channels(const MultiChannelLifted& multi);

namespace detail {

// In-place variants used by the solver hot loop; `out` must already have
// lifted/patch dimensions respectively.
void lift_into(const Patch& patch, const HankelShape& shape,
               Eigen::Ref<Eigen::MatrixXd> out);
void adjoint_into(const Eigen::Ref<const Eigen::MatrixXd>& lifted,
                  const HankelShape& shape, Patch& out);

}  // namespace detail

}  // namespace raloha

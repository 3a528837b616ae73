#include "raloha/hankel.hpp"

#include <string>

namespace raloha {

void HankelShape::validate() const {
  if (filt_rows < 1 || filt_cols < 1 || patch_rows < 1 || patch_cols < 1 ||
      filt_rows > patch_rows || filt_cols > patch_cols) {
    throw InvalidShapeError(
        "invalid Hankel shape: patch " + std::to_string(patch_rows) + "x" +
        std::to_string(patch_cols) + ", filter " + std::to_string(filt_rows) +
        "x" + std::to_string(filt_cols));
  }
}

namespace detail {

void lift_into(const Patch& patch, const HankelShape& shape,
               Eigen::Ref<Eigen::MatrixXd> out) {
  const int p = shape.filt_rows;
  const int q = shape.filt_cols;
  const int inner_rows = shape.patch_rows - p + 1;
  const int outer_rows = shape.patch_cols - q + 1;
  for (int c = 0; c < outer_rows; ++c) {
    for (int d = 0; d < q; ++d) {
      for (int a = 0; a < inner_rows; ++a) {
        for (int b = 0; b < p; ++b) {
          out(c * inner_rows + a, d * p + b) = patch(a + b, c + d);
        }
      }
    }
  }
}

void adjoint_into(const Eigen::Ref<const Eigen::MatrixXd>& lifted,
                  const HankelShape& shape, Patch& out) {
  const int p = shape.filt_rows;
  const int q = shape.filt_cols;
  const int inner_rows = shape.patch_rows - p + 1;
  const int outer_rows = shape.patch_cols - q + 1;
  out.setZero(shape.patch_rows, shape.patch_cols);
  for (int c = 0; c < outer_rows; ++c) {
    for (int d = 0; d < q; ++d) {
      for (int a = 0; a < inner_rows; ++a) {
        for (int b = 0; b < p; ++b) {
          out(a + b, c + d) += lifted(c * inner_rows + a, d * p + b);
        }
      }
    }
  }
}

}  // namespace detail

LiftedMatrix lift(const Patch& patch, const HankelShape& shape) {
  shape.validate();
  if (patch.rows() != shape.patch_rows || patch.cols() != shape.patch_cols) {
    throw InvalidShapeError("lift: patch is " + std::to_string(patch.rows()) +
                            "x" + std::to_string(patch.cols()) +
                            " but shape expects " +
                            std::to_string(shape.patch_rows) + "x" +
                            std::to_string(shape.patch_cols));
  }
  LiftedMatrix out;
  out.shape = shape;
  out.data.resize(shape.lifted_rows(), shape.lifted_cols());
  detail::lift_into(patch, shape, out.data);
  return out;
}

Patch adjoint(const LiftedMatrix& lifted) {
  lifted.shape.validate();
  if (lifted.data.rows() != lifted.shape.lifted_rows() ||
      lifted.data.cols() != lifted.shape.lifted_cols()) {
    throw InvalidShapeError("adjoint: lifted data does not match shape");
  }
  Patch out;
  detail::adjoint_into(lifted.data, lifted.shape, out);
  return out;
}

Patch multiplicity(const HankelShape& shape) {
  shape.validate();
  auto axis_weight = [](int i, int len, int win) {
    return std::min(std::min(i + 1, win), std::min(len - win + 1, len - i));
  };
  Patch out(shape.patch_rows, shape.patch_cols);
  for (int i = 0; i < shape.patch_rows; ++i) {
    const int wr = axis_weight(i, shape.patch_rows, shape.filt_rows);
    for (int j = 0; j < shape.patch_cols; ++j) {
      out(i, j) = double(wr) * axis_weight(j, shape.patch_cols, shape.filt_cols);
    }
  }
  return out;
}

Patch pseudo_inverse(const LiftedMatrix& lifted) {
  return adjoint(lifted).cwiseQuotient(multiplicity(lifted.shape));
}

MultiChannelLifted concat_channels(const std::vector<LiftedMatrix>& blocks) {
  if (blocks.empty()) {
    throw EmptyInputError("concat_channels: no channels given");
  }
  const HankelShape shape = blocks.front().shape;
  shape.validate();
  MultiChannelLifted out;
  out.shape = shape;
  out.channels = static_cast<int>(blocks.size());
  out.data.resize(shape.lifted_rows(), out.channels * shape.lifted_cols());
  for (int c = 0; c < out.channels; ++c) {
    if (!(blocks[c].shape == shape)) {
      throw InvalidShapeError("concat_channels: channel " + std::to_string(c) +
                              " has a different Hankel shape");
    }
    out.data.middleCols(c * shape.lifted_cols(), shape.lifted_cols()) =
        blocks[c].data;
  }
  return out;
}

std::vector<LiftedMatrix> split_channels(const MultiChannelLifted& multi) {
  multi.shape.validate();
  if (multi.channels < 1 ||
      multi.data.cols() != multi.channels * multi.shape.lifted_cols() ||
      multi.data.rows() != multi.shape.lifted_rows()) {
    throw InvalidShapeError("split_channels: data does not match shape");
  }
  std::vector<LiftedMatrix> out(multi.channels);
  for (int c = 0; c < multi.channels; ++c) {
    out[c].shape = multi.shape;
    out[c].data = multi.data.middleCols(c * multi.shape.lifted_cols(),
                                        multi.shape.lifted_cols());
  }
  return out;
}

}  // namespace raloha

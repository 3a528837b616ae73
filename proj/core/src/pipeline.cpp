#include "raloha/pipeline.hpp"

#include <atomic>
#include <exception>
#include <thread>

namespace raloha {

namespace {

std::vector<int> axis_origins(int length, int patch, int stride) {
  if (patch < 1 || patch > length) {
    throw InvalidShapeError("plan_grid: patch does not fit inside image");
  }
  if (stride < 1) {
    throw InvalidConfigError("plan_grid: stride must be >= 1");
  }
  if (stride > patch) {
    throw InvalidConfigError("plan_grid: stride beyond patch size leaves gaps");
  }
  std::vector<int> origins;
  for (int a = 0; a <= length - patch; a += stride) origins.push_back(a);
  if (origins.back() != length - patch) origins.push_back(length - patch);
  return origins;
}

}  // namespace

PatchGrid plan_grid(int image_rows, int image_cols, int patch_rows,
                    int patch_cols, int stride_rows, int stride_cols) {
  PatchGrid grid;
  grid.patch_rows = patch_rows;
  grid.patch_cols = patch_cols;
  grid.stride_rows = stride_rows;
  grid.stride_cols = stride_cols;
  const std::vector<int> row_origins =
      axis_origins(image_rows, patch_rows, stride_rows);
  const std::vector<int> col_origins =
      axis_origins(image_cols, patch_cols, stride_cols);
  grid.origins.reserve(row_origins.size() * col_origins.size());
  for (int r : row_origins) {
    for (int c : col_origins) {
      grid.origins.push_back({r, c});
    }
  }
  return grid;
}

void Accumulator::fold(int origin_row, int origin_col, const Patch& patch) {
  sum.block(origin_row, origin_col, patch.rows(), patch.cols()) += patch;
  count.block(origin_row, origin_col, patch.rows(), patch.cols()).array() += 1;
}

Patch Accumulator::average() const {
  if ((count.array() < 1).any()) {
    throw InvalidShapeError("Accumulator: uncovered pixels");
  }
  return sum.cwiseQuotient(count.cast<double>());
}

DenoiseResult denoise_image(const Planes& image, NoiseKind kind,
                            const SolverConfig& cfg, const PatchGrid& grid,
                            int threads, int amf_max_window) {
  if (image.empty()) throw EmptyInputError("denoise_image: no channels");
  const int channels = int(image.size());
  const int rows = int(image.front().rows());
  const int cols = int(image.front().cols());
  for (const Patch& p : image) {
    if (p.rows() != rows || p.cols() != cols) {
      throw InvalidShapeError("denoise_image: channel sizes differ");
    }
  }
  if (grid.origins.empty()) {
    throw EmptyInputError("denoise_image: grid has no patches");
  }
  if (cfg.lift_structure && (cfg.shape.patch_rows != grid.patch_rows ||
                             cfg.shape.patch_cols != grid.patch_cols)) {
    throw InvalidShapeError(
        "denoise_image: grid patch size differs from solver shape");
  }
  if (channels > 1 && cfg.channel_mode == ChannelMode::single) {
    throw InvalidConfigError(
        "denoise_image: multi-channel input needs channel_mode independent or "
        "common_location");
  }
  if (threads < 1) threads = 1;

  // Rescale to [0,1] when needed; the transform is inverted on output.
  double lo = image.front().minCoeff();
  double hi = image.front().maxCoeff();
  for (const Patch& p : image) {
    lo = std::min(lo, p.minCoeff());
    hi = std::max(hi, p.maxCoeff());
  }
  const bool rescale = lo < 0.0 || hi > 1.0;
  const double span = hi - lo;
  Planes work(channels);
  for (int c = 0; c < channels; ++c) {
    if (!rescale) {
      work[c] = image[c];
    } else if (span > 0.0) {
      work[c] = (image[c].array() - lo).matrix() / span;
    } else {
      work[c] = Patch::Constant(rows, cols, 0.5);
    }
  }

  Masks noise_mask;
  if (kind == NoiseKind::salt_pepper) {
    noise_mask.reserve(channels);
    for (int c = 0; c < channels; ++c) {
      noise_mask.push_back(amf_detect(work[c], amf_max_window));
    }
  }

  SolverConfig patch_cfg = cfg;
  if (kind == NoiseKind::salt_pepper) {
    patch_cfg.channel_mode = ChannelMode::single;  // inpainting is per channel
    // The detector has already removed the impulses from the fit, so the
    // factor rank can track the patch much more tightly than in the RVIN
    // path, where the lifted target still contains the outliers.
    patch_cfg.lmafit_tol = std::min(cfg.lmafit_tol, 0.05);
  }

  const std::size_t n_patches = grid.origins.size();
  std::vector<Planes> clean(n_patches);
  std::vector<Planes> sparse(n_patches);
  std::vector<std::exception_ptr> failures(n_patches);

  auto solve_patch = [&](std::size_t pi) {
    const int r0 = grid.origins[pi][0];
    const int c0 = grid.origins[pi][1];
    try {
      Planes patch(channels);
      for (int c = 0; c < channels; ++c) {
        patch[c] = work[c].block(r0, c0, grid.patch_rows, grid.patch_cols);
      }
      if (kind == NoiseKind::rvin) {
        DecompositionResult res = robust_decompose(patch, patch_cfg);
        clean[pi] = std::move(res.clean);
        sparse[pi] = std::move(res.sparse);
      } else {
        clean[pi].resize(channels);
        sparse[pi].resize(channels);
        for (int c = 0; c < channels; ++c) {
          const Mask known = !noise_mask[c]
                                  .block(r0, c0, grid.patch_rows,
                                         grid.patch_cols)
                                  .array();
          clean[pi][c] = inpaint(patch[c], known, patch_cfg);
          sparse[pi][c] = patch[c] - clean[pi][c];
        }
      }
    } catch (const std::exception& ex) {
      failures[pi] = std::make_exception_ptr(
          PatchSolveError(ex.what(), r0, c0));
    }
  };

  if (threads == 1 || n_patches == 1) {
    for (std::size_t pi = 0; pi < n_patches; ++pi) solve_patch(pi);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (std::size_t pi = next.fetch_add(1); pi < n_patches;
           pi = next.fetch_add(1)) {
        solve_patch(pi);
      }
    };
    std::vector<std::thread> pool;
    const std::size_t n_workers =
        std::min<std::size_t>(std::size_t(threads), n_patches);
    pool.reserve(n_workers);
    for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  for (std::size_t pi = 0; pi < n_patches; ++pi) {
    if (failures[pi]) std::rethrow_exception(failures[pi]);
  }

  // Single-owner fold in origin order keeps the result thread-independent.
  DenoiseResult result;
  result.output.resize(channels);
  result.sparse.resize(channels);
  for (int c = 0; c < channels; ++c) {
    Accumulator acc_x(rows, cols);
    Accumulator acc_e(rows, cols);
    for (std::size_t pi = 0; pi < n_patches; ++pi) {
      acc_x.fold(grid.origins[pi][0], grid.origins[pi][1], clean[pi][c]);
      acc_e.fold(grid.origins[pi][0], grid.origins[pi][1], sparse[pi][c]);
    }
    result.output[c] = clamp01(acc_x.average());
    result.sparse[c] = acc_e.average();
    if (rescale) {
      result.output[c] = (lo + span * result.output[c].array()).matrix();
      result.sparse[c] = (span * result.sparse[c].array()).matrix();
    }
  }
  return result;
}

}  // namespace raloha

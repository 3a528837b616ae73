#pragma once

#include <vector>

#include "raloha/errors.hpp"
#include "raloha/hankel.hpp"
#include "raloha/types.hpp"

namespace raloha {

// How the sparse component is coupled across channels:
//   single          - one channel only
//   independent     - per-channel l1 (noise locations independent)
//   common_location - mixed l1,2 across channels (shared noise support)
enum class ChannelMode { single, independent, common_location };

struct SolverConfig {
  double tau = 0.1;   // sparsity weight; 0 turns the solver into a pass-through
  double mu = 1.0;    // Hankel-consistency penalty
  double beta = 1.0;  // data penalty

  int max_admm_iters = 500;
  double admm_tol = 1e-4;  // relative change of X between sweeps

  double lmafit_tol = 0.2;
  int lmafit_init_rank = 1;
  int lmafit_max_rank = 0;  // 0 = floor(min(lifted dims) / 4)
  int lmafit_max_iters = 100;
  double lmafit_qr_drop_ratio = 10.0;

  ChannelMode channel_mode = ChannelMode::single;
  HankelShape shape;  // patch dims + annihilating-filter window

  // When false the patch matrix is decomposed as-is, without the Hankel
  // lifting (ablation mode; the lifted path is the method).
  bool lift_structure = true;

  // Study toggle: solve the data step exactly (per-pixel multiplicity
  // weights) instead of the scalar-weighted averaging form.  Off by default.
  bool exact_x_update = false;

  void validate() const;
};

/// Low-rank factorization L = U * V^T.
struct FactorPair {
  Eigen::MatrixXd U;  // lifted_rows x k
  Eigen::MatrixXd V;  // lifted_cols x k
  int rank() const { return int(U.cols()); }
  Eigen::MatrixXd product() const { return U * V.transpose(); }
};

struct DecompositionResult {
  Planes clean;   // X, one per channel
  Planes sparse;  // E, one per channel
  FactorPair factors;
  int iterations_run = 0;
  bool converged = false;
  double final_residual = 0.0;  // || M - X - E ||_F over all channels
  // || H{X} - U V^T ||_F recorded at the end of every sweep.
  std::vector<double> feasibility_history;
};

double soft_threshold(double x, double lambda);
Patch soft_threshold(const Patch& x, double lambda);

/// Pixelwise shrinkage of the across-channel vector: v ->
/// v * max(||v||_2 - lambda, 0) / ||v||_2, zero when ||v||_2 = 0.
Planes group_soft_threshold(const Planes& stack, double lambda);

/// Alternating least-squares low-rank fit of `target` with automatic rank
/// growth, used to seed the ADMM factors.  Stops when the relative Frobenius
/// residual reaches cfg.lmafit_tol or the rank hits its cap.
FactorPair lmafit_init(const Eigen::MatrixXd& target, const SolverConfig& cfg);
FactorPair lmafit_init(const LiftedMatrix& target, const SolverConfig& cfg);
FactorPair lmafit_init(const MultiChannelLifted& target,
                       const SolverConfig& cfg);

/// Sparse + low-rank decomposition of the measurement's lifted Hankel
/// matrix: per sweep E, X, U, V and then both multipliers, in that order.
DecompositionResult robust_decompose(const Patch& measurement,
                                     const SolverConfig& cfg);
DecompositionResult robust_decompose(const Planes& measurement,
                                     const SolverConfig& cfg);

/// Completion-only variant: the sparse term is dropped (E = 0) and the data
/// term acts on mask-true pixels only; mask-false pixels are driven purely
/// by the Hankel-consistency term.
Patch inpaint(const Patch& measurement, const Mask& known_mask,
              const SolverConfig& cfg);

}  // namespace raloha

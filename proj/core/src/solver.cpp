#include "raloha/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "raloha/rng.hpp"

namespace raloha {

void SolverConfig::validate() const {
  if (tau < 0.0) throw InvalidConfigError("tau must be >= 0");
  if (mu <= 0.0 || beta <= 0.0) {
    throw InvalidConfigError("mu and beta must be > 0");
  }
  if (max_admm_iters < 1) throw InvalidConfigError("max_admm_iters must be >= 1");
  if (admm_tol <= 0.0) throw InvalidConfigError("admm_tol must be > 0");
  if (lmafit_tol <= 0.0) throw InvalidConfigError("lmafit_tol must be > 0");
  if (lmafit_init_rank < 1) {
    throw InvalidConfigError("lmafit_init_rank must be >= 1");
  }
  if (lmafit_max_rank < 0) {
    throw InvalidConfigError("lmafit_max_rank must be >= 0 (0 = auto)");
  }
  if (lmafit_max_iters < 1) {
    throw InvalidConfigError("lmafit_max_iters must be >= 1");
  }
  if (lmafit_qr_drop_ratio <= 1.0) {
    throw InvalidConfigError("lmafit_qr_drop_ratio must exceed 1");
  }
  if (lift_structure) shape.validate();
}

double soft_threshold(double x, double lambda) {
  const double mag = std::abs(x) - lambda;
  return mag > 0.0 ? (x > 0.0 ? mag : -mag) : 0.0;
}

Patch soft_threshold(const Patch& x, double lambda) {
  return x.unaryExpr([lambda](double v) { return soft_threshold(v, lambda); });
}

Planes group_soft_threshold(const Planes& stack, double lambda) {
  if (stack.empty()) {
    throw EmptyInputError("group_soft_threshold: empty channel stack");
  }
  const auto rows = stack.front().rows();
  const auto cols = stack.front().cols();
  Eigen::ArrayXXd norm2 = Eigen::ArrayXXd::Zero(rows, cols);
  for (const Patch& p : stack) {
    if (p.rows() != rows || p.cols() != cols) {
      throw InvalidShapeError("group_soft_threshold: channel sizes differ");
    }
    norm2 += p.array().square();
  }
  const Eigen::ArrayXXd norm = norm2.sqrt();
  // max(||v|| - lambda, 0) / ||v||, with 0/0 -> 0.
  const Eigen::ArrayXXd scale =
      (norm > lambda).select((norm - lambda) / norm.max(1e-300), 0.0);
  Planes out(stack.size());
  for (std::size_t c = 0; c < stack.size(); ++c) {
    out[c] = (stack[c].array() * scale).matrix();
  }
  return out;
}

namespace {

constexpr double kStallImprovement = 0.01;  // residual improvement per sweep
constexpr double kSlowProgressRatio = 0.7;  // over-relaxation trigger
constexpr double kOmegaStep = 0.5;
constexpr double kOmegaMax = 4.0;

// Deterministic pseudo-random unit column for seeding factor directions.
Eigen::VectorXd seeded_column(Eigen::Index n, std::uint64_t tag) {
  const CounterRng rng(0x4C4D6146ULL + tag);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v[i] = rng.uniform01(std::uint64_t(i)) - 0.5;
  }
  const double nrm = v.norm();
  return nrm > 0.0 ? Eigen::VectorXd(v / nrm)
                   : Eigen::VectorXd::Unit(n, 0);
}

// Least-squares factor update: returns argmin_A ||A * B^T - Z||_F, i.e.
// Z * B * (B^T B)^+, rank-deficiency safe.
Eigen::MatrixXd als_update(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& B) {
  const Eigen::MatrixXd gram = B.transpose() * B;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram);
  return cod.solve((Z * B).transpose()).transpose();
}

// Appends one new direction drawn from the residual's dominant subspace.
void append_rank(FactorPair& f, const Eigen::MatrixXd& residual,
                 std::uint64_t tag) {
  Eigen::VectorXd v = seeded_column(residual.cols(), tag);
  for (int it = 0; it < 3; ++it) {
    Eigen::VectorXd u = residual * v;
    const double un = u.norm();
    if (un == 0.0) break;
    v = residual.transpose() * (u / un);
    const double vn = v.norm();
    if (vn == 0.0) {
      v = seeded_column(residual.cols(), tag + 1);
      break;
    }
    v /= vn;
  }
  const int k = f.rank();
  f.U.conservativeResize(Eigen::NoChange, k + 1);
  f.V.conservativeResize(Eigen::NoChange, k + 1);
  f.U.col(k).setZero();
  f.V.col(k) = v;
}

// Redundancy trim: compress U V^T to a k x k core via economy QR, look for a
// drop of more than qr_drop_ratio between consecutive diagonal magnitudes of
// the core's pivoted QR, and cut the tail when doing so keeps the fit within
// tolerance.
void trim_factors(FactorPair& f, double abs_residual, double target_norm,
                  const SolverConfig& cfg) {
  const int k = f.rank();
  if (k <= 1) return;
  const Eigen::Index m = f.U.rows();
  const Eigen::Index n = f.V.rows();
  if (m < k || n < k) return;

  Eigen::HouseholderQR<Eigen::MatrixXd> qru(f.U);
  Eigen::HouseholderQR<Eigen::MatrixXd> qrv(f.V);
  const Eigen::MatrixXd Ru =
      qru.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rv =
      qrv.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd core = Ru * Rv.transpose();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qrc(core);
  const Eigen::VectorXd d = qrc.matrixR().diagonal().cwiseAbs();
  int cut = 0;
  double best_ratio = 0.0;
  for (int i = 0; i + 1 < k; ++i) {
    const double ratio = d[i + 1] > 0.0
                             ? d[i] / d[i + 1]
                             : std::numeric_limits<double>::infinity();
    if (ratio > best_ratio) {
      best_ratio = ratio;
      cut = i + 1;
    }
  }
  if (best_ratio <= cfg.lmafit_qr_drop_ratio) return;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      core, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd s = svd.singularValues();
  const double tail = std::sqrt(s.tail(k - cut).squaredNorm());
  const double trimmed_residual =
      std::sqrt(abs_residual * abs_residual + tail * tail);
  if (target_norm > 0.0 &&
      trimmed_residual > cfg.lmafit_tol * target_norm) {
    return;  // the drop sits inside real signal; keep the full rank
  }

  const Eigen::VectorXd scale = s.head(cut).cwiseSqrt();
  const Eigen::MatrixXd qu =
      qru.householderQ() * Eigen::MatrixXd::Identity(m, k);
  const Eigen::MatrixXd qv =
      qrv.householderQ() * Eigen::MatrixXd::Identity(n, k);
  f.U = qu * (svd.matrixU().leftCols(cut) * scale.asDiagonal());
  f.V = qv * (svd.matrixV().leftCols(cut) * scale.asDiagonal());
}

int effective_max_rank(const SolverConfig& cfg, Eigen::Index m,
                       Eigen::Index n) {
  const int dim_cap = int(std::min(m, n));
  int max_rank = cfg.lmafit_max_rank > 0 ? cfg.lmafit_max_rank : dim_cap / 4;
  return std::clamp(max_rank, 1, dim_cap);
}

}  // namespace

FactorPair lmafit_init(const Eigen::MatrixXd& target, const SolverConfig& cfg) {
  if (!target.allFinite()) {
    throw NumericError("lmafit_init: non-finite target", 0);
  }
  const Eigen::Index m = target.rows();
  const Eigen::Index n = target.cols();
  const double z_norm = target.norm();
  const int max_rank = effective_max_rank(cfg, m, n);
  int k = std::clamp(cfg.lmafit_init_rank, 1, max_rank);

  FactorPair f;
  f.U = Eigen::MatrixXd::Zero(m, k);
  f.V = Eigen::MatrixXd::Zero(n, k);
  if (z_norm == 0.0) return f;

  for (int j = 0; j < k; ++j) f.V.col(j) = seeded_column(n, std::uint64_t(j));

  Eigen::MatrixXd work = target;
  Eigen::MatrixXd residual;
  double omega = 1.0;
  double res = std::numeric_limits<double>::infinity();
  double res_prev = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < cfg.lmafit_max_iters; ++iter) {
    f.U = als_update(work, f.V);
    f.V = als_update(work.transpose(), f.U);
    residual = target - f.U * f.V.transpose();
    res = residual.norm() / z_norm;
    if (!std::isfinite(res)) {
      throw NumericError("lmafit_init: diverged", iter);
    }
    if (res <= cfg.lmafit_tol) break;

    const double ratio = res / res_prev;
    const bool stalled =
        std::isfinite(ratio) && (1.0 - ratio) < kStallImprovement;
    if (stalled && k < max_rank) {
      append_rank(f, residual, std::uint64_t(100 + iter));
      ++k;
      omega = 1.0;
      work = target;
    } else {
      if (!std::isfinite(ratio) || ratio < kSlowProgressRatio) {
        // healthy progress: plain alternating step
        omega = 1.0;
      } else if (ratio < 1.0) {
        omega = std::min(omega + kOmegaStep, kOmegaMax);
      } else {
        omega = 1.0;
      }
      work = target + (omega - 1.0) * residual;
    }
    res_prev = res;
  }

  trim_factors(f, res * z_norm, z_norm, cfg);
  return f;
}

FactorPair lmafit_init(const LiftedMatrix& target, const SolverConfig& cfg) {
  return lmafit_init(target.data, cfg);
}

FactorPair lmafit_init(const MultiChannelLifted& target,
                       const SolverConfig& cfg) {
  return lmafit_init(target.data, cfg);
}

namespace {

// Lifting abstraction shared by the decomposition and inpainting loops;
// identity when the structure ablation is requested.
struct LiftOps {
  bool lifted = true;
  HankelShape shape;
  Patch mult;  // per-pixel duplication count (ones when not lifted)
  int rows = 0;
  int cols = 0;  // per channel

  static LiftOps make(const SolverConfig& cfg, Eigen::Index patch_rows,
                      Eigen::Index patch_cols) {
    LiftOps ops;
    ops.lifted = cfg.lift_structure;
    ops.shape = cfg.shape;
    if (ops.lifted) {
      ops.shape.validate();
      if (patch_rows != ops.shape.patch_rows ||
          patch_cols != ops.shape.patch_cols) {
        throw InvalidShapeError(
            "solver: measurement is " + std::to_string(patch_rows) + "x" +
            std::to_string(patch_cols) + " but the configured shape expects " +
            std::to_string(ops.shape.patch_rows) + "x" +
            std::to_string(ops.shape.patch_cols));
      }
      ops.mult = multiplicity(ops.shape);
      ops.rows = ops.shape.lifted_rows();
      ops.cols = ops.shape.lifted_cols();
    } else {
      ops.shape = HankelShape{int(patch_rows), int(patch_cols), 1, 1};
      ops.mult = Patch::Ones(patch_rows, patch_cols);
      ops.rows = int(patch_rows);
      ops.cols = int(patch_cols);
    }
    return ops;
  }

  void lift_channel(const Patch& x, Eigen::Ref<Eigen::MatrixXd> out) const {
    if (lifted) {
      detail::lift_into(x, shape, out);
    } else {
      out = x;
    }
  }

  Patch fold_sum(const Eigen::Ref<const Eigen::MatrixXd>& block) const {
    if (lifted) {
      Patch a;
      detail::adjoint_into(block, shape, a);
      return a;
    }
    return block;
  }

  Patch fold_average(const Eigen::Ref<const Eigen::MatrixXd>& block) const {
    if (lifted) return fold_sum(block).cwiseQuotient(mult);
    return block;
  }
};

void factor_updates(FactorPair& f, const Eigen::MatrixXd& B, double mu) {
  const auto k = f.U.cols();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(k, k);
  const Eigen::MatrixXd gu = id + mu * (f.V.transpose() * f.V);
  f.U = gu.llt().solve((mu * (B * f.V)).transpose()).transpose();
  const Eigen::MatrixXd gv = id + mu * (f.U.transpose() * f.U);
  f.V = gv.llt().solve((mu * (B.transpose() * f.U)).transpose()).transpose();
}

}  // namespace

DecompositionResult robust_decompose(const Planes& measurement,
                                     const SolverConfig& cfg) {
  cfg.validate();
  if (measurement.empty()) {
    throw EmptyInputError("robust_decompose: no channels");
  }
  const int channels = int(measurement.size());
  if (channels > 1 && cfg.channel_mode == ChannelMode::single) {
    throw InvalidConfigError(
        "robust_decompose: multi-channel input needs channel_mode independent "
        "or common_location");
  }
  for (const Patch& m : measurement) {
    if (m.rows() != measurement.front().rows() ||
        m.cols() != measurement.front().cols()) {
      throw InvalidShapeError("robust_decompose: channel sizes differ");
    }
  }

  const LiftOps ops = LiftOps::make(cfg, measurement.front().rows(),
                                    measurement.front().cols());
  const int lr = ops.rows;
  const int lc = ops.cols;

  Eigen::MatrixXd lifted_x(lr, channels * lc);
  for (int c = 0; c < channels; ++c) {
    ops.lift_channel(measurement[c], lifted_x.middleCols(c * lc, lc));
  }
  FactorPair f = lmafit_init(lifted_x, cfg);

  Planes x = measurement;
  Planes e(channels), theta(channels), shrink_arg(channels);
  for (int c = 0; c < channels; ++c) {
    e[c] = Patch::Zero(x[c].rows(), x[c].cols());
    theta[c] = e[c];
  }
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(lr, channels * lc);
  Eigen::MatrixXd product = f.product();

  const double thr = cfg.tau / cfg.beta;
  const bool grouped = cfg.channel_mode == ChannelMode::common_location;

  DecompositionResult result;
  result.feasibility_history.reserve(cfg.max_admm_iters);

  for (int sweep = 1; sweep <= cfg.max_admm_iters; ++sweep) {
    for (int c = 0; c < channels; ++c) {
      shrink_arg[c] = measurement[c] - x[c] - theta[c];
    }
    if (grouped) {
      e = group_soft_threshold(shrink_arg, thr);
    } else {
      for (int c = 0; c < channels; ++c) {
        e[c] = soft_threshold(shrink_arg[c], thr);
      }
    }

    const Eigen::MatrixXd consensus = product - lambda;
    double prev_norm2 = 0.0;
    double delta2 = 0.0;
    for (int c = 0; c < channels; ++c) {
      Patch x_new;
      const auto block = consensus.middleCols(c * lc, lc);
      const Patch data_pull = e[c] - measurement[c] + theta[c];
      if (cfg.exact_x_update) {
        x_new = (cfg.mu * ops.fold_sum(block) - cfg.beta * data_pull)
                    .cwiseQuotient(
                        (cfg.mu * ops.mult.array() + cfg.beta).matrix());
      } else {
        x_new = (cfg.mu * ops.fold_average(block) - cfg.beta * data_pull) /
                (cfg.mu + cfg.beta);
      }
      prev_norm2 += x[c].squaredNorm();
      delta2 += (x_new - x[c]).squaredNorm();
      x[c] = std::move(x_new);
      ops.lift_channel(x[c], lifted_x.middleCols(c * lc, lc));
    }

    factor_updates(f, lifted_x + lambda, cfg.mu);
    product = f.product();

    for (int c = 0; c < channels; ++c) {
      theta[c] += x[c] + e[c] - measurement[c];
    }
    lambda += lifted_x - product;

    const double feas = (lifted_x - product).norm();
    if (!std::isfinite(feas) || !std::isfinite(delta2)) {
      throw NumericError("robust_decompose: non-finite iterate", sweep);
    }
    result.feasibility_history.push_back(feas);
    result.iterations_run = sweep;

    const double rel = std::sqrt(delta2) / std::max(std::sqrt(prev_norm2), 1.0);
    if (rel <= cfg.admm_tol) {
      result.converged = true;
      break;
    }
  }

  double res2 = 0.0;
  for (int c = 0; c < channels; ++c) {
    res2 += (measurement[c] - x[c] - e[c]).squaredNorm();
  }
  result.final_residual = std::sqrt(res2);
  result.clean = std::move(x);
  result.sparse = std::move(e);
  result.factors = std::move(f);
  return result;
}

DecompositionResult robust_decompose(const Patch& measurement,
                                     const SolverConfig& cfg) {
  return robust_decompose(Planes{measurement}, cfg);
}

Patch inpaint(const Patch& measurement, const Mask& known_mask,
              const SolverConfig& cfg) {
  cfg.validate();
  if (known_mask.rows() != measurement.rows() ||
      known_mask.cols() != measurement.cols()) {
    throw InvalidShapeError("inpaint: mask and measurement sizes differ");
  }
  const Eigen::Index n_known = known_mask.count();
  if (n_known == 0) {
    throw EmptyInputError("inpaint: mask has no known pixels");
  }

  const LiftOps ops =
      LiftOps::make(cfg, measurement.rows(), measurement.cols());

  // Unknown pixels start at the mean of the known ones.
  const double mean_known =
      known_mask.select(measurement.array(), 0.0).sum() / double(n_known);
  Patch x = known_mask.select(measurement.array(), mean_known).matrix();

  Eigen::MatrixXd lifted_x(ops.rows, ops.cols);
  ops.lift_channel(x, lifted_x);
  FactorPair f = lmafit_init(lifted_x, cfg);

  Patch theta = Patch::Zero(x.rows(), x.cols());
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(ops.rows, ops.cols);
  Eigen::MatrixXd product = f.product();

  for (int sweep = 1; sweep <= cfg.max_admm_iters; ++sweep) {
    const Eigen::MatrixXd consensus = product - lambda;
    Patch x_new;
    if (cfg.exact_x_update) {
      const Patch folded = ops.fold_sum(consensus);
      const Patch on_mask =
          (cfg.mu * folded + cfg.beta * (measurement - theta))
              .cwiseQuotient((cfg.mu * ops.mult.array() + cfg.beta).matrix());
      const Patch off_mask = folded.cwiseQuotient(ops.mult);
      x_new = known_mask.select(on_mask.array(), off_mask.array()).matrix();
    } else {
      const Patch averaged = ops.fold_average(consensus);
      const Patch on_mask =
          (cfg.mu * averaged + cfg.beta * (measurement - theta)) /
          (cfg.mu + cfg.beta);
      x_new = known_mask.select(on_mask.array(), averaged.array()).matrix();
    }

    const double prev_norm = x.norm();
    const double delta = (x_new - x).norm();
    x = std::move(x_new);
    ops.lift_channel(x, lifted_x);

    factor_updates(f, lifted_x + lambda, cfg.mu);
    product = f.product();

    theta = known_mask.select((theta + x - measurement).array(), theta.array())
                .matrix();
    lambda += lifted_x - product;

    if (!std::isfinite(delta) || !lambda.allFinite()) {
      throw NumericError("inpaint: non-finite iterate", sweep);
    }
    if (delta / std::max(prev_norm, 1.0) <= cfg.admm_tol) break;
  }
  return x;
}

}  // namespace raloha

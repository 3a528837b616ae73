#pragma once

#include <string>

#include "raloha/errors.hpp"
#include "raloha/types.hpp"

namespace raloha {

struct MetricReport {
  double psnr_db = 0.0;  // +infinity when rmse == 0
  double rmse = 0.0;
  double linf = 0.0;

  bool psnr_finite() const;

  // "key=value" lines, one metric per line.
  std::string to_kv_text() const;
  // "psnr_db,rmse,linf" values in that order.
  std::string to_csv_row() const;
};

/// PSNR = 20*log10(max|reference| / rmse) with rmse = ||ref - cand||_2 /
/// sqrt(N), pooled over all pixels of all channels.  The peak is taken from
/// the reference, so the measure is not symmetric.
MetricReport psnr(const Planes& reference, const Planes& candidate);
MetricReport psnr(const Patch& reference, const Patch& candidate);

}  // namespace raloha

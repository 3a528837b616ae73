#include "raloha/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace raloha {

bool MetricReport::psnr_finite() const { return std::isfinite(psnr_db); }

namespace {

std::string format_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

std::string MetricReport::to_kv_text() const {
  return "psnr_db=" + format_value(psnr_db) + "\nrmse=" + format_value(rmse) +
         "\nlinf=" + format_value(linf) + "\n";
}

std::string MetricReport::to_csv_row() const {
  return format_value(psnr_db) + "," + format_value(rmse) + "," +
         format_value(linf);
}

MetricReport psnr(const Planes& reference, const Planes& candidate) {
  if (reference.empty()) {
    throw EmptyInputError("psnr: reference has no channels");
  }
  if (reference.size() != candidate.size()) {
    throw InvalidShapeError("psnr: channel counts differ");
  }
  double peak = 0.0;
  double sq_sum = 0.0;
  double linf = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < reference.size(); ++c) {
    if (reference[c].rows() != candidate[c].rows() ||
        reference[c].cols() != candidate[c].cols()) {
      throw InvalidShapeError("psnr: image dimensions differ");
    }
    peak = std::max(peak, reference[c].cwiseAbs().maxCoeff());
    const Patch diff = reference[c] - candidate[c];
    sq_sum += diff.squaredNorm();
    linf = std::max(linf, diff.cwiseAbs().maxCoeff());
    n += std::size_t(reference[c].size());
  }
  if (peak == 0.0) {
    throw UndefinedPeakError("psnr: all-zero reference has no peak");
  }
  MetricReport rep;
  rep.rmse = std::sqrt(sq_sum / double(n));
  rep.linf = linf;
  rep.psnr_db = rep.rmse > 0.0
                    ? 20.0 * std::log10(peak / rep.rmse)
                    : std::numeric_limits<double>::infinity();
  return rep;
}

MetricReport psnr(const Patch& reference, const Patch& candidate) {
  return psnr(Planes{reference}, Planes{candidate});
}

}  // namespace raloha

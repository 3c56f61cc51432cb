#include "hjb/model_params.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hjb/error.hpp"

namespace hjb {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::SeriesTruncationOverflow: return "series truncation overflow";
    case ErrorKind::OutsideCertifiedRange: return "evaluation outside certified range";
    case ErrorKind::StartBeyondBoundary: return "start beyond stopping boundary";
    case ErrorKind::QuotientSeriesBreakdown: return "quotient series breakdown";
    case ErrorKind::InvalidInventoryState: return "invalid inventory state";
    case ErrorKind::PicardNotConverged: return "Picard not converged";
    case ErrorKind::DirectIntegrationRange: return "direct integration range exceeded";
    case ErrorKind::BoundViolation: return "bound violation";
    case ErrorKind::SimulationDiverged: return "simulation diverged";
    case ErrorKind::NoExits: return "no exits within horizon";
  }
  return "unknown error";
}

ModelParams::ModelParams(int n_goods, double sigma, double radius)
    : n_goods_(n_goods), sigma_(sigma), radius_(radius) {
  if (n_goods < 1) throw std::invalid_argument("n_goods must be >= 1, got " + std::to_string(n_goods));
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be positive and finite");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("radius must be positive and finite");
}

double ModelParams::expansion_variable(double r) const noexcept {
  const double q = (r * r) / (sigma_ * sigma_);
  return 0.25 * q * q;
}

}  // namespace hjb

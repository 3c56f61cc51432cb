#pragma once

namespace hjb {

/// Problem constants shared by every module: number of goods N, inventory
/// diffusion sigma and the stopping radius R on |y|.
///
/// The boundary value at the origin is fixed to 1; any positive value
/// rescales u without changing the control.
class ModelParams {
 public:
  /// Throws std::invalid_argument unless n_goods >= 1, sigma > 0, radius > 0.
  ModelParams(int n_goods, double sigma, double radius);

  int n_goods() const noexcept { return n_goods_; }
  double sigma() const noexcept { return sigma_; }
  double radius() const noexcept { return radius_; }
  static constexpr double alpha() noexcept { return 1.0; }

  /// Expansion variable x = r^4 / (4 sigma^4).
  double expansion_variable(double r) const noexcept;

 private:
  int n_goods_;
  double sigma_;
  double radius_;
};

}  // namespace hjb

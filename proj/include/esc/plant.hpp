#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace esc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/**
 * Linear block of the plant,
 *
 *     mu * dx/dt = A x + B v,   z = C x,
 *
 * with A (n x n), B (n x m), C (n x n). `time_scale` (mu) defaults to 1, the
 * plant exactly as given; mu < 1 gives the singularly perturbed form in which
 * the linear dynamics are 1/mu times faster than the controller clock.
 *
 * Construction rejects inconsistent shapes and singular A. A must also be
 * Hurwitz unless `allow_unstable` is set (so that the hypothesis report can
 * still be produced for an unstable A).
 */
class LtiSubsystem {
 public:
  LtiSubsystem(Matrix A, Matrix B, Matrix C, double time_scale = 1.0,
               bool allow_unstable = false);

  const Matrix& A() const noexcept { return A_; }
  const Matrix& B() const noexcept { return B_; }
  const Matrix& C() const noexcept { return C_; }
  double time_scale() const noexcept { return time_scale_; }
  Eigen::Index state_dim() const noexcept { return A_.rows(); }
  Eigen::Index input_dim() const noexcept { return B_.cols(); }

  /// Largest real part over the eigenvalues of A.
  double spectral_abscissa() const;
  bool is_hurwitz() const;

  /// Quasi-steady state x = -A^{-1} B v (LU solve, no explicit inverse).
  Vector steady_state_state(const Vector& v) const;
  /// z = -C A^{-1} B v.
  Vector steady_state_output(const Vector& v) const;
  /// DC gain G = -C A^{-1} B of the v -> z channel (n x m).
  const Matrix& dc_gain() const noexcept { return dc_gain_; }

 private:
  Matrix A_;
  Matrix B_;
  Matrix C_;
  double time_scale_;
  Eigen::FullPivLU<Matrix> lu_;
  Matrix dc_gain_;
};

struct Optimum {
  Vector z_star;
  double y_star = 0.0;
};

/// Objective y = h(z). Quadratic maps carry their optimum; custom maps are
/// assumed smooth and defined on all of R^n.
class StaticMap {
 public:
  enum class Kind { kQuadratic, kCustom };

  using EvalFn = std::function<double(const Vector&)>;
  using GradFn = std::function<Vector(const Vector&)>;

  /// y* + 1/2 (z - z*)^T H (z - z*). H must be symmetric; negative
  /// definiteness is reported by check_hypotheses rather than enforced here.
  static StaticMap quadratic(double y_star, Vector z_star, Matrix H);

  /// y* - sum_i d_i^2 + 2c sum_{i<j} d_i d_j with d = z - z*. For n = 2 this is
  /// y* - (d1^2 + d2^2 - 2c d1 d2).
  static StaticMap coupled_quadratic(double y_star, Vector z_star,
                                     double coupling);

  /// c^T z + offset. Has no maximum; used for pure ramp-tracking checks.
  static StaticMap linear(Vector c, double offset = 0.0);

  /// Arbitrary map. Without `gradient`, central finite differences are used.
  static StaticMap custom(Eigen::Index dim, EvalFn eval, GradFn gradient = {},
                          std::optional<Optimum> optimum = std::nullopt);

  Kind kind() const noexcept { return kind_; }
  Eigen::Index dim() const noexcept { return dim_; }
  const std::optional<Optimum>& optimum() const noexcept { return optimum_; }
  /// Hessian of a quadratic map; empty for custom maps.
  const Matrix& hessian() const noexcept { return H_; }
  bool has_analytic_gradient() const noexcept {
    return kind_ == Kind::kQuadratic || static_cast<bool>(grad_);
  }

  double eval(const Vector& z) const;
  Vector gradient(const Vector& z) const;

  /// Relative step of the finite-difference fallback: h * max(1, |z|).
  void set_fd_step(double h) noexcept { fd_step_ = h; }
  double fd_step() const noexcept { return fd_step_; }

 private:
  StaticMap() = default;
  void check_dim(const Vector& z) const;

  Kind kind_ = Kind::kCustom;
  Eigen::Index dim_ = 0;
  std::optional<Optimum> optimum_;
  Matrix H_;
  EvalFn eval_;
  GradFn grad_;
  double fd_step_ = 1e-5;
};

/// Central-difference gradient of a scalar function.
Vector central_difference(const std::function<double(const Vector&)>& f,
                          const Vector& at, double rel_step);

struct PlantRates {
  Vector dv;
  Vector dx;
};

/// Integrator, linear block and static map in cascade:
///   dv/dt = u,  mu dx/dt = A x + B v,  z = C x,  y = h(z).
/// z and y are always derived from the current x.
class CascadePlant {
 public:
  CascadePlant(LtiSubsystem lti, StaticMap map);
  CascadePlant(LtiSubsystem lti, StaticMap map, Vector v, Vector x);

  const LtiSubsystem& lti() const noexcept { return lti_; }
  const StaticMap& map() const noexcept { return map_; }
  const Vector& v() const noexcept { return v_; }
  const Vector& x() const noexcept { return x_; }

  void set_state(Vector v, Vector x);

  Vector z() const { return lti_.C() * x_; }
  double y() const { return map_.eval(z()); }

  PlantRates derivative(const Vector& u) const;

  /// One explicit Euler step with u held over dt.
  void advance(const Vector& u, double dt);

  /// k_p = G^T grad h(z), so that dy/dt = k_p^T u in the quasi-steady state.
  Vector high_freq_gain(const Vector& z) const;

 private:
  LtiSubsystem lti_;
  StaticMap map_;
  Vector v_;
  Vector x_;
  Vector dx_scratch_;
};

struct HypothesisCheck {
  enum class Status { kPass, kFail, kAssumed };
  std::string id;  // "H1" ... "H6"
  Status status = Status::kAssumed;
  std::string detail;
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;

  /// True when no checkable hypothesis failed.
  bool ok() const;
  const HypothesisCheck* find(const std::string& id) const;
};

const char* to_string(HypothesisCheck::Status status);

/// Machine-checks H3 (A Hurwitz) and H4 (quadratic map: H negative definite,
/// zero gradient at z*). The others are recorded as assumptions, along with the
/// gradient bound L_h and vicinity radius delta when given.
HypothesisReport check_hypotheses(const CascadePlant& plant,
                                  std::optional<double> L_h = std::nullopt,
                                  std::optional<double> delta = std::nullopt);

/// Hurwitz tolerance: max Re(lambda) < -kHurwitzMargin.
inline constexpr double kHurwitzMargin = 1e-9;

}  // namespace esc

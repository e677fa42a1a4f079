#include "esc/plant.hpp"

#include "esc/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace esc {

namespace {

std::string shape(const Matrix& M) {
  std::ostringstream os;
  os << M.rows() << "x" << M.cols();
  return os.str();
}

bool all_finite(const Matrix& M) { return M.allFinite(); }

}  // namespace

// ---------------------------------------------------------------------------
// LtiSubsystem

LtiSubsystem::LtiSubsystem(Matrix A, Matrix B, Matrix C, double time_scale,
                           bool allow_unstable)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)),
      time_scale_(time_scale) {
  const auto n = A_.rows();
  if (n == 0 || A_.cols() != n) {
    throw ConfigError("plant.A", "must be square and non-empty, got " + shape(A_));
  }
  if (B_.rows() != n || B_.cols() == 0) {
    throw ConfigError("plant.B", "must have " + std::to_string(n) +
                                     " rows and at least one column, got " +
                                     shape(B_));
  }
  if (C_.rows() != n || C_.cols() != n) {
    throw ConfigError("plant.C", "must be " + std::to_string(n) + "x" +
                                     std::to_string(n) + ", got " + shape(C_));
  }
  if (!all_finite(A_)) throw ConfigError("plant.A", "non-finite entry");
  if (!all_finite(B_)) throw ConfigError("plant.B", "non-finite entry");
  if (!all_finite(C_)) throw ConfigError("plant.C", "non-finite entry");
  if (!(time_scale_ > 0.0) || !std::isfinite(time_scale_)) {
    throw ConfigError("plant.time_scale", "must be a positive number");
  }

  lu_.compute(A_);
  if (!lu_.isInvertible()) {
    throw ConfigError("plant.A",
                      "is singular; the quasi-steady state x = -A^-1 B v "
                      "does not exist");
  }
  if (!allow_unstable && !is_hurwitz()) {
    std::ostringstream os;
    os << "is not Hurwitz (H3: eigenvalues must lie in the left-half plane); "
          "max real part = "
       << spectral_abscissa();
    throw ConfigError("plant.A", os.str());
  }
  dc_gain_ = -(C_ * lu_.solve(B_));
}

double LtiSubsystem::spectral_abscissa() const {
  Eigen::EigenSolver<Matrix> es(A_, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

bool LtiSubsystem::is_hurwitz() const {
  return spectral_abscissa() < -kHurwitzMargin;
}

Vector LtiSubsystem::steady_state_state(const Vector& v) const {
  if (v.size() != input_dim()) {
    throw ConfigError("v", "expected dimension " + std::to_string(input_dim()) +
                               ", got " + std::to_string(v.size()));
  }
  return -lu_.solve(B_ * v);
}

Vector LtiSubsystem::steady_state_output(const Vector& v) const {
  return C_ * steady_state_state(v);
}

// ---------------------------------------------------------------------------
// StaticMap

StaticMap StaticMap::quadratic(double y_star, Vector z_star, Matrix H) {
  const auto n = z_star.size();
  if (n == 0) throw ConfigError("plant.map.z_star", "must be non-empty");
  if (H.rows() != n || H.cols() != n) {
    throw ConfigError("plant.map.H", "must be " + std::to_string(n) + "x" +
                                         std::to_string(n) + ", got " +
                                         shape(H));
  }
  if (!H.allFinite() || !z_star.allFinite() || !std::isfinite(y_star)) {
    throw ConfigError("plant.map", "non-finite parameter");
  }
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ConfigError("plant.map.H", "must be symmetric");
  }

  StaticMap map;
  map.kind_ = Kind::kQuadratic;
  map.dim_ = n;
  map.H_ = std::move(H);
  map.optimum_ = Optimum{std::move(z_star), y_star};
  return map;
}

StaticMap StaticMap::coupled_quadratic(double y_star, Vector z_star,
                                       double coupling) {
  const auto n = z_star.size();
  Matrix H = Matrix::Constant(n, n, 2.0 * coupling);
  H.diagonal().setConstant(-2.0);
  return quadratic(y_star, std::move(z_star), std::move(H));
}

StaticMap StaticMap::linear(Vector c, double offset) {
  if (c.size() == 0) throw ConfigError("plant.map.c", "must be non-empty");
  const auto n = c.size();
  Vector grad = c;
  return custom(
      n, [c = std::move(c), offset](const Vector& z) { return c.dot(z) + offset; },
      [grad = std::move(grad)](const Vector&) { return grad; });
}

StaticMap StaticMap::custom(Eigen::Index dim, EvalFn eval, GradFn gradient,
                            std::optional<Optimum> optimum) {
  if (dim <= 0) throw ConfigError("plant.map", "dimension must be positive");
  if (!eval) throw ConfigError("plant.map", "missing evaluation function");
  if (optimum && optimum->z_star.size() != dim) {
    throw ConfigError("plant.map.z_star", "dimension mismatch");
  }
  StaticMap map;
  map.kind_ = Kind::kCustom;
  map.dim_ = dim;
  map.eval_ = std::move(eval);
  map.grad_ = std::move(gradient);
  map.optimum_ = std::move(optimum);
  return map;
}

void StaticMap::check_dim(const Vector& z) const {
  if (z.size() != dim_) {
    throw ConfigError("z", "expected dimension " + std::to_string(dim_) +
                               ", got " + std::to_string(z.size()));
  }
}

double StaticMap::eval(const Vector& z) const {
  check_dim(z);
  if (kind_ == Kind::kQuadratic) {
    const Vector d = z - optimum_->z_star;
    return optimum_->y_star + 0.5 * d.dot(H_ * d);
  }
  return eval_(z);
}

Vector StaticMap::gradient(const Vector& z) const {
  check_dim(z);
  if (kind_ == Kind::kQuadratic) return H_ * (z - optimum_->z_star);
  if (grad_) return grad_(z);
  return central_difference(eval_, z, fd_step_);
}

Vector central_difference(const std::function<double(const Vector&)>& f,
                          const Vector& at, double rel_step) {
  const double h = rel_step * std::max(1.0, at.norm());
  Vector g(at.size());
  Vector probe = at;
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    probe[i] = at[i] + h;
    const double fp = f(probe);
    probe[i] = at[i] - h;
    const double fm = f(probe);
    probe[i] = at[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// ---------------------------------------------------------------------------
// CascadePlant

CascadePlant::CascadePlant(LtiSubsystem lti, StaticMap map)
    : CascadePlant(lti, std::move(map), Vector::Zero(lti.input_dim()),
                   Vector::Zero(lti.state_dim())) {}

CascadePlant::CascadePlant(LtiSubsystem lti, StaticMap map, Vector v, Vector x)
    : lti_(std::move(lti)), map_(std::move(map)) {
  if (map_.dim() != lti_.state_dim()) {
    throw ConfigError("plant.map", "map dimension " + std::to_string(map_.dim()) +
                                       " does not match state dimension " +
                                       std::to_string(lti_.state_dim()));
  }
  dx_scratch_.resize(lti_.state_dim());
  set_state(std::move(v), std::move(x));
}

void CascadePlant::set_state(Vector v, Vector x) {
  if (v.size() != lti_.input_dim()) {
    throw ConfigError("sim.v0", "expected dimension " +
                                    std::to_string(lti_.input_dim()) + ", got " +
                                    std::to_string(v.size()));
  }
  if (x.size() != lti_.state_dim()) {
    throw ConfigError("sim.x0", "expected dimension " +
                                    std::to_string(lti_.state_dim()) + ", got " +
                                    std::to_string(x.size()));
  }
  v_ = std::move(v);
  x_ = std::move(x);
}

PlantRates CascadePlant::derivative(const Vector& u) const {
  if (u.size() != lti_.input_dim()) {
    throw ConfigError("u", "expected dimension " +
                               std::to_string(lti_.input_dim()) + ", got " +
                               std::to_string(u.size()));
  }
  PlantRates r;
  r.dv = u;
  r.dx = (lti_.A() * x_ + lti_.B() * v_) / lti_.time_scale();
  return r;
}

void CascadePlant::advance(const Vector& u, double dt) {
  // dx uses the pre-step v, matching derivative().
  dx_scratch_.noalias() = lti_.A() * x_;
  dx_scratch_.noalias() += lti_.B() * v_;
  x_ += (dt / lti_.time_scale()) * dx_scratch_;
  v_ += dt * u;
}

Vector CascadePlant::high_freq_gain(const Vector& z) const {
  return lti_.dc_gain().transpose() * map_.gradient(z);
}

// ---------------------------------------------------------------------------
// Hypotheses

bool HypothesisReport::ok() const {
  for (const auto& c : checks) {
    if (c.status == HypothesisCheck::Status::kFail) return false;
  }
  return true;
}

const HypothesisCheck* HypothesisReport::find(const std::string& id) const {
  for (const auto& c : checks) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

const char* to_string(HypothesisCheck::Status status) {
  switch (status) {
    case HypothesisCheck::Status::kPass: return "pass";
    case HypothesisCheck::Status::kFail: return "fail";
    case HypothesisCheck::Status::kAssumed: return "assumed";
  }
  return "?";
}

HypothesisReport check_hypotheses(const CascadePlant& plant,
                                  std::optional<double> L_h,
                                  std::optional<double> delta) {
  using Status = HypothesisCheck::Status;
  HypothesisReport report;

  report.checks.push_back({"H1", Status::kAssumed,
                           "parameters in a compact set; not machine-checkable"});
  report.checks.push_back(
      {"H2", Status::kAssumed,
       "h locally Lipschitz and continuously differentiable; not machine-checkable"});

  {
    std::ostringstream os;
    const double abscissa = plant.lti().spectral_abscissa();
    os << "max Re(eig(A)) = " << abscissa;
    report.checks.push_back({"H3",
                             abscissa < -kHurwitzMargin ? Status::kPass : Status::kFail,
                             os.str()});
  }

  const StaticMap& map = plant.map();
  if (map.kind() == StaticMap::Kind::kQuadratic) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(map.hessian(), Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    const Vector g = map.gradient(map.optimum()->z_star);
    const double scale = std::max(1.0, map.hessian().cwiseAbs().maxCoeff());
    const bool neg_def = top < -1e-12 * scale;
    const bool stationary = g.cwiseAbs().maxCoeff() == 0.0;
    std::ostringstream os;
    os << "max eig(H) = " << top << ", |grad h(z*)| = " << g.norm();
    if (!neg_def) os << " (H not negative definite)";
    report.checks.push_back(
        {"H4", neg_def && stationary ? Status::kPass : Status::kFail, os.str()});
  } else {
    report.checks.push_back(
        {"H4", Status::kAssumed, "custom map; unique maximum not machine-checkable"});
  }

  report.checks.push_back(
      {"H5", Status::kAssumed, "h radially unbounded; not machine-checkable"});

  {
    std::ostringstream os;
    os << "gradient lower bound outside the vicinity; not machine-checkable";
    if (L_h) os << "; L_h = " << *L_h;
    if (delta) os << "; delta = " << *delta;
    report.checks.push_back({"H6", Status::kAssumed, os.str()});
  }
  return report;
}

}  // namespace esc

#include "znekit/inference.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "znekit/errors.hpp"

namespace znekit {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string short_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

VectorXd to_vector(std::span<const double> v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::size_t distinct_count(std::span<const double> xs) {
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

bool all_equal(std::span<const double> ys) {
  return std::all_of(ys.begin(), ys.end(), [&](double y) { return y == ys.front(); });
}

double poly_eval(std::span<const double> coeffs, double x) {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) acc = coeffs[k] + x * acc;
  return acc;
}

MatrixXd vandermonde(std::span<const double> xs, int order) {
  MatrixXd v(static_cast<Eigen::Index>(xs.size()), order + 1);
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    double power = 1.0;
    for (int j = 0; j <= order; ++j) {
      v(i, j) = power;
      power *= xs[static_cast<std::size_t>(i)];
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Damped Gauss-Newton (Levenberg-Marquardt, Marquardt-scaled).

struct LmOutcome {
  VectorXd theta;
  double residual_norm = kInf;
  bool converged = false;
};

// eval fills r = y - f(theta) and J = df/dtheta; returns false on a
// non-finite evaluation (step gets rejected).
using LmEval = std::function<bool(const VectorXd&, VectorXd&, MatrixXd&)>;

LmOutcome run_levenberg_marquardt(const LmEval& eval, VectorXd theta, Eigen::Index num_points,
                                  int max_iterations = 200, double step_tolerance = 1e-10) {
  const Eigen::Index k = theta.size();
  VectorXd r(num_points);
  MatrixXd jac(num_points, k);
  LmOutcome out{theta, kInf, false};
  if (!eval(theta, r, jac)) return out;

  double cost = 0.5 * r.squaredNorm();
  MatrixXd jtj = jac.transpose() * jac;
  VectorXd grad = jac.transpose() * r;
  double mu = 1e-3 * std::max(jtj.diagonal().maxCoeff(), 1e-12);
  double nu = 2.0;
  bool converged = grad.lpNorm<Eigen::Infinity>() < 1e-14;

  for (int it = 0; it < max_iterations && !converged; ++it) {
    VectorXd damping = jtj.diagonal().cwiseMax(1e-12);
    MatrixXd a = jtj;
    a.diagonal() += mu * damping;
    const VectorXd delta = a.ldlt().solve(grad);
    if (!delta.allFinite()) {
      mu *= nu;
      nu *= 2.0;
      continue;
    }
    if (delta.norm() < step_tolerance) {
      converged = true;
      break;
    }
    const VectorXd theta_new = theta + delta;
    VectorXd r_new(num_points);
    MatrixXd jac_new(num_points, k);
    const bool finite = eval(theta_new, r_new, jac_new);
    const double cost_new = finite ? 0.5 * r_new.squaredNorm() : kInf;
    const double predicted = 0.5 * delta.dot(mu * damping.cwiseProduct(delta) + grad);
    if (finite && cost_new < cost) {
      const double rho = predicted > 0.0 ? (cost - cost_new) / predicted : 1.0;
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      theta = theta_new;
      r = r_new;
      jac = jac_new;
      cost = cost_new;
      jtj = jac.transpose() * jac;
      grad = jac.transpose() * r;
      converged = grad.lpNorm<Eigen::Infinity>() < 1e-14;
    } else {
      mu *= nu;
      nu *= 2.0;
      if (mu > 1e64) break;
    }
  }
  out.theta = theta;
  out.residual_norm = std::sqrt(2.0 * cost);
  out.converged = converged;
  return out;
}

// Model Jacobian builder for y = a + b exp(-c x); `fix_asymptote` drops the
// first column and treats theta = (b, c).
LmEval make_exp_eval(std::span<const double> xs, std::span<const double> ys,
                     std::optional<double> fixed_asymptote) {
  std::vector<double> x(xs.begin(), xs.end());
  std::vector<double> y(ys.begin(), ys.end());
  return [x, y, fixed_asymptote](const VectorXd& theta, VectorXd& r, MatrixXd& jac) {
    const bool fixed = fixed_asymptote.has_value();
    const double a = fixed ? *fixed_asymptote : theta[0];
    const double b = fixed ? theta[0] : theta[1];
    const double c = fixed ? theta[1] : theta[2];
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double arg = -c * x[i];
      if (arg > 700.0) return false;
      const double e = std::exp(arg);
      const double f = a + b * e;
      if (!std::isfinite(f)) return false;
      const auto row = static_cast<Eigen::Index>(i);
      r[row] = y[i] - f;
      Eigen::Index col = 0;
      if (!fixed) jac(row, col++) = 1.0;
      jac(row, col++) = e;
      jac(row, col) = -b * x[i] * e;
    }
    return true;
  };
}

double exp_residual_norm(std::span<const double> xs, std::span<const double> ys, double a,
                         double b, double c) {
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double diff = ys[i] - (a + b * std::exp(-c * xs[i]));
    ss += diff * diff;
  }
  return std::sqrt(ss);
}

// Linear subproblem for a fixed rate: least squares over (a, b) in the basis
// {1, exp(-c x)}.
bool solve_amplitudes_for_rate(std::span<const double> xs, std::span<const double> ys, double c,
                               double& a, double& b, double& residual_norm) {
  MatrixXd design(static_cast<Eigen::Index>(xs.size()), 2);
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = std::exp(-c * xs[static_cast<std::size_t>(i)]);
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(design);
  if (qr.rank() < 2) return false;
  const VectorXd sol = qr.solve(to_vector(ys));
  if (!sol.allFinite()) return false;
  a = sol[0];
  b = sol[1];
  residual_norm = (design * sol - to_vector(ys)).norm();
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Fitters.

std::vector<double> fit_polynomial(std::span<const double> xs, std::span<const double> ys,
                                   int order) {
  if (order < 0) throw ValidationError("polynomial order must be non-negative");
  if (xs.size() != ys.size()) throw ValidationError("xs and ys must have equal length");
  if (xs.size() < static_cast<std::size_t>(order) + 1) {
    throw InsufficientData("polynomial fit of order " + std::to_string(order) + " needs at least " +
                           std::to_string(order + 1) + " points, got " +
                           std::to_string(xs.size()));
  }
  const MatrixXd v = vandermonde(xs, order);
  Eigen::ColPivHouseholderQR<MatrixXd> qr(v);
  if (qr.rank() < order + 1) {
    throw SingularSystem("polynomial fit design matrix is rank deficient");
  }
  const VectorXd coeffs = qr.solve(to_vector(ys));
  return {coeffs.data(), coeffs.data() + coeffs.size()};
}

ExponentialFit fit_exponential(std::span<const double> xs, std::span<const double> ys,
                               std::optional<double> asymptote) {
  if (xs.size() != ys.size()) throw ValidationError("xs and ys must have equal length");
  const std::size_t min_points = asymptote ? 2 : 3;
  if (xs.size() < min_points) {
    throw InsufficientData("exponential fit needs at least " + std::to_string(min_points) +
                           " points, got " + std::to_string(xs.size()));
  }
  if (all_equal(ys)) {
    // Exact degenerate fit: flat data pins b = 0 and leaves the rate free.
    const double a = asymptote.value_or(ys.front());
    return {a, ys.front() - a, 1.0, 0.0};
  }

  if (asymptote) {
    const double a = *asymptote;
    bool all_positive = true;
    bool all_negative = true;
    for (double y : ys) {
      all_positive = all_positive && (y - a > 0.0);
      all_negative = all_negative && (y - a < 0.0);
    }
    if (all_positive || all_negative) {
      const double sign = all_positive ? 1.0 : -1.0;
      std::vector<double> logs(ys.size());
      for (std::size_t i = 0; i < ys.size(); ++i) logs[i] = std::log(sign * (ys[i] - a));
      const std::vector<double> line = fit_polynomial(xs, logs, 1);
      const double b = sign * std::exp(line[0]);
      const double c = -line[1];
      return {a, b, c, exp_residual_norm(xs, ys, a, b, c)};
    }
    // Shifted values change sign: nonlinear fallback over (b, c).
    VectorXd theta(2);
    theta << ys.front() - a, 1.0;
    const LmOutcome fit = run_levenberg_marquardt(make_exp_eval(xs, ys, a), theta,
                                                  static_cast<Eigen::Index>(xs.size()));
    if (!fit.converged) {
      throw DegenerateFit(
          "asymptote-shifted values change sign and the nonlinear fallback did not converge");
    }
    return {a, fit.theta[0], fit.theta[1], fit.residual_norm};
  }

  // Unknown asymptote: damped Gauss-Newton from a data-driven start.
  const double y_min = *std::min_element(ys.begin(), ys.end());
  const double y_max = *std::max_element(ys.begin(), ys.end());
  const bool decreasing = ys.front() >= ys.back();
  const double a0 = decreasing ? y_min : y_max;
  VectorXd theta(3);
  theta << a0, ys.front() - a0, 1.0;
  const LmEval eval = make_exp_eval(xs, ys, std::nullopt);
  const auto num_points = static_cast<Eigen::Index>(xs.size());
  LmOutcome best = run_levenberg_marquardt(eval, theta, num_points);

  // Coarse grid over the rate as fallback; each candidate solves (a, b)
  // linearly before polishing.
  double grid_a = 0.0;
  double grid_b = 0.0;
  double grid_c = 0.0;
  double grid_residual = kInf;
  for (int i = 1; i <= 30; ++i) {
    const double c = i / 10.0;
    double a = 0.0;
    double b = 0.0;
    double rn = 0.0;
    if (solve_amplitudes_for_rate(xs, ys, c, a, b, rn) && rn < grid_residual) {
      grid_a = a;
      grid_b = b;
      grid_c = c;
      grid_residual = rn;
    }
  }
  if (grid_residual < kInf && (!best.converged || grid_residual < 0.5 * best.residual_norm)) {
    VectorXd grid_theta(3);
    grid_theta << grid_a, grid_b, grid_c;
    const LmOutcome polished = run_levenberg_marquardt(eval, grid_theta, num_points);
    if (polished.converged &&
        (!best.converged || polished.residual_norm < best.residual_norm)) {
      best = polished;
    }
  }
  if (!best.converged) {
    throw NonConvergence("exponential fit exceeded its iteration budget");
  }
  if (y_max - y_min > 0.0 && !(kInf > best.residual_norm)) {
    throw NonConvergence("exponential fit diverged");
  }
  return {best.theta[0], best.theta[1], best.theta[2], best.residual_norm};
}

// ---------------------------------------------------------------------------
// Polynomial-exponent model y = a + sign * exp(q(x)).

namespace {

struct PolyExpFit {
  double asymptote = 0.0;
  double sign = 1.0;
  std::vector<double> exponent;
  double residual_norm = 0.0;
};

double poly_exp_value(const PolyExpFit& fit, double x) {
  return fit.asymptote + fit.sign * std::exp(poly_eval(fit.exponent, x));
}

double poly_exp_residual_norm(std::span<const double> xs, std::span<const double> ys,
                              const PolyExpFit& fit) {
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double diff = ys[i] - poly_exp_value(fit, xs[i]);
    ss += diff * diff;
  }
  return std::sqrt(ss);
}

LmEval make_poly_exp_eval(std::span<const double> xs, std::span<const double> ys, int order,
                          double sign, std::optional<double> fixed_asymptote) {
  std::vector<double> x(xs.begin(), xs.end());
  std::vector<double> y(ys.begin(), ys.end());
  return [x, y, order, sign, fixed_asymptote](const VectorXd& theta, VectorXd& r, MatrixXd& jac) {
    const bool fixed = fixed_asymptote.has_value();
    const double a = fixed ? *fixed_asymptote : theta[0];
    const int offset = fixed ? 0 : 1;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double q = 0.0;
      for (int k = order; k >= 0; --k) q = theta[offset + k] + x[i] * q;
      if (q > 700.0) return false;
      const double e = sign * std::exp(q);
      const auto row = static_cast<Eigen::Index>(i);
      r[row] = y[i] - (a + e);
      if (!fixed) jac(row, 0) = 1.0;
      double power = 1.0;
      for (int k = 0; k <= order; ++k) {
        jac(row, offset + k) = e * power;
        power *= x[i];
      }
    }
    return true;
  };
}

PolyExpFit fit_poly_exponential(std::span<const double> xs, std::span<const double> ys, int order,
                                std::optional<double> asymptote) {
  if (order < 1) throw ValidationError("poly-exponential order must be >= 1");
  if (all_equal(ys)) {
    const double a = asymptote.value_or(ys.front() - 1.0);
    PolyExpFit fit{a, ys.front() - a >= 0 ? 1.0 : -1.0, std::vector<double>(order + 1, 0.0), 0.0};
    fit.exponent[0] = std::log(std::abs(ys.front() - a));
    return fit;
  }

  if (asymptote) {
    const double a = *asymptote;
    bool all_positive = true;
    bool all_negative = true;
    for (double y : ys) {
      all_positive = all_positive && (y - a > 0.0);
      all_negative = all_negative && (y - a < 0.0);
    }
    if (all_positive || all_negative) {
      const double sign = all_positive ? 1.0 : -1.0;
      std::vector<double> logs(ys.size());
      for (std::size_t i = 0; i < ys.size(); ++i) logs[i] = std::log(sign * (ys[i] - a));
      PolyExpFit fit{a, sign, fit_polynomial(xs, logs, order), 0.0};
      fit.residual_norm = poly_exp_residual_norm(xs, ys, fit);
      return fit;
    }
    // Sign-changing shifted values: nonlinear with the asymptote pinned.
    const double sign = ys.front() - a >= 0 ? 1.0 : -1.0;
    VectorXd theta = VectorXd::Zero(order + 1);
    theta[0] = std::log(std::max(std::abs(ys.front() - a), 1e-9));
    const LmOutcome fit = run_levenberg_marquardt(make_poly_exp_eval(xs, ys, order, sign, a),
                                                  theta, static_cast<Eigen::Index>(xs.size()));
    if (!fit.converged) {
      throw DegenerateFit(
          "asymptote-shifted values change sign and the nonlinear fallback did not converge");
    }
    PolyExpFit result{a, sign, {fit.theta.data(), fit.theta.data() + fit.theta.size()}, 0.0};
    result.residual_norm = fit.residual_norm;
    return result;
  }

  // Unknown asymptote: initialize from a shifted log fit, then polish all
  // parameters jointly.
  const double y_min = *std::min_element(ys.begin(), ys.end());
  const double y_max = *std::max_element(ys.begin(), ys.end());
  const double spread = y_max - y_min;
  const bool decreasing = ys.front() >= ys.back();
  const double a0 = decreasing ? y_min - 0.05 * spread : y_max + 0.05 * spread;
  const double sign = decreasing ? 1.0 : -1.0;
  std::vector<double> logs(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) logs[i] = std::log(sign * (ys[i] - a0));
  const std::vector<double> q0 = fit_polynomial(xs, logs, order);
  VectorXd theta(order + 2);
  theta[0] = a0;
  for (int k = 0; k <= order; ++k) theta[k + 1] = q0[static_cast<std::size_t>(k)];
  const LmOutcome fit =
      run_levenberg_marquardt(make_poly_exp_eval(xs, ys, order, sign, std::nullopt), theta,
                              static_cast<Eigen::Index>(xs.size()));
  if (!fit.converged) {
    throw NonConvergence("poly-exponential fit exceeded its iteration budget");
  }
  PolyExpFit result{fit.theta[0], sign,
                    {fit.theta.data() + 1, fit.theta.data() + fit.theta.size()}, fit.residual_norm};
  return result;
}

// ---------------------------------------------------------------------------
// Reductions (model evaluated at scale factor zero).

/// Shared entry checks; engaged result means constant-data short circuit.
std::optional<ReduceResult> common_guards(std::span<const double> xs, std::span<const double> ys,
                                          std::size_t min_points, const std::string& model) {
  if (xs.size() != ys.size()) {
    throw ValidationError("history scale factors and values must have equal length");
  }
  if (xs.size() < min_points) {
    throw InsufficientData(model + " needs at least " + std::to_string(min_points) +
                           " points, got " + std::to_string(xs.size()));
  }
  if (distinct_count(xs) < 2) {
    throw InsufficientData(model + " needs at least two distinct scale factors");
  }
  for (double y : ys) {
    if (!std::isfinite(y)) throw ValidationError("expectation values must be finite");
  }
  if (all_equal(ys)) {
    ReduceResult result;
    result.zne_value = ys.front();
    result.diagnostics = {model, {ys.front()}, 0.0, 0.0, 0.0, true};
    return result;
  }
  return std::nullopt;
}

double intercept_std_error(const MatrixXd& jtj, const VectorXd& gradient, double sigma2) {
  const VectorXd u = jtj.ldlt().solve(gradient);
  const double var = sigma2 * gradient.dot(u);
  return std::isfinite(var) && var > 0.0 ? std::sqrt(var) : 0.0;
}

ReduceResult reduce_poly(std::span<const double> xs, std::span<const double> ys, int order,
                         const std::string& model) {
  if (auto shortcut = common_guards(xs, ys, static_cast<std::size_t>(order) + 1, model)) {
    return *shortcut;
  }
  const std::vector<double> coeffs = fit_polynomial(xs, ys, order);
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double diff = ys[i] - poly_eval(coeffs, xs[i]);
    ss += diff * diff;
  }
  const auto dof = static_cast<std::ptrdiff_t>(xs.size()) - (order + 1);
  const double sigma2 = dof > 0 ? ss / static_cast<double>(dof) : 0.0;

  const MatrixXd v = vandermonde(xs, order);
  VectorXd basis = VectorXd::Zero(order + 1);
  basis[0] = 1.0;  // intercept picks the constant coefficient

  ReduceResult result;
  result.zne_value = coeffs[0];
  result.diagnostics.model = model;
  result.diagnostics.params = coeffs;
  result.diagnostics.residual_norm = std::sqrt(ss);
  result.diagnostics.reduced_chi_square = sigma2;
  result.diagnostics.zne_std_error = intercept_std_error(v.transpose() * v, basis, sigma2);
  return result;
}

ReduceResult reduce_richardson(std::span<const double> xs, std::span<const double> ys,
                               bool three_points) {
  if (auto shortcut = common_guards(xs, ys, 2, "richardson")) return *shortcut;

  std::vector<double> nodes(xs.begin(), xs.end());
  std::vector<double> samples(ys.begin(), ys.end());
  if (three_points && nodes.size() > 3) {
    const std::size_t last = nodes.size() - 1;
    const std::size_t mid = nodes.size() / 2;
    nodes = {nodes[0], nodes[mid], nodes[last]};
    samples = {samples[0], samples[mid], samples[last]};
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (nodes[i] == nodes[j]) {
        throw DegenerateFit("duplicate scale factors in Richardson extrapolation");
      }
    }
  }

  // Newton divided differences, evaluated at zero.
  std::vector<double> coef = samples;
  const std::size_t m = coef.size();
  for (std::size_t j = 1; j < m; ++j) {
    for (std::size_t i = m - 1; i >= j; --i) {
      coef[i] = (coef[i] - coef[i - 1]) / (nodes[i] - nodes[i - j]);
    }
  }
  double value = coef[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) value = coef[i] + (0.0 - nodes[i]) * value;

  ReduceResult result;
  result.zne_value = value;
  result.diagnostics.model = "richardson";
  result.diagnostics.params = coef;  // Newton-form coefficients
  return result;
}

ReduceResult reduce_exp(std::span<const double> xs, std::span<const double> ys,
                        std::optional<double> asymptote, const std::string& model) {
  if (auto shortcut = common_guards(xs, ys, asymptote ? 2 : 3, model)) return *shortcut;
  const ExponentialFit fit = fit_exponential(xs, ys, asymptote);

  const int k = asymptote ? 2 : 3;
  const auto dof = static_cast<std::ptrdiff_t>(xs.size()) - k;
  const double ss = fit.residual_norm * fit.residual_norm;
  const double sigma2 = dof > 0 ? ss / static_cast<double>(dof) : 0.0;

  MatrixXd jac(static_cast<Eigen::Index>(xs.size()), k);
  for (Eigen::Index i = 0; i < jac.rows(); ++i) {
    const double x = xs[static_cast<std::size_t>(i)];
    const double e = std::exp(-fit.rate * x);
    Eigen::Index col = 0;
    if (!asymptote) jac(i, col++) = 1.0;
    jac(i, col++) = e;
    jac(i, col) = -fit.amplitude * x * e;
  }
  VectorXd basis = VectorXd::Zero(k);
  basis[0] = 1.0;
  if (!asymptote) basis[1] = 1.0;  // intercept a + b

  ReduceResult result;
  result.zne_value = fit.asymptote + fit.amplitude;
  result.diagnostics.model = model;
  result.diagnostics.params = {fit.asymptote, fit.amplitude, fit.rate};
  result.diagnostics.residual_norm = fit.residual_norm;
  result.diagnostics.reduced_chi_square = sigma2;
  result.diagnostics.zne_std_error = intercept_std_error(jac.transpose() * jac, basis, sigma2);
  return result;
}

ReduceResult reduce_poly_exp(std::span<const double> xs, std::span<const double> ys, int order,
                             std::optional<double> asymptote, const std::string& model) {
  if (auto shortcut = common_guards(xs, ys, static_cast<std::size_t>(order) + 2, model)) {
    return *shortcut;
  }
  const PolyExpFit fit = fit_poly_exponential(xs, ys, order, asymptote);

  const int k = (asymptote ? 0 : 1) + order + 1;
  const auto dof = static_cast<std::ptrdiff_t>(xs.size()) - k;
  const double ss = fit.residual_norm * fit.residual_norm;
  const double sigma2 = dof > 0 ? ss / static_cast<double>(dof) : 0.0;

  ReduceResult result;
  result.zne_value = poly_exp_value(fit, 0.0);
  result.diagnostics.model = model;
  result.diagnostics.params.push_back(fit.asymptote);
  result.diagnostics.params.push_back(fit.sign);
  result.diagnostics.params.insert(result.diagnostics.params.end(), fit.exponent.begin(),
                                   fit.exponent.end());
  result.diagnostics.residual_norm = fit.residual_norm;
  result.diagnostics.reduced_chi_square = sigma2;

  MatrixXd jac(static_cast<Eigen::Index>(xs.size()), k);
  for (Eigen::Index i = 0; i < jac.rows(); ++i) {
    const double x = xs[static_cast<std::size_t>(i)];
    const double e = fit.sign * std::exp(poly_eval(fit.exponent, x));
    Eigen::Index col = 0;
    if (!asymptote) jac(i, col++) = 1.0;
    double power = 1.0;
    for (int j = 0; j <= order; ++j) {
      jac(i, col++) = e * power;
      power *= x;
    }
  }
  VectorXd basis = VectorXd::Zero(k);
  const double e0 = fit.sign * std::exp(poly_eval(fit.exponent, 0.0));
  Eigen::Index col = 0;
  if (!asymptote) basis[col++] = 1.0;
  basis[col] = e0;
  result.diagnostics.zne_std_error = intercept_std_error(jac.transpose() * jac, basis, sigma2);
  return result;
}

}  // namespace

// ---------------------------------------------------------------------------
// FactorySpec.

FactorySpec FactorySpec::linear(std::vector<double> scales) {
  FactorySpec spec;
  spec.kind = Kind::Linear;
  spec.scale_factors = std::move(scales);
  return spec;
}

FactorySpec FactorySpec::richardson(std::vector<double> scales, bool three_points) {
  FactorySpec spec;
  spec.kind = Kind::Richardson;
  spec.scale_factors = std::move(scales);
  spec.richardson_three_points = three_points;
  return spec;
}

FactorySpec FactorySpec::poly(std::vector<double> scales, int order) {
  FactorySpec spec;
  spec.kind = Kind::Poly;
  spec.scale_factors = std::move(scales);
  spec.order = order;
  return spec;
}

FactorySpec FactorySpec::exponential(std::vector<double> scales, std::optional<double> asymptote) {
  FactorySpec spec;
  spec.kind = Kind::Exp;
  spec.scale_factors = std::move(scales);
  spec.asymptote = asymptote;
  return spec;
}

FactorySpec FactorySpec::poly_exponential(std::vector<double> scales, int order,
                                          std::optional<double> asymptote) {
  FactorySpec spec;
  spec.kind = Kind::PolyExp;
  spec.scale_factors = std::move(scales);
  spec.order = order;
  spec.asymptote = asymptote;
  return spec;
}

FactorySpec FactorySpec::ada_exponential(double scale_factor, int steps,
                                         std::optional<double> asymptote) {
  FactorySpec spec;
  spec.kind = Kind::AdaExp;
  spec.adaexp_scale_factor = scale_factor;
  spec.adaexp_steps = steps;
  spec.asymptote = asymptote;
  return spec;
}

namespace {

double parse_number(std::string_view text, std::string_view what) {
  try {
    std::size_t consumed = 0;
    const double v = std::stod(std::string(text), &consumed);
    if (consumed != text.size() || !std::isfinite(v)) throw std::invalid_argument("bad number");
    return v;
  } catch (const std::exception&) {
    throw ParseError("invalid " + std::string(what) + ": '" + std::string(text) + "'");
  }
}

int parse_int(std::string_view text, std::string_view what) {
  const double v = parse_number(text, what);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) {
    throw ParseError(std::string(what) + " must be an integer, got '" + std::string(text) + "'");
  }
  return i;
}

}  // namespace

FactorySpec FactorySpec::parse(std::string_view text, std::vector<double> scale_factors) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view args = colon == std::string_view::npos ? "" : text.substr(colon + 1);

  if (head == "linear") {
    if (!args.empty()) throw ParseError("linear takes no arguments");
    return linear(std::move(scale_factors));
  }
  if (head == "richardson") {
    if (!args.empty()) throw ParseError("richardson takes no arguments");
    return richardson(std::move(scale_factors));
  }
  if (head == "poly") {
    return poly(std::move(scale_factors), parse_int(args, "polynomial order"));
  }
  if (head == "exp") {
    std::optional<double> asymptote;
    if (colon != std::string_view::npos) asymptote = parse_number(args, "asymptote");
    return exponential(std::move(scale_factors), asymptote);
  }
  if (head == "polyexp") {
    return poly_exponential(std::move(scale_factors), parse_int(args, "polynomial order"));
  }
  if (head == "adaexp") {
    const auto comma = args.find(',');
    if (comma == std::string_view::npos) {
      throw ParseError("adaexp expects '<scale>,<steps>'");
    }
    return ada_exponential(parse_number(args.substr(0, comma), "adaexp scale factor"),
                           parse_int(args.substr(comma + 1), "adaexp steps"));
  }
  throw ParseError("unknown factory '" + std::string(text) + "'");
}

std::string FactorySpec::name() const {
  switch (kind) {
    case Kind::Linear:
      return "linear";
    case Kind::Richardson:
      return "richardson";
    case Kind::Poly:
      return "poly:" + std::to_string(order);
    case Kind::Exp:
      return asymptote ? "exp:" + short_double(*asymptote) : "exp";
    case Kind::PolyExp:
      return asymptote ? "polyexp:" + std::to_string(order) + ":" + short_double(*asymptote)
                       : "polyexp:" + std::to_string(order);
    case Kind::AdaExp:
      return "adaexp:" + short_double(adaexp_scale_factor) + "," + std::to_string(adaexp_steps);
  }
  return "unknown";
}

void FactorySpec::validate() const {
  if (kind == Kind::AdaExp) {
    if (!(adaexp_scale_factor > 1.0) || !std::isfinite(adaexp_scale_factor)) {
      throw ValidationError("adaexp scale factor must be > 1");
    }
    if (adaexp_steps < 3) throw ValidationError("adaexp needs at least 3 steps");
  } else {
    if (scale_factors.empty()) throw ValidationError("at least one scale factor is required");
    for (double s : scale_factors) {
      if (!(s >= 1.0) || !std::isfinite(s)) {
        throw ValidationError("scale factors must be >= 1, got " + short_double(s));
      }
    }
  }
  if (kind == Kind::Poly && order < 0) throw ValidationError("poly order must be >= 0");
  if (kind == Kind::PolyExp && order < 1) throw ValidationError("polyexp order must be >= 1");
  if (asymptote && !std::isfinite(*asymptote)) throw ValidationError("asymptote must be finite");
}

// ---------------------------------------------------------------------------
// Factory state machine.

bool Factory::is_done() const { return values_.size() >= planned_evaluations(); }

double Factory::next_scale() {
  if (is_done()) throw Exhausted("factory schedule is complete");
  if (!pending_) pending_ = schedule_next();
  return *pending_;
}

void Factory::push(double scale, double value) {
  if (is_done()) throw Exhausted("factory schedule is complete");
  if (!pending_) pending_ = schedule_next();
  if (scale != *pending_) {
    throw ScaleMismatch("pushed scale " + short_double(scale) + " does not match scheduled " +
                        short_double(*pending_));
  }
  scales_.push_back(scale);
  values_.push_back(value);
  pending_.reset();
}

ReduceResult Factory::reduce() const {
  if (!is_done()) {
    throw InsufficientData("factory has not completed its schedule");
  }
  return do_reduce();
}

namespace {

class StaticFactory : public Factory {
 public:
  explicit StaticFactory(FactorySpec spec) : spec_(std::move(spec)) { spec_.validate(); }

 protected:
  std::size_t planned_evaluations() const override { return spec_.scale_factors.size(); }
  double schedule_next() const override { return spec_.scale_factors[values().size()]; }
  ReduceResult do_reduce() const override {
    return reduce_history(spec_, scale_factors(), values());
  }

  FactorySpec spec_;
};

class AdaExpFactory : public Factory {
 public:
  explicit AdaExpFactory(FactorySpec spec) : spec_(std::move(spec)) { spec_.validate(); }

 protected:
  std::size_t planned_evaluations() const override {
    return static_cast<std::size_t>(spec_.adaexp_steps);
  }

  double schedule_next() const override {
    const std::size_t n = values().size();
    if (n == 0) return 1.0;
    if (n == 1) return spec_.adaexp_scale_factor;
    return adaptive_next();
  }

  ReduceResult do_reduce() const override {
    return reduce_history(spec_, scale_factors(), values());
  }

 private:
  /// Next scale factor from the grid {1.0, 1.1, ..., 2*scale_factor + 1},
  /// minimizing the predicted variance of the intercept estimator under the
  /// current model Jacobian with unit-variance observations. Deterministic;
  /// ties break toward the smaller scale; an unusable fit falls back to the
  /// top of the grid.
  double adaptive_next() const {
    const double lambda_max = 2.0 * spec_.adaexp_scale_factor + 1.0;
    ExponentialFit fit;
    try {
      fit = fit_exponential(scale_factors(), values(), spec_.asymptote);
    } catch (const FitError&) {
      return lambda_max;
    }
    const bool known = spec_.asymptote.has_value();
    const int k = known ? 2 : 3;
    VectorXd basis = VectorXd::Zero(k);
    basis[0] = 1.0;
    if (!known) basis[1] = 1.0;

    const int candidates = static_cast<int>(std::floor((lambda_max - 1.0) / 0.1 + 0.5));
    double best_scale = lambda_max;
    double best_variance = kInf;
    for (int step = 0; step <= candidates; ++step) {
      const double candidate = 1.0 + 0.1 * step;
      std::vector<double> points(scale_factors().begin(), scale_factors().end());
      points.push_back(candidate);
      MatrixXd jac(static_cast<Eigen::Index>(points.size()), k);
      for (Eigen::Index i = 0; i < jac.rows(); ++i) {
        const double x = points[static_cast<std::size_t>(i)];
        const double e = std::exp(-fit.rate * x);
        Eigen::Index col = 0;
        if (!known) jac(i, col++) = 1.0;
        jac(i, col++) = e;
        jac(i, col) = -fit.amplitude * x * e;
      }
      MatrixXd jtj = jac.transpose() * jac;
      jtj.diagonal().array() += 1e-12;
      const VectorXd u = jtj.ldlt().solve(basis);
      const double variance = basis.dot(u);
      if (std::isfinite(variance) && variance < best_variance) {
        best_variance = variance;
        best_scale = candidate;
      }
    }
    return best_scale;
  }

  FactorySpec spec_;
};

}  // namespace

std::unique_ptr<Factory> make_factory(const FactorySpec& spec) {
  spec.validate();
  if (spec.kind == FactorySpec::Kind::AdaExp) {
    return std::make_unique<AdaExpFactory>(spec);
  }
  return std::make_unique<StaticFactory>(spec);
}

ReduceResult reduce_history(const FactorySpec& spec, std::span<const double> xs,
                            std::span<const double> ys) {
  spec.validate();
  for (double x : xs) {
    if (!(x >= 1.0) || !std::isfinite(x)) {
      throw ValidationError("history scale factors must be >= 1, got " + short_double(x));
    }
  }
  switch (spec.kind) {
    case FactorySpec::Kind::Linear:
      return reduce_poly(xs, ys, 1, "linear");
    case FactorySpec::Kind::Richardson:
      return reduce_richardson(xs, ys, spec.richardson_three_points);
    case FactorySpec::Kind::Poly:
      return reduce_poly(xs, ys, spec.order, spec.name());
    case FactorySpec::Kind::Exp:
      return reduce_exp(xs, ys, spec.asymptote, spec.name());
    case FactorySpec::Kind::PolyExp:
      return reduce_poly_exp(xs, ys, spec.order, spec.asymptote, spec.name());
    case FactorySpec::Kind::AdaExp:
      return reduce_exp(xs, ys, spec.asymptote, spec.name());
  }
  throw ValidationError("unknown factory kind");
}

}  // namespace znekit

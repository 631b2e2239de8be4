#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace znekit {

/// Fit record attached to every zero-noise estimate. The intercept at scale
/// factor zero always lies outside the data range, hence extrapolation_only.
struct FitDiagnostics {
  std::string model;
  std::vector<double> params;
  double residual_norm = 0.0;
  double reduced_chi_square = 0.0;
  /// Model-based standard error of the intercept under unit-variance
  /// observations scaled by the residual; zero for exact interpolation.
  double zne_std_error = 0.0;
  bool extrapolation_only = true;
};

struct ReduceResult {
  double zne_value = 0.0;
  FitDiagnostics diagnostics;
};

/// Least-squares polynomial coefficients c0..c_order (ascending powers).
/// Throws InsufficientData for too few points and SingularSystem when the
/// design matrix is rank deficient (e.g. duplicate xs at full order).
std::vector<double> fit_polynomial(std::span<const double> xs, std::span<const double> ys,
                                   int order);

/// Exponential model y = a + b * exp(-c * x).
struct ExponentialFit {
  double asymptote = 0.0;
  double amplitude = 0.0;
  double rate = 0.0;
  double residual_norm = 0.0;
};

/// With a known asymptote, fits log|y - a| linearly in x when the shifted
/// values share a sign and falls back to damped Gauss-Newton otherwise. With
/// an unknown asymptote, runs damped Gauss-Newton from a data-driven start,
/// with a coarse grid over the rate as fallback.
ExponentialFit fit_exponential(std::span<const double> xs, std::span<const double> ys,
                               std::optional<double> asymptote);

/// Inference-technique selector plus its parameters; the value-type
/// counterpart of a Factory, used for configuration and CLI parsing.
struct FactorySpec {
  enum class Kind { Linear, Richardson, Poly, Exp, PolyExp, AdaExp };

  Kind kind = Kind::Richardson;
  std::vector<double> scale_factors = {1.0, 2.0, 3.0};
  int order = 2;                          // Poly / PolyExp
  std::optional<double> asymptote;        // Exp / PolyExp / AdaExp
  double adaexp_scale_factor = 2.0;       // AdaExp second scale
  int adaexp_steps = 5;                   // AdaExp evaluation budget
  bool richardson_three_points = false;   // use only first/middle/last point

  static FactorySpec linear(std::vector<double> scales);
  static FactorySpec richardson(std::vector<double> scales, bool three_points = false);
  static FactorySpec poly(std::vector<double> scales, int order);
  static FactorySpec exponential(std::vector<double> scales,
                                 std::optional<double> asymptote = std::nullopt);
  static FactorySpec poly_exponential(std::vector<double> scales, int order,
                                      std::optional<double> asymptote = std::nullopt);
  static FactorySpec ada_exponential(double scale_factor, int steps,
                                     std::optional<double> asymptote = std::nullopt);

  /// Parses the CLI grammar:
  /// linear | richardson | poly:<d> | exp[:asymptote] | polyexp:<d> |
  /// adaexp:<scale>,<steps>. Static kinds adopt `scale_factors`.
  static FactorySpec parse(std::string_view text, std::vector<double> scale_factors);

  /// Canonical short name, e.g. "poly:2" or "exp:0.25".
  std::string name() const;

  void validate() const;
};

/// Stateful inference object: schedules noise scale factors, records
/// (scale, value) pairs, and extrapolates the recorded history to the
/// zero-noise limit. Purely classical; single-owner mutable state.
class Factory {
 public:
  virtual ~Factory() = default;

  bool is_done() const;

  /// Next scheduled scale factor. Idempotent until the matching push.
  /// Throws Exhausted once the schedule is complete.
  double next_scale();

  /// Records one evaluation. The scale must match the most recent
  /// next_scale() (ScaleMismatch otherwise).
  void push(double scale, double value);

  /// Zero-noise extrapolation over the recorded history. Requires a
  /// completed schedule and at least two distinct scale factors; identical
  /// values short-circuit to the constant.
  ReduceResult reduce() const;

  const std::vector<double>& scale_factors() const { return scales_; }
  const std::vector<double>& values() const { return values_; }

 protected:
  virtual std::size_t planned_evaluations() const = 0;
  virtual double schedule_next() const = 0;
  virtual ReduceResult do_reduce() const = 0;

 private:
  std::optional<double> pending_;
  std::vector<double> scales_;
  std::vector<double> values_;
};

std::unique_ptr<Factory> make_factory(const FactorySpec& spec);

/// Extrapolates recorded data directly (the `fit` CLI path). AdaExp reduces
/// with the exponential model it would have used online.
ReduceResult reduce_history(const FactorySpec& spec, std::span<const double> xs,
                            std::span<const double> ys);

}  // namespace znekit

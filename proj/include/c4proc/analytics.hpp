#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "c4proc/log_real.hpp"

// Closed-form trajectory functions of the C4-free process and numeric checks
// of the inequalities the trajectory analysis depends on. "log" is natural
// log throughout.
namespace c4proc::analytics {

/// The free constants (mu, eps, V, W, beta, kappa).
struct ConstantInputs {
  double mu = 1.0;
  double eps = 0.01;
  double V = 40.0;
  double W = 0.0;  // <= 0 selects minimal_w(V)
  double beta = 1.0;
  double kappa = 0.0;  // <= 0 selects 4 mu + beta
};

/// 640 e^{2V} / (V log 2): the smallest W the constraint list admits.
[[nodiscard]] double minimal_w(double V);
/// 640 e^{2V} V / log 2: the W the two-case Y+ argument actually uses.
[[nodiscard]] double case_analysis_w(double V);
/// Largest mu with W mu^3 <= eps / 4, so e^{P(t_max)} <= n^{eps/2} once n is large.
[[nodiscard]] double strict_mode_mu(double W, double eps);

/// Constants plus the n-derived quantities. n may be astronomically large, so
/// it is carried as log n; `n` itself is only meaningful when is_finite_n().
struct TrajectoryConstants {
  double mu = 1.0;
  double eps = 0.01;
  double V = 40.0;
  double W = 0.0;
  double beta = 1.0;
  double kappa = 0.0;
  double log_n = 0.0;
  std::uint64_t n = 0;  // 0 when only log_n is known

  [[nodiscard]] static TrajectoryConstants for_n(std::uint64_t n, const ConstantInputs& in = {});
  [[nodiscard]] static TrajectoryConstants for_log_n(double log_n, const ConstantInputs& in = {});

  [[nodiscard]] bool is_finite_n() const { return n != 0; }

  // Log-domain derived quantities, valid for any n.
  [[nodiscard]] double log_p() const { return -2.0 / 3.0 * log_n; }
  [[nodiscard]] double log_s() const { return 4.0 / 3.0 * log_n; }
  [[nodiscard]] double log_m() const { return std::log(mu) + std::log(log_n) / 3.0 + log_s(); }
  [[nodiscard]] double t_max() const { return mu * std::cbrt(log_n); }
  [[nodiscard]] double log_s_e() const { return (1.0 / 8.0 - eps) * log_n; }
  [[nodiscard]] double log_k() const;  // log of ceil(beta (n log n)^{1/3})
  [[nodiscard]] double log_s_j() const { return 3.0 * eps * log_n; }
  [[nodiscard]] double log_S1() const { return 2.0 * log_k() + log_n; }
  [[nodiscard]] double log_S2() const { return 2.0 * log_k() + log_n + log_p(); }

  // Plain values for desk-scale n.
  [[nodiscard]] double p() const;
  [[nodiscard]] double s() const;
  [[nodiscard]] double m() const;
  [[nodiscard]] double s_e() const;
  [[nodiscard]] std::uint64_t k() const;  // ceil(beta (n log n)^{1/3})
  [[nodiscard]] double s_j() const;
  [[nodiscard]] double S1() const;
  [[nodiscard]] double S2() const;
  [[nodiscard]] double time_of(std::uint64_t step) const { return static_cast<double>(step) / s(); }

  [[nodiscard]] nlohmann::json to_json() const;
};

enum class Fn {
  q, c, P, e, x, y, x_plus, x_minus, y_plus, y_minus, gamma, theta, gamma_prime, h1, h2,
  x_prime, y_prime
};

[[nodiscard]] const char* name(Fn f);

/// Plain double evaluation; functions containing e^{P(t)} overflow to inf
/// when W is large. Throws std::domain_error for t < 0.
[[nodiscard]] double eval(Fn f, double t, const TrajectoryConstants& c);
/// Log-domain evaluation, finite for every constant set.
[[nodiscard]] LogReal eval_log(Fn f, double t, const TrajectoryConstants& c);

enum class Observable { Q, degree, c_uv, x_k, y_k };

[[nodiscard]] const char* name(Observable o);

/// Trajectory prediction: the center and the interval the error envelope allows.
struct Interval {
  double center = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  [[nodiscard]] double half_width() const;
};

/// Predicted value of an observable after `step` edges. Requires a finite n
/// and step <= m; otherwise throws std::out_of_range.
[[nodiscard]] Interval predicted_value(Observable o, std::uint64_t step, const TrajectoryConstants& c);

// ---------------------------------------------------------------------------
// Verification reports.

struct Violation {
  double t = 0.0;
  double lhs = 0.0;  // natural log of |lhs| when the check is log-domain
  double rhs = 0.0;
  std::string detail;
};

struct CheckResult {
  std::string name;
  bool log_domain = false;
  std::size_t grid_points_checked = 0;
  std::vector<Violation> violations;
  double worst = 0.0;  // largest residual, or the tightest log margin for inequalities

  [[nodiscard]] bool passed() const { return violations.empty(); }
};

struct VerificationReport {
  std::string mode;
  std::vector<CheckResult> checks;

  [[nodiscard]] bool passed() const;
  [[nodiscard]] const CheckResult* find(const std::string& name) const;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// 0, step, 2 step, ... up to and including hi.
[[nodiscard]] std::vector<double> uniform_grid(double lo, double hi, double step);

/// x' = x+ - x- and y' = y+ - y- by central differences with spacing h.
[[nodiscard]] VerificationReport check_derivative_identities(const std::vector<double>& t_grid, double tol,
                                                             double h = 1e-6);

/// Same, plus h1 = (xe + gamma)' and h2 = (ye + gamma)' (relative residual).
/// Only meaningful for constants where e^{P(t)} fits in a double.
[[nodiscard]] VerificationReport check_derivative_identities(const std::vector<double>& t_grid, double tol,
                                                             const TrajectoryConstants& c, double h = 1e-6);

/// The trend inequalities for open triples and partial triples, with their
/// intermediate lower bounds on h1 and h2, in log domain. The case boundary
/// t = V/W is always added to the grid.
[[nodiscard]] VerificationReport check_trend_inequalities(const TrajectoryConstants& c,
                                                          const std::vector<double>& t_grid);

/// The two-case argument for the Y+ trend (t < V/W and t >= V/W), each
/// sub-bound checked on its own region of the grid, boundary included.
[[nodiscard]] VerificationReport check_case_analysis(const TrajectoryConstants& c,
                                                     const std::vector<double>& t_grid);

/// Grid in the scaled variable a = tW over [0, a_max]: resolves the layer
/// t ~ 1/W that a grid of fixed spacing in t skips over.
[[nodiscard]] std::vector<double> boundary_layer_grid(const TrajectoryConstants& c, double a_max = 100.0,
                                                      double a_step = 0.05);

struct ConstantsCheckOptions {
  double grid_step = 0.01;
  double C = 10.0;  // the "sufficiently large" constant bounding x+-, x', int |x''|
};

/// Every listed constant constraint and derived inequality, at the given n.
/// Checks are named "structural:*" when independent of n and "asymptotic:*"
/// when they depend on n.
[[nodiscard]] VerificationReport check_constants(const TrajectoryConstants& c,
                                                 const ConstantsCheckOptions& options = {});

/// Names of the strict-mode constraints the constants violate (empty in strict mode).
[[nodiscard]] std::vector<std::string> strict_mode_violations(const TrajectoryConstants& c);

/// (1/10)(n/d)(log d - log(h/n)/2). Requires d > 1 and h > 0.
[[nodiscard]] double independence_lower_bound(double n, double d, double h);

}  // namespace c4proc::analytics

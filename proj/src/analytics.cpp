#include "c4proc/analytics.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace c4proc::analytics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 640 e^{2V}, the rate inside gamma.
double gamma_rate(double V) { return std::exp(std::log(640.0) + 2.0 * V); }

double P_of(double t, const TrajectoryConstants& c) { return c.W * (t * t * t + t); }
double P_prime(double t, const TrajectoryConstants& c) { return c.W * (3.0 * t * t + 1.0); }

LogReal L(double v) { return LogReal::from(v); }
// exp(small) with a moderate exponent.
LogReal Ls(double small) { return LogReal::from_parts(1, 0.0, small); }

void require_nonnegative(double t) {
  if (!(t >= 0.0)) throw std::domain_error("trajectory functions are defined for t >= 0");
}

}  // namespace

double minimal_w(double V) { return 640.0 * std::exp(2.0 * V) / (V * std::numbers::ln2); }
double case_analysis_w(double V) { return 640.0 * std::exp(2.0 * V) * V / std::numbers::ln2; }
double strict_mode_mu(double W, double eps) { return std::cbrt(eps / (4.0 * W)); }

// ---------------------------------------------------------------------------

namespace {
TrajectoryConstants base_constants(const ConstantInputs& in) {
  if (!(in.mu > 0 && in.eps > 0 && in.V > 0 && in.beta > 0))
    throw std::invalid_argument("constants: mu, eps, V and beta must be positive");
  TrajectoryConstants c;
  c.mu = in.mu;
  c.eps = in.eps;
  c.V = in.V;
  c.W = in.W > 0 ? in.W : minimal_w(in.V);
  c.beta = in.beta;
  c.kappa = in.kappa > 0 ? in.kappa : 4.0 * in.mu + in.beta;
  return c;
}
}  // namespace

TrajectoryConstants TrajectoryConstants::for_n(std::uint64_t n, const ConstantInputs& in) {
  if (n < 2) throw std::invalid_argument("constants: n must be at least 2");
  TrajectoryConstants c = base_constants(in);
  c.n = n;
  c.log_n = std::log(static_cast<double>(n));
  return c;
}

TrajectoryConstants TrajectoryConstants::for_log_n(double log_n, const ConstantInputs& in) {
  if (!(log_n > 0)) throw std::invalid_argument("constants: log n must be positive");
  TrajectoryConstants c = base_constants(in);
  c.log_n = log_n;
  // Keep n when it is representable, so desk-scale quantities stay available.
  if (log_n < 43.0) c.n = static_cast<std::uint64_t>(std::llround(std::exp(log_n)));
  return c;
}

double TrajectoryConstants::log_k() const {
  if (is_finite_n()) return std::log(static_cast<double>(k()));
  return std::log(beta) + (log_n + std::log(log_n)) / 3.0;
}

namespace {
void require_finite(const TrajectoryConstants& c) {
  if (!c.is_finite_n()) throw std::logic_error("constants: quantity needs a finite n");
}
}  // namespace

double TrajectoryConstants::p() const {
  require_finite(*this);
  return std::pow(static_cast<double>(n), -2.0 / 3.0);
}
double TrajectoryConstants::s() const {
  require_finite(*this);
  return std::pow(static_cast<double>(n), 4.0 / 3.0);
}
double TrajectoryConstants::m() const { return mu * std::cbrt(log_n) * s(); }
double TrajectoryConstants::s_e() const {
  require_finite(*this);
  return std::pow(static_cast<double>(n), 1.0 / 8.0 - eps);
}
std::uint64_t TrajectoryConstants::k() const {
  require_finite(*this);
  const double raw = beta * std::cbrt(static_cast<double>(n) * log_n);
  return static_cast<std::uint64_t>(std::ceil(raw - 1e-12 * raw));
}
double TrajectoryConstants::s_j() const {
  require_finite(*this);
  return std::pow(static_cast<double>(n), 3.0 * eps);
}
double TrajectoryConstants::S1() const {
  const double kk = static_cast<double>(k());
  return kk * kk * static_cast<double>(n);
}
double TrajectoryConstants::S2() const { return S1() * p(); }

nlohmann::json TrajectoryConstants::to_json() const {
  nlohmann::json j = {{"mu", mu}, {"eps", eps}, {"V", V}, {"W", W}, {"beta", beta}, {"kappa", kappa},
                      {"log_n", log_n}, {"t_max", t_max()}};
  if (is_finite_n()) {
    j["n"] = n;
    j["p"] = p();
    j["m"] = m();
    j["s"] = s();
    j["s_e"] = s_e();
    j["k"] = k();
  }
  return j;
}

// ---------------------------------------------------------------------------

const char* name(Fn f) {
  switch (f) {
    case Fn::q: return "q";
    case Fn::c: return "c";
    case Fn::P: return "P";
    case Fn::e: return "e";
    case Fn::x: return "x";
    case Fn::y: return "y";
    case Fn::x_plus: return "x_plus";
    case Fn::x_minus: return "x_minus";
    case Fn::y_plus: return "y_plus";
    case Fn::y_minus: return "y_minus";
    case Fn::gamma: return "gamma";
    case Fn::theta: return "theta";
    case Fn::gamma_prime: return "gamma_prime";
    case Fn::h1: return "h1";
    case Fn::h2: return "h2";
    case Fn::x_prime: return "x_prime";
    case Fn::y_prime: return "y_prime";
  }
  return "?";
}

double eval(Fn f, double t, const TrajectoryConstants& c) {
  require_nonnegative(t);
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double q = std::exp(-8.0 * t3);
  const double rate = gamma_rate(c.V);
  switch (f) {
    case Fn::q: return q;
    case Fn::c: return 24.0 * t2 * q;
    case Fn::P: return P_of(t, c);
    case Fn::e: return std::expm1(P_of(t, c));
    case Fn::x: return q * q / 2.0;
    case Fn::y: return 2.0 * t * q;
    case Fn::x_plus: return 0.0;
    case Fn::x_minus: return 24.0 * t2 * q * q;
    case Fn::y_plus: return 2.0 * q;
    case Fn::y_minus: return 48.0 * t3 * q;
    case Fn::gamma: return -0.25 * std::expm1(-rate * t);
    case Fn::theta: return 0.5 - 0.25 * std::expm1(-rate * t);
    case Fn::gamma_prime: return std::exp(std::log(160.0) + 2.0 * c.V - rate * t);
    case Fn::x_prime: return -48.0 * t2 * (q * q / 2.0);
    case Fn::y_prime: return (2.0 - 48.0 * t3) * q;
    case Fn::h1: {
      const double x = q * q / 2.0;
      const double P = P_of(t, c);
      return eval(Fn::x_prime, t, c) * std::expm1(P) + x * P_prime(t, c) * std::exp(P) +
             eval(Fn::gamma_prime, t, c);
    }
    case Fn::h2: {
      const double y = 2.0 * t * q;
      const double P = P_of(t, c);
      return eval(Fn::y_prime, t, c) * std::expm1(P) + y * P_prime(t, c) * std::exp(P) +
             eval(Fn::gamma_prime, t, c);
    }
  }
  throw std::invalid_argument("eval: unknown function");
}

LogReal eval_log(Fn f, double t, const TrajectoryConstants& c) {
  require_nonnegative(t);
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double log_t = t > 0 ? std::log(t) : 0.0;
  const auto nonzero_at = [&](double small) { return t > 0 ? Ls(small) : LogReal{}; };
  const double rate = gamma_rate(c.V);
  switch (f) {
    case Fn::q: return Ls(-8.0 * t3);
    case Fn::c: return nonzero_at(std::log(24.0) + 2.0 * log_t - 8.0 * t3);
    case Fn::P: return L(P_of(t, c));
    case Fn::e: {
      const double P = P_of(t, c);
      // Below 1 the subtraction would cancel; expm1 is exact there.
      if (P < 1.0) return L(std::expm1(P));
      return LogReal::exp(P) - L(1.0);
    }
    case Fn::x: return Ls(-16.0 * t3 - std::numbers::ln2);
    case Fn::y: return nonzero_at(std::numbers::ln2 + log_t - 8.0 * t3);
    case Fn::x_plus: return {};
    case Fn::x_minus: return nonzero_at(std::log(24.0) + 2.0 * log_t - 16.0 * t3);
    case Fn::y_plus: return Ls(std::numbers::ln2 - 8.0 * t3);
    case Fn::y_minus: return nonzero_at(std::log(48.0) + 3.0 * log_t - 8.0 * t3);
    case Fn::gamma: return L(-0.25 * std::expm1(-rate * t));
    case Fn::theta: return L(0.5 - 0.25 * std::expm1(-rate * t));
    case Fn::gamma_prime: return LogReal::from_parts(1, -rate * t, std::log(160.0) + 2.0 * c.V);
    case Fn::x_prime: return -nonzero_at(std::log(24.0) + 2.0 * log_t - 16.0 * t3);
    case Fn::y_prime: return L(2.0 - 48.0 * t3) * Ls(-8.0 * t3);
    case Fn::h1:
      return eval_log(Fn::x_prime, t, c) * eval_log(Fn::e, t, c) +
             eval_log(Fn::x, t, c) * L(P_prime(t, c)) * LogReal::exp(P_of(t, c)) +
             eval_log(Fn::gamma_prime, t, c);
    case Fn::h2:
      return eval_log(Fn::y_prime, t, c) * eval_log(Fn::e, t, c) +
             eval_log(Fn::y, t, c) * L(P_prime(t, c)) * LogReal::exp(P_of(t, c)) +
             eval_log(Fn::gamma_prime, t, c);
  }
  throw std::invalid_argument("eval_log: unknown function");
}

// ---------------------------------------------------------------------------

const char* name(Observable o) {
  switch (o) {
    case Observable::Q: return "Q";
    case Observable::degree: return "degree";
    case Observable::c_uv: return "c_uv";
    case Observable::x_k: return "X_K";
    case Observable::y_k: return "Y_K";
  }
  return "?";
}

double Interval::half_width() const { return std::max(hi - center, center - lo); }

namespace {
// {(1 + a r)(f + b w) : a, b in [-1, 1]} * scale, as an interval.
Interval envelope(double center_f, double r, double w, double scale) {
  Interval out;
  out.center = center_f * scale;
  if (!std::isfinite(r)) {
    out.lo = -kInf;
    out.hi = kInf;
    return out;
  }
  const double f_lo = center_f - w;
  const double f_hi = center_f + w;
  const double corners[] = {(1 - r) * f_lo, (1 - r) * f_hi, (1 + r) * f_lo, (1 + r) * f_hi};
  out.lo = *std::min_element(std::begin(corners), std::end(corners)) * scale;
  out.hi = *std::max_element(std::begin(corners), std::end(corners)) * scale;
  return out;
}
}  // namespace

Interval predicted_value(Observable o, std::uint64_t step, const TrajectoryConstants& c) {
  if (!c.is_finite_n()) throw std::out_of_range("predicted_value: n must be finite");
  if (static_cast<double>(step) > c.m()) throw std::out_of_range("predicted_value: step beyond m");
  const double n = static_cast<double>(c.n);
  const double t = c.time_of(step);
  const double e = eval(Fn::e, t, c);
  const double se = c.s_e();
  const double sj = c.s_j();
  const double p = c.p();
  const double kk = static_cast<double>(c.k());
  switch (o) {
    case Observable::Q: return envelope(eval(Fn::q, t, c), e / se, 1.0 / se, n * n / 2.0);
    case Observable::degree: return envelope(2.0 * t, e / se, 1.0 / se, n * p);
    case Observable::c_uv: return envelope(eval(Fn::c, t, c), e / se, 12.0 / se, 1.0 / (2.0 * p));
    case Observable::x_k: return envelope(eval(Fn::x, t, c), e / sj, 1.0 / sj, kk * kk * n);
    case Observable::y_k: return envelope(eval(Fn::y, t, c), e / sj, 1.0 / sj, kk * kk * n * p);
  }
  throw std::invalid_argument("predicted_value: unknown observable");
}

// ---------------------------------------------------------------------------

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& r) { return r.passed(); });
}

const CheckResult* VerificationReport::find(const std::string& name) const {
  for (const auto& r : checks)
    if (r.name == name) return &r;
  return nullptr;
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json out;
  out["mode"] = mode;
  out["passed"] = passed();
  out["checks"] = nlohmann::json::array();
  for (const auto& r : checks) {
    nlohmann::json v = nlohmann::json::array();
    for (const auto& x : r.violations)
      v.push_back({{"t", x.t}, {"lhs", x.lhs}, {"rhs", x.rhs}, {"detail", x.detail}});
    out["checks"].push_back({{"name", r.name},
                             {"log_domain", r.log_domain},
                             {"grid_points_checked", r.grid_points_checked},
                             {"worst", r.worst},
                             {"violations", v}});
  }
  return out;
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0) || hi < lo) throw std::invalid_argument("uniform_grid: bad range");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  out.reserve(count + 2);
  for (std::size_t i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
  if (hi - out.back() > 1e-9 * step) out.push_back(hi);
  return out;
}

namespace {

// Central difference, switching to the second-order one-sided stencil near 0.
template <typename F>
double difference(F&& f, double t, double h) {
  if (t >= h) return (f(t + h) - f(t - h)) / (2.0 * h);
  return (-3.0 * f(t) + 4.0 * f(t + h) - f(t + 2.0 * h)) / (2.0 * h);
}

// One Richardson step on top; gamma is stiff (rate 640e^{2V}) and the plain
// stencil's h^2 term alone exceeds 1e-6 there.
template <typename F>
double derivative(F&& f, double t, double h) {
  return (4.0 * difference(f, t, h / 2.0) - difference(f, t, h)) / 3.0;
}

template <typename F, typename G>
CheckResult fd_check(const std::string& name, const std::vector<double>& grid, double tol, double h, F&& f,
                     G&& df, bool relative) {
  CheckResult r;
  r.name = name;
  for (double t : grid) {
    const double fd = derivative(f, t, h);
    const double exact = df(t);
    double res = std::fabs(fd - exact);
    if (relative) res /= std::max(1.0, std::fabs(exact));
    r.worst = std::max(r.worst, res);
    ++r.grid_points_checked;
    if (!(res <= tol)) r.violations.push_back({t, fd, exact, "residual " + std::to_string(res)});
  }
  return r;
}

}  // namespace

VerificationReport check_derivative_identities(const std::vector<double>& t_grid, double tol, double h) {
  // The x, y identities do not involve V or W.
  const TrajectoryConstants c = TrajectoryConstants::for_n(1000);
  VerificationReport rep;
  rep.mode = "identities";
  const auto f = [&](Fn fn) { return [&c, fn](double t) { return eval(fn, t, c); }; };
  const auto diff = [&](Fn a, Fn b) { return [&c, a, b](double t) { return eval(a, t, c) - eval(b, t, c); }; };

  rep.checks.push_back(fd_check("x' = x+ - x-", t_grid, tol, h, f(Fn::x), diff(Fn::x_plus, Fn::x_minus), false));
  rep.checks.push_back(fd_check("y' = y+ - y-", t_grid, tol, h, f(Fn::y), diff(Fn::y_plus, Fn::y_minus), false));

  // Closed-form derivatives against the +/- split.
  for (const auto& [label, prime, plus, minus] :
       {std::tuple{"x'(t) + 24t^2 q(t)^2 = 0", Fn::x_prime, Fn::x_plus, Fn::x_minus},
        std::tuple{"y'(t) = 2q - 48t^3 q", Fn::y_prime, Fn::y_plus, Fn::y_minus}}) {
    CheckResult r;
    r.name = label;
    for (double t : t_grid) {
      const double res = std::fabs(eval(prime, t, c) - (eval(plus, t, c) - eval(minus, t, c)));
      r.worst = std::max(r.worst, res);
      ++r.grid_points_checked;
      if (!(res <= tol)) r.violations.push_back({t, eval(prime, t, c), eval(plus, t, c) - eval(minus, t, c), ""});
    }
    rep.checks.push_back(std::move(r));
  }
  return rep;
}

VerificationReport check_derivative_identities(const std::vector<double>& t_grid, double tol,
                                               const TrajectoryConstants& c, double h) {
  VerificationReport rep = check_derivative_identities(t_grid, tol, h);
  const auto xe_gamma = [&c](double t) {
    return eval(Fn::x, t, c) * eval(Fn::e, t, c) + eval(Fn::gamma, t, c);
  };
  const auto ye_gamma = [&c](double t) {
    return eval(Fn::y, t, c) * eval(Fn::e, t, c) + eval(Fn::gamma, t, c);
  };
  const auto gamma = [&c](double t) { return eval(Fn::gamma, t, c); };
  rep.checks.push_back(fd_check("gamma' (closed form)", t_grid, tol, h, gamma,
                                [&c](double t) { return eval(Fn::gamma_prime, t, c); }, true));
  rep.checks.push_back(
      fd_check("h1 = (xe + gamma)'", t_grid, tol, h, xe_gamma, [&c](double t) { return eval(Fn::h1, t, c); }, true));
  rep.checks.push_back(
      fd_check("h2 = (ye + gamma)'", t_grid, tol, h, ye_gamma, [&c](double t) { return eval(Fn::h2, t, c); }, true));
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

struct Terms {
  double t;
  LogReal T, q, x, y, e, eP, gp, h1, h2;
};

Terms terms_at(double t, const TrajectoryConstants& c) {
  Terms s;
  s.t = t;
  s.T = L(t);
  s.q = eval_log(Fn::q, t, c);
  s.x = eval_log(Fn::x, t, c);
  s.y = eval_log(Fn::y, t, c);
  s.e = eval_log(Fn::e, t, c);
  s.eP = LogReal::exp(P_of(t, c));
  s.gp = eval_log(Fn::gamma_prime, t, c);
  s.h1 = eval_log(Fn::h1, t, c);
  s.h2 = eval_log(Fn::h2, t, c);
  return s;
}

// Records lhs <= rhs (or lhs < rhs when strict) at one grid point.
void record(CheckResult& r, double t, const LogReal& lhs, const LogReal& rhs, bool strict = false,
            double slack = 0.0) {
  r.log_domain = true;
  const int cmp = compare(lhs, rhs);
  // Division subtracts the big exponents exactly.
  const double margin = lhs.is_zero() ? kInf : (rhs.abs() / lhs.abs()).log_abs();
  const bool ok = strict ? cmp < 0 : (cmp <= 0 || (slack > 0.0 && rhs.sign() == lhs.sign() && margin >= -slack));
  if (r.grid_points_checked == 0 || margin < r.worst) r.worst = margin;
  ++r.grid_points_checked;
  if (!ok) r.violations.push_back({t, lhs.log_abs(), rhs.log_abs(), "lhs and rhs are natural logs"});
}

// Log-margin allowance for a bound that is tight at a grid point.
constexpr double kEqualitySlack = 1e-12;

// The floating-point neighbours of V/W on either side.
std::pair<double, double> boundary_points(const TrajectoryConstants& c) {
  double lo = c.V / c.W;
  double hi = lo;
  while (c.W * lo > c.V) lo = std::nextafter(lo, 0.0);
  while (c.W * hi < c.V) hi = std::nextafter(hi, kInf);
  return {lo, hi};
}

std::vector<double> with_boundary(std::vector<double> grid, const TrajectoryConstants& c) {
  const auto [lo, hi] = boundary_points(c);
  grid.push_back(lo);
  grid.push_back(hi);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace

VerificationReport check_trend_inequalities(const TrajectoryConstants& c, const std::vector<double>& t_grid) {
  VerificationReport rep;
  rep.mode = "inequalities";
  const std::vector<double> grid = with_boundary(t_grid, c);
  const char* names[] = {
      "open_trend: 288t^2xe + 48t^2 + 3 <= h1/4",
      "h1_lower_bound: h1 >= W(t^2+1)xe^P",
      "open_trend_sufficient: (384t^2+6)xe^P <= (W/4)(t^2+1)xe^P",
      "open_trend_unit: 1 <= 2xe^P",
      "partial_plus_trend: 8qe + 4/q + 8 < h2/4",
      "h2_lower_bound: h2 >= 2W(t^3+t)qe^P + gamma'",
      "partial_minus_trend: 288t^3qe + 26t^2 + 2 <= h2/4",
      "partial_minus_majorant: 288t^3qe + 26t^2 + 2 <= 314(t^3+t)qe^P + 2",
      "partial_minus_sufficient: 2 <= (W/4)(t^3+t)qe^P + gamma'/4",
  };
  rep.checks.resize(std::size(names));
  for (std::size_t i = 0; i < std::size(names); ++i) rep.checks[i].name = names[i];

  const LogReal W = L(c.W);
  const LogReal quarter = L(0.25);
  for (double t : grid) {
    const Terms s = terms_at(t, c);
    const LogReal t2 = L(t * t);
    const LogReal t3pt = L(t * t * t + t);
    const LogReal x_eP = s.x * s.eP;
    const LogReal q_eP = s.q * s.eP;

    record(rep.checks[0], t, L(288.0) * t2 * s.x * s.e + L(48.0) * t2 + L(3.0), s.h1 * quarter);
    record(rep.checks[1], t, W * L(t * t + 1.0) * x_eP, s.h1);
    record(rep.checks[2], t, L(384.0 * t * t + 6.0) * x_eP, quarter * W * L(t * t + 1.0) * x_eP);
    record(rep.checks[3], t, L(1.0), L(2.0) * x_eP);
    record(rep.checks[4], t, L(8.0) * s.q * s.e + L(4.0) / s.q + L(8.0), s.h2 * quarter, true);
    record(rep.checks[5], t, L(2.0) * W * t3pt * q_eP + s.gp, s.h2);
    const LogReal minus_lhs = L(288.0 * t * t * t) * s.q * s.e + L(26.0) * t2 + L(2.0);
    record(rep.checks[6], t, minus_lhs, s.h2 * quarter);
    record(rep.checks[7], t, minus_lhs, L(314.0) * t3pt * q_eP + L(2.0));
    record(rep.checks[8], t, L(2.0), quarter * W * t3pt * q_eP + s.gp * quarter);
  }
  return rep;
}

VerificationReport check_case_analysis(const TrajectoryConstants& c, const std::vector<double>& t_grid) {
  VerificationReport rep;
  rep.mode = "case_analysis";
  const auto [below, above] = boundary_points(c);
  const std::vector<double> grid = with_boundary(t_grid, c);
  const char* names[] = {
      "small_t: e^P <= e^{2V}",
      "small_t: 8qe + 4/q + 8 <= 20qe^P",
      "small_t: gamma'/4 >= 20e^{2V}",
      "large_t: (W/2)tqe^P >= (V/2)qe^P",
      "large_t: (V/2)qe^P >= 8qe + 4/q + 8",
      "large_t: (W/4)(t^3+t)qe^P >= V/4 >= 2",
  };
  rep.checks.resize(std::size(names));
  for (std::size_t i = 0; i < std::size(names); ++i) rep.checks[i].name = names[i];

  const LogReal W = L(c.W);
  const LogReal V = L(c.V);
  const LogReal e2V = Ls(2.0 * c.V);
  for (double t : grid) {
    const Terms s = terms_at(t, c);
    const LogReal q_eP = s.q * s.eP;
    const LogReal lhs = L(8.0) * s.q * s.e + L(4.0) / s.q + L(8.0);
    if (t <= below) {
      record(rep.checks[0], t, s.eP, e2V);
      record(rep.checks[1], t, lhs, L(20.0) * q_eP);
      // Equality at t = V/W when W = case_analysis_w(V).
      record(rep.checks[2], t, L(20.0) * e2V, s.gp * L(0.25), false, kEqualitySlack);
    }
    if (t >= above) {
      // Wt formed as one product so t = V/W compares equal, not below.
      record(rep.checks[3], t, V * L(0.5) * q_eP, L(c.W * t) * L(0.5) * q_eP);
      record(rep.checks[4], t, lhs, V * L(0.5) * q_eP);
      const LogReal big = W * L(0.25) * L(t * t * t + t) * q_eP;
      record(rep.checks[5], t, V * L(0.25), big);
      record(rep.checks[5], t, L(2.0), V * L(0.25));
    }
  }
  return rep;
}

std::vector<double> boundary_layer_grid(const TrajectoryConstants& c, double a_max, double a_step) {
  std::vector<double> out;
  for (double a : uniform_grid(0.0, a_max, a_step)) out.push_back(a / c.W);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

CheckResult scalar(const std::string& name, double margin, bool strict, const std::string& detail = "") {
  CheckResult r;
  r.name = name;
  r.grid_points_checked = 1;
  r.worst = margin;
  const bool ok = strict ? margin > 0 : margin >= 0;
  if (!ok) r.violations.push_back({0.0, 0.0, margin, detail.empty() ? "margin below zero" : detail});
  return r;
}

// sup over the grid of |f|, and the trapezoid integral of |f|.
template <typename F>
std::pair<double, double> sup_and_integral(F&& f, double hi, double step) {
  double sup = 0, integral = 0, prev = std::fabs(f(0.0));
  sup = prev;
  for (double t : uniform_grid(step, hi, step)) {
    const double cur = std::fabs(f(t));
    sup = std::max(sup, cur);
    integral += 0.5 * (prev + cur) * step;
    prev = cur;
  }
  return {sup, integral};
}

}  // namespace

VerificationReport check_constants(const TrajectoryConstants& c, const ConstantsCheckOptions& options) {
  VerificationReport rep;
  rep.mode = "constants";
  auto& out = rep.checks;
  const double Ln = c.log_n;
  const double eps = c.eps;

  // n-independent constraints.
  out.push_back(scalar("structural: V >= 40", c.V - 40.0, false));
  out.push_back(scalar("structural: W >= 640e^{2V}/(V log 2)", std::log(c.W) - std::log(minimal_w(c.V)), false));
  out.push_back(scalar("structural: eps <= 1/100", 1.0 / 100.0 - eps, false));
  out.push_back(scalar("structural: eps <= 1/96", 1.0 / 96.0 - eps, false));
  out.push_back(scalar("structural: beta > 4/mu^2", std::log(c.beta) - std::log(4.0) + 2.0 * std::log(c.mu), true));
  out.push_back(scalar("structural: mu < eps", eps - c.mu, true));
  out.push_back(scalar("structural: W >= 4*384 = 1544", c.W - 1544.0, false));
  out.push_back(scalar("structural: W >= 4*314 = 1256", c.W - 1256.0, false));
  out.push_back(scalar("structural: 48 <= 2W", 2.0 * c.W - 48.0, false));
  out.push_back(scalar("structural: V >= 8", c.V - 8.0, false));
  out.push_back(scalar("structural: gamma(0) = 0", -std::fabs(eval(Fn::gamma, 0.0, c)), false));

  // inf over t >= 0 of theta + e x/2 - gamma/2 > 1/4, for x and for y. The
  // infimum sits at small t; a grid over [0, 4] and the layer t ~ 1/W covers it.
  {
    std::vector<double> grid = uniform_grid(0.0, 4.0, options.grid_step);
    const auto layer = boundary_layer_grid(c, 50.0, 0.5);
    const double rate_scale = 1.0 / gamma_rate(c.V);
    grid.insert(grid.end(), layer.begin(), layer.end());
    for (double a = 0; a <= 20.0; a += 0.5) grid.push_back(a * rate_scale);
    std::sort(grid.begin(), grid.end());
    for (const auto& [label, fn] : {std::pair{"structural: inf theta + e x/2 - gamma/2 > 1/4", Fn::x},
                                    std::pair{"structural: inf theta + e y/2 - gamma/2 > 1/4", Fn::y}}) {
      CheckResult r;
      r.name = label;
      for (double t : grid) {
        const LogReal lhs = eval_log(Fn::theta, t, c) + eval_log(Fn::e, t, c) * eval_log(fn, t, c) * L(0.5) -
                            eval_log(Fn::gamma, t, c) * L(0.5);
        record(r, t, L(0.25), lhs, true);
      }
      out.push_back(std::move(r));
    }
  }

  // sup |x+-|, |y+-|, |x'|, |y'| and int |x''|, |y''| over [0, inf) below C.
  // q(4) = e^{-512}, so [0, 4] carries everything.
  {
    const double C = options.C;
    const auto x2 = [](double t) { return std::exp(-16.0 * t * t * t) / 2.0 * (2304.0 * std::pow(t, 4) - 96.0 * t); };
    const auto y2 = [](double t) { return std::exp(-8.0 * t * t * t) * (1152.0 * std::pow(t, 5) - 192.0 * t * t); };
    const auto f = [&c](Fn fn) { return [&c, fn](double t) { return eval(fn, t, c); }; };
    const double step = 1e-4;
    struct Item { const char* name; double value; };
    const Item items[] = {
        {"structural: sup |x+| < C", sup_and_integral(f(Fn::x_plus), 4.0, step).first},
        {"structural: sup |x-| < C", sup_and_integral(f(Fn::x_minus), 4.0, step).first},
        {"structural: sup |y+| < C", sup_and_integral(f(Fn::y_plus), 4.0, step).first},
        {"structural: sup |y-| < C", sup_and_integral(f(Fn::y_minus), 4.0, step).first},
        {"structural: sup |x'| < C", sup_and_integral(f(Fn::x_prime), 4.0, step).first},
        {"structural: sup |y'| < C", sup_and_integral(f(Fn::y_prime), 4.0, step).first},
        {"structural: int |x''| < C", sup_and_integral(x2, 4.0, step).second},
        {"structural: int |y''| < C", sup_and_integral(y2, 4.0, step).second},
    };
    for (const auto& it : items) out.push_back(scalar(it.name, C - it.value, true, "value " + std::to_string(it.value)));
  }

  // The inequality chain on [0, t_max].
  const double t_max = c.t_max();
  const std::vector<double> grid = uniform_grid(0.0, t_max, std::min(options.grid_step, std::max(t_max, 1e-300)));
  {
    const char* names[] = {
        "asymptotic: chain 1 <= 1/q",
        "asymptotic: chain 1/q <= q^2 e^P",
        "asymptotic: chain q^2 e^P <= q e^P",
        "asymptotic: chain q e^P <= e^P",
        "asymptotic: chain e^P <= n^eps",
        "asymptotic: e^P <= n^{eps/2}",
        "asymptotic: q s_e >= n^{5 eps}",
        "asymptotic: sup_{[0,t_max]} |h1| < n^eps",
        "asymptotic: sup_{[0,t_max]} |h2| < n^eps",
    };
    std::vector<CheckResult> chain(std::size(names));
    for (std::size_t i = 0; i < chain.size(); ++i) chain[i].name = names[i];
    const LogReal n_eps = LogReal::exp(eps * Ln);
    const LogReal n_eps_half = LogReal::exp(eps * Ln / 2.0);
    for (double t : grid) {
      const LogReal q = eval_log(Fn::q, t, c);
      const LogReal eP = LogReal::exp(P_of(t, c));
      record(chain[0], t, L(1.0), L(1.0) / q);
      record(chain[1], t, L(1.0) / q, q * q * eP);
      record(chain[2], t, q * q * eP, q * eP);
      record(chain[3], t, q * eP, eP);
      record(chain[4], t, eP, n_eps);
      record(chain[5], t, eP, n_eps_half);
      // log(q s_e) - 5 eps log n, formed without cancelling large logs.
      const double margin = -8.0 * t * t * t + (1.0 / 8.0 - 6.0 * eps) * Ln;
      record(chain[6], t, L(1.0), Ls(margin));
      record(chain[7], t, eval_log(Fn::h1, t, c).abs(), n_eps, true);
      record(chain[8], t, eval_log(Fn::h2, t, c).abs(), n_eps, true);
    }
    for (auto& r : chain) out.push_back(std::move(r));

    // int_0^{t_max} |h_j'| as the total variation of h_j over the grid.
    for (const auto& [label, fn] : {std::pair{"asymptotic: int_0^{t_max} |h1'| < n^eps", Fn::h1},
                                    std::pair{"asymptotic: int_0^{t_max} |h2'| < n^eps", Fn::h2}}) {
      LogReal tv;
      LogReal prev = eval_log(fn, grid.front(), c);
      for (std::size_t i = 1; i < grid.size(); ++i) {
        const LogReal cur = eval_log(fn, grid[i], c);
        tv += (cur - prev).abs();
        prev = cur;
      }
      CheckResult r;
      r.name = label;
      record(r, t_max, tv, n_eps, true);
      out.push_back(std::move(r));
    }
  }

  // n-dependent parameter relations, each margin written as log(rhs) - log(lhs).
  const double log_k = c.log_k();
  const double log_t_max = std::log(t_max);
  out.push_back(scalar("asymptotic: n^{1/3} <= k", log_k - Ln / 3.0, false));
  out.push_back(scalar("asymptotic: k <= n^{1/3+eps}", (1.0 / 3.0 + eps) * Ln - log_k, false));
  out.push_back(scalar("asymptotic: k > n^{9 eps}", log_k - 9.0 * eps * Ln, true));
  out.push_back(scalar("asymptotic: n^{3 eps} < s", (4.0 / 3.0 - 3.0 * eps) * Ln, true));
  out.push_back(scalar("asymptotic: s < m", log_t_max, true));
  out.push_back(scalar("asymptotic: m < n^2", 2.0 / 3.0 * Ln - log_t_max, true));
  out.push_back(scalar("asymptotic: m <= n^{eps/2} s", eps / 2.0 * Ln - log_t_max, false));
  out.push_back(scalar("asymptotic: s >= 40 C s_j^2 k n^eps",
                       (4.0 / 3.0 - 7.0 * eps) * Ln - std::log(40.0 * options.C) - log_k, false));
  out.push_back(scalar("asymptotic: n^{2 eps} <= s_j", eps * Ln, false));
  out.push_back(scalar("asymptotic: s_j < n^{-eps} s", (4.0 / 3.0 - 4.0 * eps) * Ln, true));
  return rep;
}

std::vector<std::string> strict_mode_violations(const TrajectoryConstants& c) {
  std::vector<std::string> out;
  if (!(c.V >= 40.0)) out.emplace_back("V >= 40");
  if (!(c.W >= minimal_w(c.V))) out.emplace_back("W >= 640e^{2V}/(V log 2)");
  if (!(c.eps <= 1.0 / 100.0)) out.emplace_back("eps <= 1/100");
  if (!(std::log(c.beta) > std::log(4.0) - 2.0 * std::log(c.mu))) out.emplace_back("beta > 4/mu^2");
  if (!(c.mu < c.eps)) out.emplace_back("0 < mu << eps");
  return out;
}

double independence_lower_bound(double n, double d, double h) {
  if (!(d > 1.0)) throw std::domain_error("independence_lower_bound: d must exceed 1");
  if (!(h > 0.0)) throw std::domain_error("independence_lower_bound: h must be positive");
  if (!(n > 0.0)) throw std::domain_error("independence_lower_bound: n must be positive");
  return 0.1 * (n / d) * (std::log(d) - 0.5 * std::log(h / n));
}

}  // namespace c4proc::analytics

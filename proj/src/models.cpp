#include "hadamard/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hadamard/errors.hpp"
#include "hadamard/grid.hpp"

namespace hadamard {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double param(const json& p, const char* key) {
  if (!p.contains(key)) throw ConstraintViolation(std::string("missing parameter '") + key + "'");
  if (!p.at(key).is_number()) throw ConstraintViolation(std::string("parameter '") + key + "' must be a number");
  return p.at(key).get<double>();
}

double param_or(const json& p, const char* key, double fallback) {
  return p.contains(key) ? param(p, key) : fallback;
}

// x coth x, smooth through 0.
double x_coth_x(double x) {
  if (std::abs(x) < 1e-4) return 1.0 + x * x / 3.0;
  if (std::abs(x) > 20.0) return std::abs(x);
  return x / std::tanh(x);
}

double d_x_coth_x(double x) {
  if (std::abs(x) < 1e-4) return 2.0 * x / 3.0;
  if (std::abs(x) > 350.0) return std::copysign(1.0, x);
  const double s = std::sinh(x);
  return 1.0 / std::tanh(x) - x / (s * s);
}

double log_cosh(double t) {
  const double at = std::abs(t);
  return at + std::log1p(std::exp(-2.0 * at)) - std::numbers::ln2;
}

CurvatureProfile constant_model(const json& p) {
  const double k = param_or(p, "k", 1.0);
  if (!(k >= 0.0)) throw ConstraintViolation("constant model needs k >= 0");
  auto f = RadialFunction::constant(k);
  return {f, f, param_or(p, "r_star", 0.0), std::nullopt};
}

CurvatureProfile euclidean_model(const json& p) {
  auto f = RadialFunction::constant(0.0);
  return {f, f, param_or(p, "r_star", 0.0), std::nullopt};
}

// a^2 = (1+eps)/(t^2 log t), b^2 = (log t)^(2 eps_tilde)/t^2 beyond r_star.
CurvatureProfile log_pinched_model(const json& p) {
  const double eps = param(p, "eps");
  const double eps_tilde = param(p, "eps_tilde");
  const double r_star = param(p, "r_star");
  const std::optional<double> core =
      p.contains("core_k") ? std::optional<double>(param(p, "core_k")) : std::nullopt;
  if (!(eps > eps_tilde)) throw ConstraintViolation("log-pinched needs eps > eps_tilde");
  if (!(eps_tilde > 0.0)) throw ConstraintViolation("log-pinched needs eps_tilde > 0");
  if (!(r_star > 1.0)) throw ConstraintViolation("log-pinched needs r_star > 1");
  const double lr = std::log(r_star);
  if (std::pow(lr, 1.0 + 2.0 * eps_tilde) < 1.0 + eps)
    throw ConstraintViolation("log-pinched needs b >= a at r_star: (log r_star)^(1+2 eps_tilde) >= 1+eps");
  if (core && !(*core >= 0.0)) throw ConstraintViolation("log-pinched needs core_k >= 0");

  const double ca = std::sqrt(1.0 + eps);
  auto a_tail = [ca](double t) { return ca / (t * std::sqrt(std::log(t))); };
  auto b_tail = [eps_tilde](double t) { return std::pow(std::log(t), eps_tilde) / t; };
  const double a_in = core ? *core : a_tail(r_star);
  const double b_in = core ? *core : b_tail(r_star);

  RadialFunction::Analytic a;
  a.value = [=](double t) { return t < r_star ? a_in : a_tail(t); };
  a.derivative = [=](double t) {
    if (t < r_star) return 0.0;
    const double l = std::log(t);
    return -a_tail(t) / t * (1.0 + 0.5 / l);
  };
  a.log_value_log_arg = [=](double s) {
    if (s < lr) return std::log(a_in);
    return 0.5 * std::log(1.0 + eps) - s - 0.5 * std::log(s);
  };
  a.monotonicity = a_in >= a_tail(r_star) ? Monotonicity::decreasing : Monotonicity::none;
  a.breakpoints = {r_star};

  RadialFunction::Analytic b;
  b.value = [=](double t) { return t < r_star ? b_in : b_tail(t); };
  b.derivative = [=](double t) {
    if (t < r_star) return 0.0;
    return b_tail(t) / t * (eps_tilde / std::log(t) - 1.0);
  };
  b.log_value_log_arg = [=](double s) {
    if (s < lr) return std::log(b_in);
    return eps_tilde * std::log(s) - s;
  };
  // b decreases beyond e^eps_tilde, which r_star > e^eps_tilde guarantees here.
  b.monotonicity = (b_in >= b_tail(r_star) && lr >= eps_tilde) ? Monotonicity::decreasing
                                                               : Monotonicity::none;
  b.breakpoints = {r_star};
  return {RadialFunction::analytic(std::move(a)), RadialFunction::analytic(std::move(b)), r_star,
          std::nullopt};
}

// f_a = sinh(sinh t) paired with a super-exponential upper root.
CurvatureProfile superexp_model(const json& p) {
  const double c = param_or(p, "c", 1.0);
  const double eps = param_or(p, "eps", 0.1);
  const double t_max = param_or(p, "t_max", 140.0);
  if (!(c > 0.0)) throw ConstraintViolation("superexp needs c > 0");
  if (!(eps > 0.0)) throw ConstraintViolation("superexp needs eps > 0");
  if (!(t_max > 0.0 && t_max <= 140.0)) throw ConstraintViolation("superexp needs 0 < t_max <= 140");
  const double e3 = std::exp(3.0);

  auto log_a = [](double t) {
    const double x = std::sinh(t);
    const double lc = log_cosh(t);
    return 0.5 * (2.0 * lc + std::log1p(x_coth_x(x) * std::exp(-2.0 * lc)));
  };
  RadialFunction::Analytic a;
  a.value = [=](double t) { return std::exp(log_a(t)); };
  a.log_value = log_a;
  a.derivative = [=](double t) {
    const double x = std::sinh(t), ch = std::cosh(t);
    const double g_prime = d_x_coth_x(x) * ch + 2.0 * ch * x;
    return g_prime / (2.0 * std::exp(log_a(t)));
  };
  a.t_max = t_max;
  a.monotonicity = Monotonicity::increasing;

  auto log_b = [=](double t) { return 0.5 * std::log(c) + (1.0 - 0.5 * eps) * t + 0.5 * std::exp(t / e3); };
  RadialFunction::Analytic b;
  b.value = [=](double t) { return std::exp(log_b(t)); };
  b.log_value = log_b;
  b.derivative = [=](double t) {
    return std::exp(log_b(t)) * ((1.0 - 0.5 * eps) + std::exp(t / e3) / (2.0 * e3));
  };
  b.t_max = t_max;
  b.monotonicity = eps <= 2.0 ? Monotonicity::increasing : Monotonicity::none;

  for (double t : linear_grid(0.0, t_max, 2801))
    if (log_b(t) < log_a(t))
      throw ConstraintViolation("superexp needs b >= a; violated at t=" + std::to_string(t));
  return {RadialFunction::analytic(std::move(a)), RadialFunction::analytic(std::move(b)),
          param_or(p, "r_star", 0.0), std::nullopt};
}

// f = sinh iterated m times; a^2 = f''/f through the chain rule.
struct IterateState {
  double a2, a2_prime;
};

IterateState sinh_iterate(int m, double t) {
  double h = t, h1 = 1.0, h2 = 0.0, a2 = 0.0, a2p = 0.0;
  for (int j = 0; j < m; ++j) {
    const double xc = x_coth_x(h), dxc = d_x_coth_x(h);
    const double na2 = h1 * h1 + xc * a2;
    const double na2p = 2.0 * h1 * h2 + dxc * h1 * a2 + xc * a2p;
    const double sh = std::sinh(h), ch = std::cosh(h);
    const double nh1 = ch * h1;
    const double nh2 = sh * h1 * h1 + ch * h2;
    h = sh;
    h1 = nh1;
    h2 = nh2;
    a2 = na2;
    a2p = na2p;
  }
  return {a2, a2p};
}

CurvatureProfile sinh_iterate_model(const json& p) {
  const double m_raw = param_or(p, "m", 2.0);
  const int m = static_cast<int>(m_raw);
  if (m < 1 || m != m_raw || m > 4) throw ConstraintViolation("sinh-iterate needs integer m in [1, 4]");
  const double scale = param_or(p, "b_scale", 1.0);
  if (!(scale >= 1.0)) throw ConstraintViolation("sinh-iterate needs b_scale >= 1");
  double t_max = param_or(p, "t_max", 0.0);
  if (t_max <= 0.0) {
    t_max = 0.0;
    for (double t = 0.01; t < 1000.0; t += 0.01) {
      const auto st = sinh_iterate(m, t);
      if (!std::isfinite(st.a2) || !std::isfinite(st.a2_prime)) break;
      t_max = t;
    }
    t_max = std::floor(t_max * 0.9 * 100.0) / 100.0;
  }
  auto make = [=](double factor) {
    RadialFunction::Analytic f;
    f.value = [=](double t) { return factor * std::sqrt(sinh_iterate(m, t).a2); };
    f.derivative = [=](double t) {
      const auto st = sinh_iterate(m, t);
      return factor * st.a2_prime / (2.0 * std::sqrt(st.a2));
    };
    f.t_max = t_max;
    f.monotonicity = Monotonicity::increasing;
    return RadialFunction::analytic(std::move(f));
  };
  return {make(1.0), make(scale), param_or(p, "r_star", 0.0), std::nullopt};
}

Monotonicity declared(const json& g, const char* key) {
  if (!g.contains(key)) return Monotonicity::none;
  return monotonicity_from_string(g.at(key).get<std::string>());
}

CurvatureProfile grid_model(const json& g) {
  for (const char* key : {"t", "a", "b"})
    if (!g.contains(key) || !g.at(key).is_array())
      throw ConstraintViolation(std::string("grid model needs array '") + key + "'");
  const auto t = g.at("t").get<std::vector<double>>();
  auto a = RadialFunction::sampled(t, g.at("a").get<std::vector<double>>(), declared(g, "a_monotonicity"));
  auto b = RadialFunction::sampled(t, g.at("b").get<std::vector<double>>(), declared(g, "b_monotonicity"));
  CurvatureProfile prof{a, b, g.value("r_star", 0.0), std::nullopt};
  std::vector<double> pts;
  for (double x : t)
    if (x >= prof.r_star) pts.push_back(x);
  if (prof.ordering_violation(pts) > 0.0) throw ConstraintViolation("grid model needs b >= a beyond r_star");
  return prof;
}

}  // namespace

double CurvatureProfile::ordering_violation(std::span<const double> grid) const {
  double worst = -kInf;
  for (double t : grid) {
    if (t < r_star) continue;
    const double la = a.log_value(t), lb = b.log_value(t);
    if (la == -kInf && lb == -kInf) {
      worst = std::max(worst, 0.0);
      continue;
    }
    // Compare in log space so overflowing models stay comparable.
    worst = std::max(worst, la - lb);
  }
  return worst;
}

DataC::DataC(CurvatureProfile profile_, double t1_, double eps_, double eps_tilde_, double c1_, int dim_)
    : profile(std::move(profile_)), t1(t1_), eps(eps_), eps_tilde(eps_tilde_), c1(c1_), dim(dim_) {
  if (!(eps > eps_tilde)) throw ConstraintViolation("data needs eps > eps_tilde");
  if (!(eps_tilde > 0.0)) throw ConstraintViolation("data needs eps_tilde > 0");
  if (!(c1 >= 1.0)) throw ConstraintViolation("data needs C1 >= 1");
  if (dim < 2) throw ConstraintViolation("data needs dim >= 2");
  if (!std::isfinite(t1)) throw ConstraintViolation("data needs a finite T1");
}

ConeSpec::ConeSpec(double L_, double v0_, int multiplier_) : L(L_), v0(v0_), multiplier(multiplier_) {
  if (!(L > 8.0 / std::numbers::pi)) throw ConstraintViolation("cone needs L > 8/pi");
  if (multiplier < 1) throw ConstraintViolation("cone multiplier must be a positive integer");
  v0 = std::remainder(v0, 2.0 * std::numbers::pi);
  if (v0 < 0) v0 += 2.0 * std::numbers::pi;
}

CurvatureProfile catalog_lookup(const std::string& name, const json& params) {
  const json p = params.is_null() ? json::object() : params;
  CurvatureProfile prof = [&] {
    if (name == "constant") return constant_model(p);
    if (name == "euclidean") return euclidean_model(p);
    if (name == "log-pinched") return log_pinched_model(p);
    if (name == "superexp") return superexp_model(p);
    if (name == "sinh-iterate") return sinh_iterate_model(p);
    if (name == "custom-grid") return grid_model(p);
    throw ConstraintViolation("unknown model '" + name + "'");
  }();
  prof.source = json{{"model", name}, {"params", p}, {"r_star", prof.r_star}};
  return prof;
}

CurvatureProfile profile_from_json(const json& j) {
  if (!j.is_object()) throw ConstraintViolation("profile must be a JSON object");
  if (j.contains("grid")) {
    json g = j.at("grid");
    if (j.contains("r_star")) g["r_star"] = j.at("r_star");
    auto prof = grid_model(g);
    prof.source = json{{"grid", g}};
    return prof;
  }
  if (!j.contains("model")) throw ConstraintViolation("profile needs 'model' or 'grid'");
  json params = j.value("params", json::object());
  if (j.contains("r_star")) params["r_star"] = j.at("r_star");
  return catalog_lookup(j.at("model").get<std::string>(), params);
}

json profile_to_json(const CurvatureProfile& p) {
  if (!p.source) throw ConstraintViolation("profile was not built from a serializable spec");
  return *p.source;
}

json json_number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

bool CConditionsReport::all_pass() const {
  return std::all_of(conditions.begin(), conditions.end(), [](const auto& c) { return c.pass; });
}

CConditionsReport check_c_conditions(const DataC& data, std::span<const double> grid) {
  if (grid.empty()) throw DomainError("empty grid for the C-conditions");
  if (!(data.t1 > 1.0)) throw DomainError("C-conditions need T1 > 1 so that log t > 0");
  for (double t : grid)
    if (t < data.t1) throw DomainError("grid point " + std::to_string(t) + " below T1");
  constexpr double tol = -1e-12;
  CConditionsReport r;
  const char* names[] = {"C1", "C2", "C3", "C4"};
  for (std::size_t i = 0; i < 4; ++i) {
    r.conditions[i].name = names[i];
    r.conditions[i].inf_slack = kInf;
  }
  const auto& a = data.profile.a;
  const auto& b = data.profile.b;
  const double log_c1 = std::log(data.c1);
  for (double t : grid) {
    const double lt = std::log(t), llt = std::log(lt);
    const double lb = b.log_value(t);
    const std::array<double, 4> slack = {
        2.0 * a.log_value(t) - (std::log1p(data.eps) - 2.0 * lt - llt),
        2.0 * lb - (2.0 * data.eps_tilde * llt - 2.0 * lt),
        log_c1 + lb - b.log_value(t + 1.0),
        log_c1 + lb - b.log_value(0.5 * t),
    };
    for (std::size_t i = 0; i < 4; ++i) {
      double s = slack[i];
      if (std::isnan(s)) s = 0.0;  // both sides zero, e.g. b = 0 against b = 0
      auto& c = r.conditions[i];
      c.inf_slack = std::min(c.inf_slack, s);
      if (s < tol && c.pass) {
        c.pass = false;
        c.first_violation = t;
      }
    }
  }
  return r;
}

json to_json(const CConditionsReport& r) {
  json out = json::array();
  for (const auto& c : r.conditions) {
    out.push_back({{"condition", c.name},
                   {"pass", c.pass},
                   {"first_violation", c.first_violation ? json(*c.first_violation) : json(nullptr)},
                   {"inf_slack", json_number(c.inf_slack)}});
  }
  return out;
}

}  // namespace hadamard

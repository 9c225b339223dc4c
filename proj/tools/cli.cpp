#include "hadamard/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

#include "hadamard/angular.hpp"
#include "hadamard/convexity.hpp"
#include "hadamard/dirichlet.hpp"
#include "hadamard/errors.hpp"
#include "hadamard/grid.hpp"
#include "hadamard/jacobi.hpp"
#include "hadamard/models.hpp"
#include "hadamard/rotsym.hpp"
#include "hadamard/sc_gate.hpp"

namespace hadamard::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Anything thrown while reading the configuration is a config error.
template <class F>
auto prepare(F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

double num(const json& c, const std::string& key, double fallback) {
  if (!c.contains(key)) return fallback;
  if (!c[key].is_number()) throw ConfigError("'" + key + "' must be a number");
  return c[key].get<double>();
}

int integer(const json& c, const std::string& key, int fallback) {
  if (!c.contains(key)) return fallback;
  if (!c[key].is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
  return c[key].get<int>();
}

std::vector<double> numbers(const json& c, const std::string& key, std::vector<double> fallback) {
  if (!c.contains(key)) return fallback;
  const json& v = c[key];
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array() || v.empty()) throw ConfigError("'" + key + "' must be a list of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError("'" + key + "' must be a list of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::pair<double, double> window(const json& c, const std::string& key, std::pair<double, double> fallback) {
  if (!c.contains(key)) return fallback;
  auto v = numbers(c, key, {});
  if (v.size() != 2 || !(v[0] < v[1])) throw ConfigError("'" + key + "' must be two increasing numbers");
  return {v[0], v[1]};
}

CurvatureProfile load_profile(const json& c) {
  if (c.contains("profile")) return profile_from_json(c["profile"]);
  if (!c.contains("model")) throw ConfigError("no model given (use --model or a 'model' entry)");
  const json& m = c["model"];
  if (m.is_object()) return profile_from_json(m);
  if (!m.is_string()) throw ConfigError("'model' must be a catalog name or an object");
  return catalog_lookup(m.get<std::string>(), c.value("params", json::object()));
}

std::string model_name(const CurvatureProfile& p) {
  if (p.source && p.source->contains("model")) return (*p.source)["model"].get<std::string>();
  return "custom";
}

// Closed-form surfaces where available, otherwise f_a from the Jacobi solver.
struct SurfaceChoice {
  std::string kind;
  double kappa = 0.0;
};

SurfaceChoice surface_kind(const CurvatureProfile& p) {
  const std::string name = model_name(p);
  if (name == "euclidean") return {"euclidean"};
  if (name == "constant") {
    const double k = p.a(0.0);
    return k > 0.0 ? SurfaceChoice{"hyperbolic", k} : SurfaceChoice{"euclidean"};
  }
  return {"jacobi"};
}

RotSymSurface build_surface(const CurvatureProfile& p, const SurfaceChoice& kind, double t_max, double rtol,
                            int dim) {
  if (kind.kind == "hyperbolic") return RotSymSurface::hyperbolic(kind.kappa, dim);
  if (kind.kind == "euclidean") return RotSymSurface::euclidean(dim);
  return RotSymSurface::from_jacobi(std::make_shared<JacobiSolution>(solve_jacobi(p.a, t_max, rtol)), dim);
}

DataC load_data(const json& c, const CurvatureProfile& prof) {
  const json params = c.value("params", json::object());
  const double eps = num(c, "eps", params.value("eps", 1.0));
  const double eps_tilde = num(c, "eps_tilde", params.value("eps_tilde", 0.5));
  return DataC(prof, num(c, "t1", 10.0), eps, eps_tilde, num(c, "c1", 2.0), integer(c, "dim", 2));
}

ScParams load_sc_params(const json& c, const DataC& d) {
  return ScParams::make(d, num(c, "eps1", 0.75), num(c, "alpha", 0.2), num(c, "lambda", 0.75), num(c, "t0", 1.0),
                        num(c, "pinch2_eps", 0.1));
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
}

template <class W>
void write_csv_file(const std::string& path, W&& writer) {
  if (path.empty()) return;
  std::ostringstream os;
  writer(os);
  write_text(path, os.str());
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// ---------------------------------------------------------------------------

Report cmd_models(const json& c, const std::string&) {
  auto [prof, grid, data] = prepare([&] {
    auto p = load_profile(c);
    const double lo = std::max(1.0, p.r_star);
    auto [g_lo, g_hi] = window(c, "grid", {lo, std::max(1e4, 10 * lo)});
    std::optional<DataC> d;
    if (c.contains("t1")) d.emplace(load_data(c, p));
    return std::tuple{p, geometric_grid(g_lo, g_hi), d};
  });
  Report r;
  const double viol = prof.ordering_violation(grid);
  r.json = {{"profile", profile_to_json(prof)}, {"ordering_violation", json_number(viol)}};
  r.pass = viol <= 0.0;
  if (!r.pass) r.failure = "a > b on the grid, violation " + fmt(viol);
  if (data) {
    auto rep = check_c_conditions(*data, grid);
    r.json["c_conditions"] = to_json(rep);
    if (!rep.all_pass()) {
      r.pass = false;
      for (const auto& cond : rep.conditions)
        if (!cond.pass) r.failure += (r.failure.empty() ? "" : "; ") + cond.name + " slack " + fmt(cond.inf_slack);
    }
  }
  return r;
}

Report cmd_jacobi(const json& c, const std::string& csv) {
  auto [prof, t_max, rtol] = prepare([&] {
    auto p = load_profile(c);
    return std::tuple{p, num(c, "t_max", 20.0), num(c, "rtol", 1e-10)};
  });
  Report r;
  r.pass = true;
  double t_solve = t_max;
  std::optional<json> jacest_cfg;
  if (c.contains("jacest")) {
    jacest_cfg = c["jacest"];
    t_solve = std::max(t_solve, prepare([&] { return window(*jacest_cfg, "window", {1.0, 1e5}).second; }));
  }
  auto sol = solve_jacobi(prof.a, t_solve, rtol);
  write_csv_file(csv, [&](std::ostream& os) { sol.write_csv(os); });
  r.json["solution"] = {{"t_max", json_number(sol.t_max())},
                        {"log_f_end", json_number(sol.log_f(sol.t_max()))},
                        {"u_end", json_number(sol.u(sol.t_max()))},
                        {"nodes", sol.t_grid().size()}};
  if (surface_kind(prof).kind == "hyperbolic") {
    // constant k: compare against sinh(kt)/k and k coth(kt)
    const double k = prof.a(0.0);
    double worst = 0.0;
    for (double t : linear_grid(0.1, std::min(t_max, 20.0), 200)) {
      worst = std::max(worst, std::abs(std::expm1(sol.log_f(t) - std::log(std::sinh(k * t) / k))));
      worst = std::max(worst, std::abs(sol.u(t) * std::tanh(k * t) / k - 1.0));
    }
    r.json["closed_form_max_rel"] = json_number(worst);
    if (worst > 1e-8) {
      r.pass = false;
      r.failure = "closed form mismatch " + fmt(worst);
    }
  }
  if (jacest_cfg) {
    auto [e, e1, w] = prepare([&] {
      return std::tuple{num(*jacest_cfg, "eps", 1.0), num(*jacest_cfg, "eps1", 0.5),
                        window(*jacest_cfg, "window", {1.0, 1e5})};
    });
    auto rep = jacest_check(sol, e, e1, w.first, w.second);
    r.json["jacest"] = to_json(rep);
    if (!rep.pass) {
      r.pass = false;
      r.failure += (r.failure.empty() ? "" : "; ") + std::string("growth bounds fail, min slack ") +
                   fmt(std::min(rep.min_f_slack, rep.min_u_slack));
    }
  }
  if (c.contains("implemma")) {
    const auto& ic = c["implemma"];
    const double t_imp = prepare([&] { return num(ic, "t_max", 30.0); });
    std::optional<TailMajorant> tail;
    if (ic.contains("tail")) {
      const auto tv = prepare([&] { return numbers(ic, "tail", {}); });
      if (tv.size() != 2) throw ConfigError("implemma.tail must be [coeff, rate]");
      tail = TailMajorant{tv[0], tv[1]};
    }
    auto rep = implemma_check(prof, t_imp, tail);
    r.json["implemma"] = to_json(rep);
    if (rep.max_violation > 1e-6) {
      r.pass = false;
      r.failure += (r.failure.empty() ? "" : "; ") + std::string("comparison bound exceeded by ") +
                   fmt(rep.max_violation);
    }
  }
  return r;
}

Report cmd_sc_check(const json& c, const std::string&) {
  auto [data, params, w] = prepare([&] {
    auto d = load_data(c, load_profile(c));
    auto p = load_sc_params(c, d);
    return std::tuple{d, p, window(c, "window", {1e2, 1e5})};
  });
  auto v = decide_sc(data, params, w.first, w.second, num(c, "rtol", 1e-9));
  Report r{to_json(v), v.branch != Branch::none, ""};
  if (!r.pass) r.failure = "no branch certified, sup slack " + fmt(v.sup_slack());
  return r;
}

Report cmd_certify(const json& c, const std::string&) {
  auto [data, params, R, c4, lrs] = prepare([&] {
    auto d = load_data(c, load_profile(c));
    auto p = load_sc_params(c, d);
    std::vector<double> lr;
    if (c.contains("log_rho")) {
      lr = numbers(c, "log_rho", {});
    } else {
      auto [lo, hi] = window(c, "log_rho_range", {1e5, 1e6});
      lr = geometric_grid(lo, hi, integer(c, "per_decade", 16));
    }
    return std::tuple{d, p, num(c, "R", 10.0), num(c, "c4", 1.0), lr};
  });
  const double top = *std::max_element(lrs.begin(), lrs.end());
  auto sol = solve_jacobi_log(data.profile.a, top + 1.0, num(c, "rtol", 1e-9));
  Report r;
  r.pass = true;
  json rows = json::array();
  double worst = std::numeric_limits<double>::infinity();
  for (double lr : lrs) {
    auto m = certificate_margin(data, params, sol, R, lr, c4);
    rows.push_back(to_json(m));
    worst = std::min(worst, m.margin);
  }
  r.pass = worst > 0.0;
  if (!r.pass) r.failure = "non-positive margin " + fmt(worst);
  r.json = {{"witness", to_json(params)}, {"margins", rows}, {"min_margin", json_number(worst)}};
  return r;
}

Report cmd_construct(const json& c, const std::string& csv) {
  auto [prof, rule, alpha, c_angle, n_max, t_max] = prepare([&] {
    auto p = load_profile(c);
    auto rule = EpsilonRule::make(num(c, "beta", 0.1), bump_variant_from_string(c.value("variant", "unit")),
                                  num(c, "bump_eps", 1.0));
    return std::tuple{p, rule, num(c, "alpha", 0.1), num(c, "c_angle", 1.0), integer(c, "n_max", 200),
                      num(c, "t_max", 80.0)};
  });
  auto sol = solve_jacobi(prof.a, t_max, num(c, "rtol", 1e-11));
  double r0;
  std::string source;
  if (c.contains("r0")) {
    r0 = prepare([&] { return num(c, "r0", 0.0); });
    source = "config";
  } else {
    FindR0Options opts;
    opts.n_max = n_max;
    r0 = find_r0(prof, sol, rule, alpha, c_angle, opts);
    source = "search";
  }
  auto tr = run_construction(prof, sol, rule, r0, alpha, c_angle, n_max);
  write_csv_file(csv, [&](std::ostream& os) { write_csv(os, tr); });
  Report r;
  r.json = summary_json(tr);
  r.json["r0_source"] = source;
  r.pass = tr.converged;
  if (!r.pass) r.failure = "construction " + to_string(tr.status) + ", sum " + fmt(tr.sum());
  return r;
}

Report cmd_rotsym(const json& c, const std::string& csv) {
  auto [prof, kind, action, dim, t_max] = prepare([&] {
    auto p = load_profile(c);
    const std::string a = c.value("action", "distance");
    if (a != "distance" && a != "volume" && a != "mono") throw ConfigError("rotsym action must be distance|volume|mono");
    return std::tuple{p, surface_kind(p), a, integer(c, "dim", 3), num(c, "t_max", 20.0)};
  });
  const auto S = build_surface(prof, kind, t_max, 1e-11, dim);
  Report r;
  r.pass = true;
  r.json["surface"] = kind.kind;

  if (action == "distance") {
    std::vector<std::array<double, 4>> pairs;
    prepare([&] {
      if (c.contains("pairs")) {
        for (const auto& e : c["pairs"]) {
          auto v = e.get<std::vector<double>>();
          if (v.size() != 4) throw ConfigError("each pair is [r1, theta1, r2, theta2]");
          pairs.push_back({v[0], v[1], v[2], v[3]});
        }
      } else {
        std::mt19937_64 rng(static_cast<std::uint64_t>(integer(c, "seed", 1)));
        const double r_hi = std::min(num(c, "r_sample", 5.0), S.r_max());
        std::uniform_real_distribution<double> R(0.0, r_hi), A(0.0, 2 * std::numbers::pi);
        for (int i = 0; i < integer(c, "n_pairs", 10); ++i) pairs.push_back({R(rng), A(rng), R(rng), A(rng)});
      }
      return 0;
    });
    json rows = json::array();
    double gap = 0.0;
    for (const auto& pq : pairs) {
      GeoPoint p = GeoPoint::make(pq[0], pq[1]), q = GeoPoint::make(pq[2], pq[3]);
      auto g = distance_with_gradient(S, p, q);
      json row = {{"p", {p.r, p.theta}}, {"q", {q.r, q.theta}}, {"d", g.d}, {"dd_dr", g.dd_dr},
                  {"dd_dtheta", g.dd_dtheta}};
      if (kind.kind != "jacobi") gap = std::max(gap, std::abs(g.d - fast_distance(S, p, q).d));
      rows.push_back(row);
    }
    r.json["pairs"] = rows;
    if (kind.kind != "jacobi") {
      r.json["closed_form_max_gap"] = json_number(gap);
      r.pass = gap <= 1e-8;
      if (!r.pass) r.failure = "distance differs from closed form by " + fmt(gap);
    }
    write_csv_file(csv, [&](std::ostream& os) {
      os << "r1,theta1,r2,theta2,d\n";
      os.precision(12);
      for (const auto& row : rows)
        os << row["p"][0].get<double>() << ',' << row["p"][1].get<double>() << ',' << row["q"][0].get<double>()
           << ',' << row["q"][1].get<double>() << ',' << row["d"].get<double>() << '\n';
    });
  } else if (action == "volume") {
    auto [k, ts] = prepare([&] { return std::pair{integer(c, "ball_dim", 2), numbers(c, "t", {0.5, 1.0, 2.0, 4.0})}; });
    json rows = json::array();
    for (double t : ts) rows.push_back({{"t", t}, {"volume", json_number(ball_volume(S, k, t))},
                                        {"log_volume", json_number(log_ball_volume(S, k, t))}});
    r.json["ball_dim"] = k;
    r.json["volumes"] = rows;
    write_csv_file(csv, [&](std::ostream& os) {
      os << "t,volume\n";
      os.precision(15);
      for (const auto& row : rows) os << row["t"].get<double>() << ',' << row["volume"] << '\n';
    });
  } else {
    auto [k, gamma, grid] = prepare([&] {
      auto [lo, hi] = window(c, "grid", {0.1, 6.0});
      return std::tuple{integer(c, "ball_dim", 2), num(c, "gamma", 2 * std::numbers::pi),
                        linear_grid(lo, hi, integer(c, "points", 60))};
    });
    auto mass = [&, k = k, gamma = gamma](double t) { return cone_mass(S, gamma, k, t); };
    auto series = mass_ratio_series(S, k, grid, mass);
    auto mono = monotonicity_check(series);
    auto cone = cone_inequality_check(S, k, grid, mass);
    r.json["monotonicity"] = to_json(mono);
    r.json["cone_inequality"] = to_json(cone);
    r.pass = mono.pass && cone.holds;
    if (!r.pass) r.failure = "mass ratio violation " + fmt(mono.max_violation) + ", cone excess " + fmt(cone.max_excess);
    write_csv_file(csv, [&](std::ostream& os) {
      os << "t,mass,ball_volume,ratio\n";
      os.precision(15);
      for (std::size_t i = 0; i < series.t.size(); ++i)
        os << series.t[i] << ',' << series.mass[i] << ',' << series.ball_vol[i] << ',' << series.ratio[i] << '\n';
    });
  }
  r.json["action"] = action;
  return r;
}

Report cmd_angular(const json& c, const std::string& csv) {
  auto [prof, kind, cone, quad_tol, n_rays, t_max, lambda, t0] = prepare([&] {
    auto p = load_profile(c);
    return std::tuple{p,
                      surface_kind(p),
                      ConeSpec(num(c, "L", 3.0), num(c, "v0", 0.0)),
                      num(c, "quad_tol", 1e-4),
                      integer(c, "rays", 5),
                      num(c, "t_max", 60.0),
                      num(c, "lambda", 0.75),
                      num(c, "t0", 1.0)};
  });
  if (n_rays < 1) throw ConfigError("rays must be >= 1");
  auto sol_a = solve_jacobi(prof.a, t_max, 1e-10);
  const auto S = build_surface(prof, kind, t_max, 1e-10, 2);
  AngularExtension field(S, prof.b, cone, quad_tol);
  const double R1 = field.computed_radius();
  auto rho = prepare([&, R1 = R1] {
    if (c.contains("rho")) return numbers(c, "rho", {});
    return linear_grid(R1, R1 + num(c, "rho_span", 5.0), integer(c, "rho_points", 11));
  });
  std::vector<double> rays;
  for (int i = 0; i < n_rays; ++i) rays.push_back(n_rays == 1 ? 0.0 : 0.7 * 3.0 / cone.L * i / (n_rays - 1));
  auto rep = decay_check(field, sol_a, lambda, t0, DecayVariant::general, rho, rays);
  write_csv_file(csv, [&](std::ostream& os) { write_csv(os, rep); });

  const ScalarField one = [](GeoPoint) { return 1.0; };
  const double p_one = field.mollify({R1, cone.v0 + std::numbers::pi}, one);
  Report r;
  r.json = to_json(rep);
  r.json["computed_radius"] = json_number(R1);
  r.json["mollified_one"] = json_number(p_one);
  r.pass = rep.pass && std::abs(p_one - 1.0) <= quad_tol;
  if (!r.pass)
    r.failure = "decay slopes " + fmt(rep.slope_grad) + " / " + fmt(rep.slope_hess) + ", P(1) = " + fmt(p_one);
  return r;
}

Report cmd_dirichlet(const json& c, const std::string& csv) {
  auto [prof, kind, data, radii, rtol] = prepare([&] {
    auto p = load_profile(c);
    if (!c.contains("data")) throw ConfigError("dirichlet needs boundary data (--data file or inline)");
    json dj = c["data"];
    if (dj.is_string()) {
      std::ifstream f(dj.get<std::string>());
      if (!f) throw ConfigError("cannot read boundary data " + dj.get<std::string>());
      dj = json::parse(f);
    }
    return std::tuple{p, surface_kind(p), boundary_from_json(dj), numbers(c, "radii", {5.0, 10.0, 20.0}),
                      num(c, "rtol", 1e-8)};
  });
  const double t_max = num(c, "t_max", 1.01 * *std::max_element(radii.begin(), radii.end()) + 0.5);
  const auto S = build_surface(prof, kind, t_max, 1e-11, 2);
  auto sol = exhaust(S, data, radii, rtol);
  write_csv_file(csv, [&](std::ostream& os) { write_csv(os, sol, 41, 32); });
  Report r;
  r.json = to_json(sol);
  r.json["surface"] = kind.kind;
  r.pass = r.json["sup_norm_check"]["pass"].get<bool>();
  if (!r.pass) r.failure = "maximum principle violated: sup |u| = " + fmt(r.json["sup_norm_check"]["sup_abs_u"]);
  return r;
}

using Handler = Report (*)(const json&, const std::string&);

const std::map<std::string, std::pair<Handler, const char*>>& table() {
  static const std::map<std::string, std::pair<Handler, const char*>> t{
      {"models", {cmd_models, "curvature bounds and growth conditions on the model data"}},
      {"jacobi", {cmd_jacobi, "Jacobi comparison equation f'' = k^2 f and its growth bounds"}},
      {"sc-check", {cmd_sc_check, "strict convexity hypothesis via the pinching branches"}},
      {"certify", {cmd_certify, "strict convexity margin of the perturbed distance function"}},
      {"construct", {cmd_construct, "convex exhaustion by perturbed ball complements"}},
      {"rotsym", {cmd_rotsym, "distance, volume and monotonicity on rotationally symmetric models"}},
      {"angular", {cmd_angular, "mollified angular extension and its derivative decay"}},
      {"dirichlet", {cmd_dirichlet, "asymptotic Dirichlet problem by exhaustion on balls"}},
  };
  return t;
}

// Flag text to JSON: numbers and JSON literals parse as such, "a,b,c" becomes a list.
json flag_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
  }
  if (text.find(',') != std::string::npos) {
    json arr = json::array();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) arr.push_back(flag_value(item));
    return arr;
  }
  return text;
}

const std::map<std::string, std::vector<std::string>>& command_flags() {
  static const std::map<std::string, std::vector<std::string>> f{
      {"models", {"grid", "t1", "eps", "eps-tilde", "c1", "dim"}},
      {"jacobi", {"t-max"}},
      {"sc-check", {"window", "t1", "eps", "eps-tilde", "c1", "dim", "eps1", "alpha", "lambda", "t0", "pinch2-eps"}},
      {"certify",
       {"R", "c4", "log-rho", "log-rho-range", "per-decade", "t1", "eps", "eps-tilde", "c1", "dim", "eps1", "alpha",
        "lambda", "t0", "pinch2-eps"}},
      {"construct", {"beta", "alpha", "variant", "c-angle", "r0", "n-max", "bump-eps", "t-max"}},
      {"rotsym", {"dim", "t-max", "pairs", "n-pairs", "r-sample", "ball-dim", "t", "grid", "points", "gamma"}},
      {"angular", {"L", "v0", "quad-tol", "rays", "rho", "rho-span", "rho-points", "lambda", "t0", "t-max"}},
      {"dirichlet", {"data", "radii", "t-max"}},
  };
  return f;
}

std::string key_of(std::string flag) {
  std::replace(flag.begin(), flag.end(), '-', '_');
  return flag;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : table()) v.push_back(k);
    return v;
  }();
  return names;
}

Report execute(const std::string& command, const json& config, const std::string& csv_path) {
  auto it = table().find(command);
  if (it == table().end()) throw ConfigError("unknown command '" + command + "'");
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  Report r = it->second.first(config, csv_path);
  json out = {{"command", command},
              {"version", kVersion},
              {"paper_anchor", it->second.second},
              {"config", config},
              {"pass", r.pass},
              {"result", r.json}};
  if (!r.pass) out["failure"] = r.failure;
  r.json = std::move(out);
  return r;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"comparison-geometry checks on model manifolds", "hadamard"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(0, 1);
  app.fallthrough();
  std::string config_path, out_dir;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "directory for the JSON report and CSV data");

  struct Sub {
    CLI::App* app;
    std::map<std::string, std::string> values;
    std::string model, action, csv;
    std::vector<std::string> params;
    std::optional<double> k, rtol;
    std::optional<int> seed;
  };
  std::map<std::string, Sub> subs;
  for (const auto& name : commands()) {
    auto& s = subs[name];
    s.app = app.add_subcommand(name, table().at(name).second);
    s.app->add_option("--model", s.model, "catalog model name");
    s.app->add_option("--param", s.params, "model parameter key=value (repeatable)");
    s.app->add_option("--k", s.k, "shorthand for --param k=...");
    s.app->add_option("--rtol", s.rtol, "solver tolerance");
    s.app->add_option("--seed", s.seed, "seed for sampled checks");
    s.app->add_option("--csv", s.csv, "CSV output path");
    if (name == "rotsym") s.app->add_option("action", s.action, "distance|volume|mono");
    for (const auto& flag : command_flags().at(name))
      s.app->add_option("--" + flag, s.values[flag], "config key " + key_of(flag) + " (JSON or comma list)");
  }

  std::vector<std::string> argv(args.rbegin(), args.rend());  // CLI11 consumes a reversed vector
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kConfigError;
  }

  try {
    json config = json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw ConfigError("cannot read config " + config_path);
      try {
        config = json::parse(f);
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
      if (!config.is_object()) throw ConfigError("config must be a JSON object");
    }
    std::string command = config.value("command", "");
    config.erase("command");
    const Sub* chosen = nullptr;
    for (const auto& [name, s] : subs)
      if (s.app->parsed()) {
        command = name;
        chosen = &s;
      }
    if (command.empty()) throw ConfigError("no command given; use one of the subcommands");
    if (!table().contains(command)) throw ConfigError("unknown command '" + command + "'");

    std::string csv = config.value("csv", "");
    config.erase("csv");
    if (chosen) {
      if (!chosen->model.empty()) {
        config["model"] = chosen->model;
        config.erase("profile");
      }
      for (const auto& kv : chosen->params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--param expects key=value, got '" + kv + "'");
        config["params"][kv.substr(0, eq)] = flag_value(kv.substr(eq + 1));
      }
      if (chosen->k) config["params"]["k"] = *chosen->k;
      if (chosen->rtol) config["rtol"] = *chosen->rtol;
      if (chosen->seed) config["seed"] = *chosen->seed;
      if (!chosen->action.empty()) config["action"] = chosen->action;
      for (const auto& [flag, value] : chosen->values)
        if (chosen->app->get_option("--" + flag)->count() > 0) config[key_of(flag)] = flag_value(value);
      if (!chosen->csv.empty()) csv = chosen->csv;
    }
    if (config.empty()) throw ConfigError("empty configuration");

    std::string json_path;
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      json_path = (fs::path(out_dir) / (command + ".json")).string();
      if (csv.empty()) csv = (fs::path(out_dir) / (command + ".csv")).string();
    }

    Report rep;
    try {
      rep = execute(command, config, csv);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      err << "hadamard " << command << ": check aborted: " << e.what() << '\n';
      return kCheckFailed;
    }
    const std::string text = rep.json.dump(2) + "\n";
    if (json_path.empty())
      out << text;
    else
      write_text(json_path, text);
    if (!rep.pass) {
      err << "hadamard " << command << ": FAIL: " << rep.failure << '\n';
      return kCheckFailed;
    }
    return kPass;
  } catch (const ConfigError& e) {
    err << "hadamard: config error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace hadamard::cli

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "aniso/aniso.hpp"

using namespace aniso;
using io::json;

namespace {

struct Options {
  std::string domain;
  std::string seminorm;
  std::string q = "1";
  std::string q_grid;
  std::string mode = "min";
  std::string search_class = "quadratic";
  double h = 0.1;
  bool richardson = false;
  std::string out;
  std::string format;
  bool no_trace = false;
  // kj-demo
  int d = 2;
  int k = 1;
  std::string n_list = "1,10,100";
};

double parse_q(const std::string& s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || std::isnan(v)) throw io::InputError("cannot parse q value '" + s + "'");
  return v;
}

std::vector<double> parse_q_grid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(parse_q(item));
  if (parts.size() != 3) throw io::InputError("--q-grid expects a:b:step");
  const double a = parts[0], b = parts[1], step = parts[2];
  if (!(step > 0.0) || !(b >= a)) throw io::InputError("--q-grid needs step > 0 and b >= a");
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double q = a + i * step;
    if (q > b + 1e-9 * step) break;
    grid.push_back(q);
  }
  return grid;
}

std::vector<int> parse_int_list(const std::string& spec) {
  std::vector<int> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw io::InputError("cannot parse integer '" + item + "'");
    }
  }
  if (out.empty()) throw io::InputError("empty integer list");
  return out;
}

Mode parse_mode(const std::string& m) {
  if (m == "min") return Mode::min;
  if (m == "max") return Mode::max;
  throw io::InputError("--mode must be min or max");
}

SearchClass parse_class(const std::string& c) {
  if (c == "rank1") return SearchClass::rank1;
  if (c == "quadratic") return SearchClass::quadratic;
  throw io::InputError("--class must be rank1 or quadratic");
}

SolverConfig config_of(const Options& o) {
  SolverConfig cfg;
  cfg.target_h = o.h;
  cfg.richardson = o.richardson;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw io::InputError(e.what());
  }
  return cfg;
}

Domain require_domain(const Options& o) {
  if (o.domain.empty()) throw io::InputError("--domain is required");
  return io::domain_from_json(io::load_json_arg(o.domain));
}

Seminorm require_seminorm(const Options& o) {
  if (o.seminorm.empty()) throw io::InputError("--seminorm is required");
  return io::seminorm_from_json(io::load_json_arg(o.seminorm));
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw io::InputError("cannot write '" + o.out + "'");
  f << text;
}

// ---------------------------------------------------------------------------
// reproduce
// ---------------------------------------------------------------------------

struct Row {
  std::string label;
  double computed;
  std::string expected_label;
  double expected;
  double rel_tol;
  [[nodiscard]] bool pass() const {
    return std::abs(computed - expected) <= rel_tol * std::max(std::abs(expected), 1e-300);
  }
};

std::vector<Row> reproduce_rows() {
  constexpr double pi = std::numbers::pi;
  const double pi2 = pi * pi;
  std::vector<Row> rows;
  const Polygon2D triangle({{0, 0}, {1, 0}, {0, 1}});
  const Polygon2D square({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const double r2 = std::sqrt(0.5);

  rows.push_back({"triangle v=(0,1)", torsion_rank1_polygon(triangle, Rank1Seminorm(0.0, 1.0)), "1/48", 1.0 / 48, 1e-10});
  rows.push_back({"triangle v=(1,1)/sqrt2", torsion_rank1_polygon(triangle, Rank1Seminorm(r2, r2)), "1/96", 1.0 / 96, 1e-10});
  rows.push_back({"unit square H=|xi_2| lambda (slicing)", lambda_rank1_polygon(square, Rank1Seminorm(0.0, 1.0)), "pi^2", pi2, 1e-10});
  rows.push_back({"unit square H=|xi_2| torsion (slicing)", torsion_rank1_polygon(square, Rank1Seminorm(0.0, 1.0)), "1/12", 1.0 / 12, 1e-10});
  const auto box12 = closed_form::rank1_box(BoxD({{0, 1}, {0, 2}}));
  rows.push_back({"box (0,1)x(0,2) H=|xi_2| lambda", box12.lambda, "pi^2/4", pi2 / 4, 1e-12});
  rows.push_back({"box (0,1)x(0,2) H=|xi_2| torsion", box12.torsion, "2/3", 2.0 / 3, 1e-12});

  const Eigen::Vector2d a21(2.0, 1.0);
  const Direction e1(1.0, 0.0), e2(0.0, 1.0);
  rows.push_back({"ellipse a=(2,1) v=e1 lambda", closed_form::lambda_rank1_ellipsoid(a21, e1).value, "pi^2/16", pi2 / 16, 1e-12});
  rows.push_back({"ellipse a=(2,1) v=e1 torsion", closed_form::torsion_rank1_ellipsoid(a21, e1).value, "2pi", 2 * pi, 1e-12});
  rows.push_back({"ellipse a=(2,1) v=e2 lambda", closed_form::lambda_rank1_ellipsoid(a21, e2).value, "pi^2/4", pi2 / 4, 1e-12});
  rows.push_back({"ellipse a=(2,1) v=e2 torsion", closed_form::torsion_rank1_ellipsoid(a21, e2).value, "pi/2", pi / 2, 1e-12});
  rows.push_back({"ellipse a=(2,1) T_max", closed_form::t_max_ellipsoid(a21).value, "2pi", 2 * pi, 1e-12});
  rows.push_back({"disc euclidean torsion", closed_form::torsion_euclid_ellipsoid(Eigen::Vector2d(1, 1)).value, "pi/8", pi / 8, 1e-12});
  rows.push_back({"ellipse a=(2,1) euclidean torsion", closed_form::torsion_euclid_ellipsoid(a21).value, "2pi/5", 2 * pi / 5, 1e-12});
  rows.push_back({"ball d=3 T_max", closed_form::t_max_ellipsoid(Eigen::Vector3d(1, 1, 1)).value, "4pi/15", 4 * pi / 15, 1e-12});
  rows.push_back({"quadratic ball alpha=(0.5,1) torsion", closed_form::torsion_quadratic_ball(Eigen::Vector2d(0.5, 1)).value, "pi/5", pi / 5, 1e-12});
  rows.push_back({"disc m_q q=1", closed_form::m_tilde_q_ellipsoid(Eigen::Vector2d(1, 1), 1.0).value, "pi^3/16", pi * pi2 / 16, 1e-12});
  rows.push_back({"disc m_q q=0", closed_form::m_tilde_q_ellipsoid(Eigen::Vector2d(1, 1), 0.0).value, "pi^2/4", pi2 / 4, 1e-12});
  rows.push_back({"ellipse a=(2,1) m_q q=1", closed_form::m_tilde_q_ellipsoid(a21, 1.0).value, "pi^3/8", pi * pi2 / 8, 1e-12});
  rows.push_back({"disc q_E", closed_form::q_threshold_ellipsoid(Eigen::Vector2d(1, 1)).value, "2", 2.0, 1e-14});
  rows.push_back({"ball d=3 q_E", closed_form::q_threshold_ellipsoid(Eigen::Vector3d(1, 1, 1)).value, "2", 2.0, 1e-14});
  rows.push_back({"ellipse a=(2,1) q_E", closed_form::q_threshold_ellipsoid(a21).value, "1+log2/log(5/4)",
                  1.0 + std::log(2.0) / std::log(1.25), 1e-14});
  rows.push_back({"kj d=2 k=1 q=1/2 n=1", closed_form::kj_sequence_value(2, 1, 0.5, 1).value, "pi^2/(4 sqrt3)",
                  pi2 / (4 * std::sqrt(3.0)), 1e-12});

  SolverConfig cfg;
  cfg.target_h = 0.05;
  cfg.richardson = true;
  const Polygon2D disc = polygonize(EllipsoidD(Eigen::Vector2d(1, 1)), 256);
  const auto fem = FemDiscretization(disc, cfg).euclidean();
  rows.push_back({"disc euclidean lambda (fem)", fem.lambda, "j01^2", disc_dirichlet_eigenvalue(), 5e-3});
  rows.push_back({"disc euclidean torsion (fem)", fem.torsion, "pi/8", pi / 8, 5e-3});
  return rows;
}

int run_reproduce(const Options& o) {
  const auto rows = reproduce_rows();
  bool ok = true;
  std::string text;
  json arr = json::array();
  for (const auto& r : rows) {
    ok = ok && r.pass();
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s: computed %.8f expected %s %s\n", r.label.c_str(), r.computed,
                  r.expected_label.c_str(), r.pass() ? "PASS" : "FAIL");
    text += buf;
    arr.push_back({{"label", r.label},
                   {"computed", r.computed},
                   {"expected", r.expected},
                   {"expected_label", r.expected_label},
                   {"rel_tol", r.rel_tol},
                   {"pass", r.pass()}});
  }
  if (o.format == "json")
    emit(o, io::dump({{"rows", arr}, {"all_pass", ok}}));
  else
    emit(o, text);
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// other commands
// ---------------------------------------------------------------------------

int run_eval(const Options& o) {
  const Domain domain = require_domain(o);
  Seminorm h = require_seminorm(o);
  if (kernel_codim(h) > 0) h = normalize(h);
  const auto f = eval_F(Evaluator(domain, config_of(o)), h, parse_q(o.q));
  emit(o, io::dump(io::to_json(f)));
  return 0;
}

int run_optimize(const Options& o) {
  const Evaluator ev(require_domain(o), config_of(o));
  const double q = parse_q(o.q);
  const Mode mode = parse_mode(o.mode);
  OptimizationReport rep;
  if (parse_class(o.search_class) == SearchClass::rank1) {
    rep = optimize_rank1(ev, q, mode);
  } else {
    SpectralCache cache(ev);
    rep = optimize_quadratic(cache, q, mode);
  }
  emit(o, io::dump(io::to_json(rep, !o.no_trace)));
  return 0;
}

int run_sweep(const Options& o) {
  if (o.q_grid.empty()) throw io::InputError("--q-grid is required");
  const Evaluator ev(require_domain(o), config_of(o));
  const auto sweep = q_sweep(ev, parse_q_grid(o.q_grid), parse_mode(o.mode), parse_class(o.search_class));
  emit(o, o.format == "json" ? io::dump(io::to_json(sweep)) : io::to_csv(sweep));
  return 0;
}

int run_bounds(const Options& o) {
  const Evaluator ev(require_domain(o), config_of(o));
  Seminorm h = require_seminorm(o);
  if (kernel_codim(h) > 0) h = normalize(h);
  emit(o, io::dump(io::to_json(verify_bounds(ev, h))));
  return 0;
}

int run_kj(const Options& o) {
  const double q = parse_q(o.q);
  const auto ns = parse_int_list(o.n_list);
  json rows = json::array();
  std::string csv = "n,lambda,torsion,value\n";
  for (int n : ns) {
    closed_form::KohlerJobinTerm t;
    try {
      t = closed_form::kj_sequence_value(o.d, o.k, q, n);
    } catch (const std::invalid_argument& e) {
      throw io::InputError(e.what());
    }
    rows.push_back({{"n", n}, {"lambda", t.lambda}, {"torsion", t.torsion}, {"value", t.value}});
    csv += std::to_string(n) + "," + io::format_double(t.lambda) + "," + io::format_double(t.torsion) + "," +
           io::format_double(t.value) + "\n";
  }
  if (o.format == "json")
    emit(o, io::dump({{"d", o.d}, {"k", o.k}, {"q", q}, {"rows", rows}}));
  else
    emit(o, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic eigenvalues, torsional rigidity and lambda*T^q optimization"};
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);
  Options o;

  auto add_solver = [&](CLI::App* c) {
    c->add_option("--h", o.h, "target mesh size for FEM");
    c->add_flag("--richardson", o.richardson, "solve at h and h/2 and extrapolate");
    c->add_option("--out", o.out, "output file (default stdout)");
  };
  auto add_format = [&](CLI::App* c, const char* dflt) {
    c->add_option("--format", o.format, "output format")->default_str(dflt);
  };

  auto* eval = app.add_subcommand("eval", "evaluate lambda_H, T_H and F_q");
  eval->add_option("--domain", o.domain, "domain JSON (file or inline)")->required();
  eval->add_option("--seminorm", o.seminorm, "seminorm JSON (file or inline)")->required();
  eval->add_option("--q", o.q, "exponent q (number or inf)");
  add_solver(eval);

  auto* opt = app.add_subcommand("optimize", "minimize or maximize F_q over a seminorm class");
  opt->add_option("--domain", o.domain, "domain JSON (file or inline)")->required();
  opt->add_option("--q", o.q, "exponent q (number or inf)");
  opt->add_option("--mode", o.mode, "min or max");
  opt->add_option("--class", o.search_class, "rank1 or quadratic");
  opt->add_flag("--no-trace", o.no_trace, "omit the evaluation trace");
  add_solver(opt);

  auto* sweep = app.add_subcommand("sweep", "optimize over a grid of q values");
  sweep->add_option("--domain", o.domain, "domain JSON (file or inline)")->required();
  sweep->add_option("--q-grid", o.q_grid, "a:b:step")->required();
  sweep->add_option("--mode", o.mode, "min or max");
  sweep->add_option("--class", o.search_class, "rank1 or quadratic");
  add_solver(sweep);
  add_format(sweep, "csv");

  auto* bounds = app.add_subcommand("bounds", "check the lambda*T bounds");
  bounds->add_option("--domain", o.domain, "domain JSON (file or inline)")->required();
  bounds->add_option("--seminorm", o.seminorm, "seminorm JSON (file or inline)")->required();
  add_solver(bounds);

  auto* repro = app.add_subcommand("reproduce", "recompute the reference constants");
  repro->add_option("--out", o.out, "output file (default stdout)");
  add_format(repro, "text");

  auto* kj = app.add_subcommand("kj-demo", "lambda*T^q along the collapsing-domain sequence");
  kj->add_option("--d", o.d, "ambient dimension");
  kj->add_option("--k", o.k, "number of active coordinates");
  kj->add_option("--q", o.q, "exponent q < 1");
  kj->add_option("--n", o.n_list, "comma-separated n values");
  kj->add_option("--out", o.out, "output file (default stdout)");
  add_format(kj, "csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string op = app.get_subcommands().front()->get_name();
  try {
    if (!o.format.empty() && o.format != "json" && o.format != "csv" && o.format != "text")
      throw io::InputError("--format must be json, csv or text");
    if (op == "eval") return run_eval(o);
    if (op == "optimize") return run_optimize(o);
    if (op == "sweep") return run_sweep(o);
    if (op == "bounds") return run_bounds(o);
    if (op == "reproduce") return run_reproduce(o);
    if (op == "kj-demo") return run_kj(o);
  } catch (const std::invalid_argument& e) {
    std::cerr << op << ": input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << op << ": solver error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

#pragma once

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "aniso/closed_form.hpp"
#include "aniso/functional.hpp"
#include "aniso/geometry.hpp"
#include "aniso/seminorm.hpp"
#include "aniso/solve.hpp"

namespace aniso::io {

using json = nlohmann::json;

class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Canonical text: sorted keys, two-space indent, floats as %.12e
// ---------------------------------------------------------------------------

inline std::string format_double(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific, 12);
  return std::string(buf, res.ptr);
}

namespace detail {

inline bool is_scalar(const json& j) { return !j.is_object() && !j.is_array(); }

inline void emit(std::string& out, const json& j, int indent) {
  const std::string pad(indent, ' ');
  const std::string inner(indent + 2, ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += inner + json(it.key()).dump() + ": ";
      emit(out, it.value(), indent + 2);
    }
    out += "\n" + pad + "}";
  } else if (j.is_array()) {
    if (j.empty()) {
      out += "[]";
      return;
    }
    const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return is_scalar(e); });
    if (flat) {
      out += "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ", ";
        emit(out, j[i], indent);
      }
      out += "]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) out += ",\n";
      out += inner;
      emit(out, j[i], indent + 2);
    }
    out += "\n" + pad + "]";
  } else if (j.is_number_float()) {
    out += format_double(j.get<double>());
  } else {
    out += j.dump();
  }
}

}  // namespace detail

inline std::string dump(const json& j) {
  std::string out;
  detail::emit(out, j, 0);
  out += "\n";
  return out;
}

inline json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
}

/// Inline JSON when the argument starts with '{', otherwise a file path.
inline json load_json_arg(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && arg[first] == '{') return parse(arg);
  std::ifstream in(arg);
  if (!in) throw InputError("cannot open '" + arg + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

// ---------------------------------------------------------------------------
// Domains and seminorms
// ---------------------------------------------------------------------------

namespace detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline double number(const json& j) {
  if (!j.is_number()) throw InputError("expected a number, got " + j.dump());
  return j.get<double>();
}

inline Eigen::VectorXd vector_of(const json& j) {
  if (!j.is_array() || j.empty()) throw InputError("expected a nonempty array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i]);
  return v;
}

inline Eigen::MatrixXd matrix_of(const json& j, Eigen::Index n) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) throw InputError("rotation must have one row per axis");
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd row = vector_of(j[i]);
    if (row.size() != n) throw InputError("rotation must be square");
    m.row(i) = row.transpose();
  }
  return m;
}

inline json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

inline json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

template <class Fn>
auto wrap_input(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const InputError&) {
    throw;
  } catch (const json::exception& e) {
    throw InputError(e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

}  // namespace detail

inline Domain domain_from_json(const json& j) {
  return detail::wrap_input([&]() -> Domain {
    const std::string kind = detail::field(j, "kind").get<std::string>();
    if (kind == "polygon") {
      std::vector<Vec2> v;
      for (const auto& p : detail::field(j, "vertices")) {
        const Eigen::VectorXd xy = detail::vector_of(p);
        if (xy.size() != 2) throw InputError("polygon vertices must be [x, y]");
        v.emplace_back(xy[0], xy[1]);
      }
      return Polygon2D(std::move(v));
    }
    if (kind == "box") {
      std::vector<std::pair<double, double>> iv;
      for (const auto& p : detail::field(j, "intervals")) {
        const Eigen::VectorXd ab = detail::vector_of(p);
        if (ab.size() != 2) throw InputError("box intervals must be [a, b]");
        iv.emplace_back(ab[0], ab[1]);
      }
      return BoxD(std::move(iv));
    }
    if (kind == "ellipsoid") {
      const Eigen::VectorXd a = detail::vector_of(detail::field(j, "semi_axes"));
      if (j.contains("rotation")) return EllipsoidD(a, detail::matrix_of(j.at("rotation"), a.size()));
      return EllipsoidD(a);
    }
    throw InputError("unknown domain kind '" + kind + "'");
  });
}

inline Seminorm seminorm_from_json(const json& j) {
  return detail::wrap_input([&]() -> Seminorm {
    const std::string kind = detail::field(j, "kind").get<std::string>();
    if (kind == "rank1") return Rank1Seminorm(detail::vector_of(detail::field(j, "eta")));
    if (kind == "quadratic") {
      const Eigen::VectorXd a = detail::vector_of(detail::field(j, "alphas"));
      if (j.contains("rotation")) return QuadraticSeminorm(a, detail::matrix_of(j.at("rotation"), a.size()));
      return QuadraticSeminorm(a);
    }
    throw InputError("unknown seminorm kind '" + kind + "'");
  });
}

inline json to_json(const Domain& d) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Polygon2D>) {
          json v = json::array();
          for (const auto& p : x.vertices()) v.push_back({p.x(), p.y()});
          return {{"kind", "polygon"}, {"vertices", v}};
        } else if constexpr (std::is_same_v<T, BoxD>) {
          json v = json::array();
          for (const auto& [a, b] : x.intervals()) v.push_back({a, b});
          return {{"kind", "box"}, {"intervals", v}};
        } else {
          return {{"kind", "ellipsoid"},
                  {"semi_axes", detail::vector_json(x.semi_axes())},
                  {"rotation", detail::matrix_json(x.rotation())}};
        }
      },
      d);
}

inline json to_json(const Seminorm& h) {
  if (const auto* r1 = std::get_if<Rank1Seminorm>(&h)) return {{"kind", "rank1"}, {"eta", detail::vector_json(r1->eta())}};
  const auto& q = std::get<QuadraticSeminorm>(h);
  return {{"kind", "quadratic"},
          {"alphas", detail::vector_json(q.alphas())},
          {"rotation", detail::matrix_json(q.rotation())}};
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline json to_json(const FunctionalValue& f) {
  return {{"q", std::isinf(f.q) ? json("inf") : json(f.q)},
          {"lambda", f.lambda},
          {"torsion", f.torsion},
          {"value", f.value},
          {"seminorm", to_json(f.seminorm)},
          {"provenance", {{"lambda", to_string(f.lambda_provenance)}, {"torsion", to_string(f.torsion_provenance)}}},
          {"error_estimate", f.error_estimate},
          {"degenerate", f.degenerate}};
}

inline json to_json(const OptimizationReport& r, bool with_trace = true) {
  json j = {{"mode", to_string(r.mode)},
            {"class", to_string(r.search_class)},
            {"q", std::isinf(r.q) ? json("inf") : json(r.q)},
            {"theta", r.theta},
            {"alpha", r.alpha},
            {"value", r.best.value},
            {"boundary_flag", r.boundary_flag},
            {"best", to_json(r.best)},
            {"evaluations", r.trace.size()}};
  if (with_trace) {
    json t = json::array();
    for (const auto& e : r.trace) t.push_back({e.theta, e.alpha, e.value});
    j["trace"] = t;
  }
  return j;
}

inline json to_json(const QSweep& s) {
  json reports = json::array();
  for (const auto& r : s.reports) reports.push_back(to_json(r, false));
  json j = {{"mode", to_string(s.mode)}, {"class", to_string(s.search_class)}, {"reports", reports}};
  j["threshold"] = s.threshold ? json{s.threshold->first, s.threshold->second} : json(nullptr);
  return j;
}

inline std::string to_csv(const QSweep& s) {
  std::string out = "q,theta,alpha,value,boundary_flag\n";
  for (const auto& r : s.reports) {
    out += format_double(r.q) + "," + format_double(r.theta) + "," + format_double(r.alpha) + "," +
           format_double(r.best.value) + "," + (r.boundary_flag ? "true" : "false") + "\n";
  }
  return out;
}

inline json to_json(const BoundReport& b) {
  json checks = json::array();
  for (const auto& c : b.checks) {
    json e = {{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"skipped", c.skipped}};
    if (c.skipped)
      e["note"] = c.note;
    else
      e["holds"] = c.holds;
    checks.push_back(e);
  }
  return {{"lambda", b.lambda},
          {"torsion", b.torsion},
          {"product", b.product},
          {"measure", b.measure},
          {"kernel_codim", b.kernel_codim},
          {"convex", b.convex},
          {"centrally_symmetric", b.centrally_symmetric},
          {"checks", checks}};
}

}  // namespace aniso::io

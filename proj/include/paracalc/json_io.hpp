#pragma once

// JSON forms of the library types and a deterministic writer.
//
// Complex numbers are [re, im]; floats are written with 17 significant digits.

#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "paracalc/exppoly.hpp"
#include "paracalc/fib.hpp"
#include "paracalc/psf.hpp"
#include "paracalc/qcore.hpp"
#include "paracalc/solver.hpp"
#include "paracalc/special.hpp"
#include "paracalc/verify.hpp"

namespace paracalc {

using Json = nlohmann::ordered_json;

/// Malformed input; field() names the offending JSON path.
class ParseError : public std::runtime_error {
public:
  ParseError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

namespace json_detail {

inline std::string format_double(double v) {
  if (!std::isfinite(v))
    throw std::domain_error("cannot write non-finite number to JSON");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s == "-0")
    s = "0";
  return s;
}

inline bool is_scalar(const Json& j) { return !j.is_array() && !j.is_object(); }

inline void write(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  if (j.is_number_float()) {
    out += format_double(j.get<double>());
  } else if (j.is_array()) {
    if (j.empty()) {
      out += "[]";
      return;
    }
    bool flat = true;
    for (const auto& e : j)
      flat = flat && is_scalar(e);
    if (flat) {
      out += "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0)
          out += ", ";
        write(j[i], out, indent);
      }
      out += "]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      out += inner;
      write(j[i], out, indent + 1);
      out += i + 1 < j.size() ? ",\n" : "\n";
    }
    out += pad + "]";
  } else if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    std::size_t i = 0;
    for (auto it = j.begin(); it != j.end(); ++it, ++i) {
      out += inner + Json(it.key()).dump() + ": ";
      write(it.value(), out, indent + 1);
      out += i + 1 < j.size() ? ",\n" : "\n";
    }
    out += pad + "}";
  } else {
    out += j.dump();
  }
}

inline const Json& require(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object())
    throw ParseError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end())
    throw ParseError(path + "." + key, "missing field");
  return *it;
}

} // namespace json_detail

/// Pretty JSON text with fixed float formatting and a trailing newline.
inline std::string write_json(const Json& j) {
  std::string out;
  json_detail::write(j, out, 0);
  out += "\n";
  return out;
}

inline Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError("<document>", std::string("invalid JSON (") + e.what() + ")");
  }
}

inline Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

/// Accepts [re, im] or a plain number.
inline Complex complex_from_json(const Json& j, const std::string& path) {
  if (j.is_number())
    return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError(path, "expected a complex number [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Json to_json(const std::vector<Complex>& v) {
  Json out = Json::array();
  for (const auto& z : v)
    out.push_back(to_json(z));
  return out;
}

inline std::vector<Complex> complex_list_from_json(const Json& j, const std::string& path) {
  if (!j.is_array())
    throw ParseError(path, "expected a list of complex numbers");
  std::vector<Complex> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(complex_from_json(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline Json to_json(const ExpPoly& f) {
  Json out = Json::array();
  for (const auto& t : f.terms()) {
    Json term = Json::object();
    term["lambda"] = to_json(t.lambda);
    term["coeffs"] = to_json(t.coeffs);
    out.push_back(std::move(term));
  }
  return out;
}

inline ExpPoly exppoly_from_json(const Json& j, const std::string& path) {
  if (!j.is_array())
    throw ParseError(path, "expected a list of exponential terms");
  ExpPoly f;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string here = path + "[" + std::to_string(i) + "]";
    const Complex lambda = complex_from_json(json_detail::require(j[i], "lambda", here), here + ".lambda");
    const auto coeffs = complex_list_from_json(json_detail::require(j[i], "coeffs", here), here + ".coeffs");
    f.add_block(lambda, coeffs, Complex(1.0, 0.0));
  }
  return f;
}

inline Json to_json(const ParaFunction& f) {
  Json out = Json::object();
  out["p"] = f.p();
  Json comps = Json::array();
  for (const auto& c : f.components())
    comps.push_back(to_json(c));
  out["components"] = std::move(comps);
  return out;
}

inline int int_from_json(const Json& j, const std::string& path) {
  if (!j.is_number_integer())
    throw ParseError(path, "expected an integer");
  return j.get<int>();
}

inline QContext context_from_json(const Json& j, const std::string& path) {
  const int p = int_from_json(j, path);
  try {
    return QContext(p);
  } catch (const std::invalid_argument& e) {
    throw ParseError(path, e.what());
  }
}

inline ParaFunction parafunction_from_json(const Json& j, const std::string& path) {
  const QContext ctx = context_from_json(json_detail::require(j, "p", path), path + ".p");
  const Json& comps = json_detail::require(j, "components", path);
  if (!comps.is_array() || static_cast<int>(comps.size()) != ctx.p() + 1)
    throw ParseError(path + ".components", "expected " + std::to_string(ctx.p() + 1) + " components");
  std::vector<ExpPoly> parts;
  for (std::size_t k = 0; k < comps.size(); ++k)
    parts.push_back(exppoly_from_json(comps[k], path + ".components[" + std::to_string(k) + "]"));
  return {ctx, std::move(parts)};
}

inline Json to_json(const ComplexMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(to_json(m(i, j)));
    out.push_back(std::move(row));
  }
  return out;
}

inline ComplexMatrix matrix_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty())
    throw ParseError(path, "expected a nonempty list of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  ComplexMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    const auto row = complex_list_from_json(j[static_cast<std::size_t>(i)], row_path);
    if (static_cast<Eigen::Index>(row.size()) != n)
      throw ParseError(row_path, "matrix must be square");
    for (Eigen::Index c = 0; c < n; ++c)
      m(i, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

/// ParaFunction JSON extended with "root" (null when not attached to a root)
/// and "multiplicity_index".
inline Json to_json(const SolutionElement& e) {
  Json out = to_json(e.function);
  out["root"] = e.root ? to_json(*e.root) : Json(nullptr);
  out["multiplicity_index"] = e.multiplicity_index;
  return out;
}

inline SolutionElement solution_element_from_json(const Json& j, const std::string& path) {
  SolutionElement e{parafunction_from_json(j, path), std::nullopt, 1};
  if (auto it = j.find("root"); it != j.end() && !it->is_null())
    e.root = complex_from_json(*it, path + ".root");
  if (auto it = j.find("multiplicity_index"); it != j.end())
    e.multiplicity_index = int_from_json(*it, path + ".multiplicity_index");
  return e;
}

inline Json to_json(const SolutionBasis& b) {
  Json out = Json::array();
  for (const auto& e : b.elements)
    out.push_back(to_json(e));
  return out;
}

inline SolutionBasis solution_basis_from_json(const QContext& ctx, const Json& j, const std::string& path) {
  if (!j.is_array())
    throw ParseError(path, "expected a list of basis elements");
  SolutionBasis b{ctx, {}};
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string here = path + "[" + std::to_string(i) + "]";
    auto e = solution_element_from_json(j[i], here);
    if (e.function.p() != ctx.p())
      throw ParseError(here + ".p", "does not match the document p");
    b.elements.push_back(std::move(e));
  }
  return b;
}

inline Json to_json(const NonlinearStructure& s) {
  Json out = Json::object();
  out["free_functions"] = s.free_functions;
  out["free_constants"] = s.free_constants;
  out["forced_zero"] = s.forced_zero;
  return out;
}

inline Json to_json(const VerificationReport& r) {
  Json out = Json::object();
  out["residual"] = r.residual;
  out["rank"] = r.rank;
  out["brute_force"] = r.brute_force ? Json(*r.brute_force) : Json(nullptr);
  return out;
}

} // namespace paracalc

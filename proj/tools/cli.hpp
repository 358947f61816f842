#pragma once

// Command-line front end: solve, verify, structure, selftest.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acceptance/criteria.hpp"
#include "paracalc/json_io.hpp"
#include "paracalc/solver.hpp"
#include "paracalc/special.hpp"
#include "paracalc/systems.hpp"
#include "paracalc/verify.hpp"

namespace paracalc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;
inline constexpr int kExitVerify = 3;

struct ProblemSpec {
  int p = 0;
  std::string kind;
  std::optional<int> s;
  std::optional<Complex> lambda;
  std::vector<Complex> coeffs;
  std::optional<ComplexMatrix> matrix;
  std::vector<Complex> theta_coeffs;
  std::optional<int> m;
  std::optional<int> n;
};

/// "re", "re+imi", "re-imi", "imi", "i", "-i"; exponents allowed in each part.
inline Complex parse_complex_literal(const std::string& text, const std::string& field) {
  std::string t;
  for (char ch : text)
    if (ch != ' ')
      t += ch;
  auto real_of = [&](const std::string& part) {
    if (part.empty())
      throw ParseError(field, "empty number in '" + text + "'");
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (end != part.c_str() + part.size())
      throw ParseError(field, "cannot parse '" + text + "' as a complex number");
    return v;
  };
  if (t.empty())
    throw ParseError(field, "empty complex literal");
  if (t.back() != 'i')
    return {real_of(t), 0.0};
  t.pop_back();
  std::size_t split = std::string::npos;
  for (std::size_t i = t.size(); i-- > 1;)
    if ((t[i] == '+' || t[i] == '-') && t[i - 1] != 'e' && t[i - 1] != 'E') {
      split = i;
      break;
    }
  const std::string re = split == std::string::npos ? "" : t.substr(0, split);
  std::string im = split == std::string::npos ? t : t.substr(split);
  if (im.empty() || im == "+" || im == "-")
    im += "1";
  return {re.empty() ? 0.0 : real_of(re), real_of(im)};
}

inline std::vector<Complex> parse_complex_list(const std::string& text, const std::string& field) {
  std::vector<Complex> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(parse_complex_literal(item, field));
  if (out.empty())
    throw ParseError(field, "empty list");
  return out;
}

/// Rows separated by ';', entries by ','.
inline ComplexMatrix parse_matrix_literal(const std::string& text, const std::string& field) {
  std::vector<std::vector<Complex>> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';'))
    rows.push_back(parse_complex_list(row, field));
  const auto n = static_cast<Eigen::Index>(rows.size());
  ComplexMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n)
      throw ParseError(field, "matrix must be square");
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

inline ProblemSpec problem_from_json(const Json& j) {
  ProblemSpec spec;
  if (!j.is_object())
    throw ParseError("<document>", "expected an object");
  spec.p = int_from_json(json_detail::require(j, "p", "problem"), "problem.p");
  const Json& kind = json_detail::require(j, "kind", "problem");
  if (!kind.is_string())
    throw ParseError("problem.kind", "expected a string");
  spec.kind = kind.get<std::string>();
  if (auto it = j.find("s"); it != j.end())
    spec.s = int_from_json(*it, "problem.s");
  if (auto it = j.find("lambda"); it != j.end())
    spec.lambda = complex_from_json(*it, "problem.lambda");
  if (auto it = j.find("coeffs"); it != j.end())
    spec.coeffs = complex_list_from_json(*it, "problem.coeffs");
  if (auto it = j.find("matrix"); it != j.end())
    spec.matrix = matrix_from_json(*it, "problem.matrix");
  if (auto it = j.find("theta_coeffs"); it != j.end())
    spec.theta_coeffs = complex_list_from_json(*it, "problem.theta_coeffs");
  if (auto it = j.find("m"); it != j.end())
    spec.m = int_from_json(*it, "problem.m");
  if (auto it = j.find("n"); it != j.end())
    spec.n = int_from_json(*it, "problem.n");
  return spec;
}

inline QContext context_for(const ProblemSpec& spec) {
  try {
    return QContext(spec.p);
  } catch (const std::invalid_argument& e) {
    throw ParseError("p", e.what());
  }
}

template <typename T>
const T& need(const std::optional<T>& v, const char* field, const std::string& kind) {
  if (!v)
    throw ParseError(field, "required for kind '" + kind + "'");
  return *v;
}

inline LinearOperator operator_for(const ProblemSpec& spec, const QContext& ctx) {
  if (spec.kind == "kernel") {
    const int s = need(spec.s, "s", spec.kind);
    if (s < 1)
      throw ParseError("s", "must be >= 1");
    return LinearOperator::power(ctx, s);
  }
  if (spec.kind == "eigen") {
    const int s = need(spec.s, "s", spec.kind);
    if (s < 1)
      throw ParseError("s", "must be >= 1");
    return LinearOperator::eigen(ctx, s, need(spec.lambda, "lambda", spec.kind));
  }
  if (spec.coeffs.empty())
    throw ParseError("coeffs", "required for kind '" + spec.kind + "'");
  return {ctx, spec.coeffs};
}

struct Outcome {
  Json document;
  std::string pretty;
  bool ok = true;
};

inline std::string header_line(const QContext& ctx) {
  return "# p = " + std::to_string(ctx.p()) + ", q = " + format_complex(ctx.q()) + "\n";
}

inline std::string operator_text(const LinearOperator& op) {
  std::string out = op.order() == 1 ? "D" : "D^" + std::to_string(op.order());
  for (int i = 1; i <= op.order(); ++i) {
    const Complex c = op.coeff(i);
    if (c == Complex(0.0, 0.0))
      continue;
    const int power = op.order() - i;
    out += " + " + format_complex(c);
    if (power == 1)
      out += " D";
    else if (power > 1)
      out += " D^" + std::to_string(power);
  }
  return out;
}

inline std::string report_line(const VerificationReport& r) {
  std::ostringstream ss;
  ss << "residual: " << r.residual << ", rank: " << r.rank << ", brute_force: ";
  ss << (r.brute_force ? (*r.brute_force ? "true" : "false") : "n/a");
  return ss.str() + "\n";
}

inline std::string basis_text(const SolutionBasis& basis) {
  std::string out;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& e = basis.elements[i];
    out += "# element " + std::to_string(i + 1);
    if (e.root)
      out += ", root " + format_complex(*e.root);
    out += ", multiplicity index " + std::to_string(e.multiplicity_index) + "\n";
    out += to_string(e.function) + "\n";
  }
  return out;
}

inline Json report_json(const VerificationReport& r, double tol) {
  Json j = to_json(r);
  j["passed"] = r.passed(tol);
  return j;
}

inline VerificationReport verify_theta(const ThetaPoly& c, const SolutionBasis& basis) {
  VerificationReport r;
  r.expected_rank = static_cast<int>(basis.size());
  for (const auto& e : basis.elements) {
    r.residual = std::max(r.residual, theta_coefficient_residual(c, e.function).max_abs_coeff());
    r.scale = std::max(r.scale, e.function.max_abs_coeff());
  }
  r.rank = basis.size() == 0 ? 0 : independence_rank(basis);
  return r;
}

inline VerificationReport verify_system(const SystemMatrix& sys, const std::vector<std::vector<ParaFunction>>& sols) {
  VerificationReport r;
  r.expected_rank = static_cast<int>(sols.size());
  for (const auto& w : sols) {
    r.residual = std::max(r.residual, system_residual(sys, w));
    for (const auto& f : w)
      r.scale = std::max(r.scale, f.max_abs_coeff());
  }
  r.rank = sols.empty() ? 0 : independence_rank(sols);
  return r;
}

inline Outcome solve(const ProblemSpec& spec, double tol) {
  const QContext ctx = context_for(spec);
  Outcome out;
  Json& doc = out.document;
  doc["p"] = ctx.p();
  doc["kind"] = spec.kind;
  out.pretty = header_line(ctx);

  if (spec.kind == "kernel" || spec.kind == "eigen" || spec.kind == "constant") {
    const LinearOperator op = operator_for(spec, ctx);
    SolutionBasis basis{ctx, {}};
    if (spec.kind == "kernel")
      basis = kernel_basis(ctx, op.order());
    else if (spec.kind == "eigen" && *spec.lambda == Complex(0.0, 0.0))
      basis = kernel_basis(ctx, op.order());
    else if (spec.kind == "eigen")
      basis = root_eigenbasis(ctx, op.order(), *spec.lambda);
    else
      basis = solve_constant(op);
    const auto report = verify_basis(op, basis.functions(), tol);
    doc["operator"] = Json{{"coeffs", to_json(op.coeffs())}};
    doc["basis"] = to_json(basis);
    doc["report"] = report_json(report, tol);
    out.pretty += "# operator " + operator_text(op) + "\n" + basis_text(basis) + report_line(report);
    out.ok = report.passed(tol);
    return out;
  }
  if (spec.kind == "theta_coeff") {
    if (spec.theta_coeffs.empty())
      throw ParseError("theta_coeffs", "required for kind 'theta_coeff'");
    if (static_cast<int>(spec.theta_coeffs.size()) != ctx.p() + 1)
      throw ParseError("theta_coeffs", "expected p+1 = " + std::to_string(ctx.p() + 1) + " entries");
    const ThetaPoly c(ctx, spec.theta_coeffs);
    const auto sol = solve_theta_coefficient(c);
    const auto report = verify_theta(c, sol.basis);
    doc["theta_coeffs"] = to_json(spec.theta_coeffs);
    doc["growth_rate"] = to_json(sol.growth_rate);
    doc["basis"] = to_json(sol.basis);
    doc["report"] = report_json(report, tol);
    out.pretty += "# growth rate " + format_complex(sol.growth_rate) + "\n" + basis_text(sol.basis) + report_line(report);
    out.ok = report.passed(tol);
    return out;
  }
  if (spec.kind == "system") {
    const SystemMatrix sys{ctx, need(spec.matrix, "matrix", spec.kind)};
    if (!sys.a.allFinite())
      throw ParseError("matrix", "entries must be finite");
    const int n = sys.size();
    std::vector<std::vector<ParaFunction>> sols;
    for (int j = 0; j < n; ++j)
      sols.push_back(solve_system(sys, ComplexVector::Unit(n, j)));
    const auto report = verify_system(sys, sols);
    doc["matrix"] = to_json(sys.a);
    Json all = Json::array();
    for (const auto& w : sols) {
      Json col = Json::array();
      for (const auto& f : w)
        col.push_back(to_json(f));
      all.push_back(std::move(col));
    }
    doc["solutions"] = std::move(all);
    doc["report"] = report_json(report, tol);
    for (int j = 0; j < n; ++j) {
      out.pretty += "# solution " + std::to_string(j + 1) + " (w(0) = e_" + std::to_string(j + 1) + ")\n";
      for (int i = 0; i < n; ++i)
        out.pretty += "w" + std::to_string(i + 1) + " = " + to_string(sols[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]) + "\n";
    }
    out.pretty += report_line(report);
    out.ok = report.passed(tol);
    return out;
  }
  if (spec.kind == "nonlinear") {
    const int m = need(spec.m, "m", spec.kind);
    const int n = need(spec.n, "n", spec.kind);
    NonlinearStructure s;
    try {
      s = nonlinear_structure(ctx, m, n);
    } catch (const std::out_of_range& e) {
      throw ParseError("m", e.what());
    } catch (const std::invalid_argument& e) {
      throw ParseError(m < 1 ? "m" : "n", e.what());
    }
    doc["m"] = m;
    doc["n"] = n;
    doc["structure"] = to_json(s);
    auto list = [](const std::vector<int>& v) {
      std::string t;
      for (int k : v)
        t += (t.empty() ? "" : " ") + std::to_string(k);
      return t.empty() ? std::string("-") : t;
    };
    out.pretty += "# (" + std::string(m == 1 ? "D" : "D^" + std::to_string(m)) + " f)^" + std::to_string(n) + " = 0\n";
    out.pretty += "free functions: " + list(s.free_functions) + "\n";
    out.pretty += "free constants: " + list(s.free_constants) + "\n";
    out.pretty += "forced zero: " + list(s.forced_zero) + "\n";
    return out;
  }
  throw ParseError("kind", "unknown kind '" + spec.kind + "'");
}

/// Re-checks a document written by solve.
inline Outcome verify_document(const Json& doc, double tol) {
  const QContext ctx = context_from_json(json_detail::require(doc, "p", "document"), "document.p");
  const Json& kind_json = json_detail::require(doc, "kind", "document");
  if (!kind_json.is_string())
    throw ParseError("document.kind", "expected a string");
  const std::string kind = kind_json.get<std::string>();
  VerificationReport report;
  if (kind == "kernel" || kind == "eigen" || kind == "constant") {
    const Json& op_json = json_detail::require(doc, "operator", "document");
    auto coeffs = complex_list_from_json(json_detail::require(op_json, "coeffs", "document.operator"),
                                         "document.operator.coeffs");
    if (coeffs.empty())
      throw ParseError("document.operator.coeffs", "empty operator");
    const LinearOperator op(ctx, std::move(coeffs));
    const auto basis = solution_basis_from_json(ctx, json_detail::require(doc, "basis", "document"), "document.basis");
    if (basis.size() == 0)
      throw ParseError("document.basis", "no candidate functions");
    report = verify_basis(op, basis.functions(), tol);
  } else if (kind == "theta_coeff") {
    const ThetaPoly c(ctx, [&] {
      auto v = complex_list_from_json(json_detail::require(doc, "theta_coeffs", "document"), "document.theta_coeffs");
      if (static_cast<int>(v.size()) != ctx.p() + 1)
        throw ParseError("document.theta_coeffs", "expected p+1 entries");
      return v;
    }());
    const auto basis = solution_basis_from_json(ctx, json_detail::require(doc, "basis", "document"), "document.basis");
    if (basis.size() == 0)
      throw ParseError("document.basis", "no candidate functions");
    report = verify_theta(c, basis);
  } else if (kind == "system") {
    const SystemMatrix sys{ctx, matrix_from_json(json_detail::require(doc, "matrix", "document"), "document.matrix")};
    const Json& sols_json = json_detail::require(doc, "solutions", "document");
    if (!sols_json.is_array() || sols_json.empty())
      throw ParseError("document.solutions", "expected a nonempty list");
    std::vector<std::vector<ParaFunction>> sols;
    for (std::size_t j = 0; j < sols_json.size(); ++j) {
      const std::string here = "document.solutions[" + std::to_string(j) + "]";
      if (!sols_json[j].is_array() || static_cast<int>(sols_json[j].size()) != sys.size())
        throw ParseError(here, "expected " + std::to_string(sys.size()) + " functions");
      std::vector<ParaFunction> w;
      for (std::size_t i = 0; i < sols_json[j].size(); ++i) {
        auto f = parafunction_from_json(sols_json[j][i], here + "[" + std::to_string(i) + "]");
        if (f.p() != ctx.p())
          throw ParseError(here + "[" + std::to_string(i) + "].p", "does not match the document p");
        w.push_back(std::move(f));
      }
      sols.push_back(std::move(w));
    }
    report = verify_system(sys, sols);
  } else {
    throw ParseError("document.kind", "cannot verify kind '" + kind + "'");
  }
  Outcome out;
  out.document = report_json(report, tol);
  out.pretty = header_line(ctx) + report_line(report) + (report.passed(tol) ? "verification passed\n" : "verification FAILED\n");
  out.ok = report.passed(tol);
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ParseError("--input", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closed-form solution spaces for para-Grassmann differential equations", "paracalc"};
  app.require_subcommand(1);
  double tol = kDefaultTolerance;
  bool as_json = false;
  std::string output_path;
  app.add_option("--tol", tol, "verification tolerance")->check(CLI::PositiveNumber);

  ProblemSpec spec;
  std::string input_path;
  std::string lambda_text;
  std::string coeffs_text;
  std::string matrix_text;
  std::string theta_text;
  int s_value = 0;
  int m_value = 0;
  int n_value = 0;

  auto* solve_cmd = app.add_subcommand("solve", "solve a problem given by flags or --input JSON");
  solve_cmd->add_option("--input", input_path, "problem JSON file");
  solve_cmd->add_option("--p", spec.p, "nilpotency order p");
  solve_cmd->add_option("--kind", spec.kind, "kernel, eigen, constant, system, theta_coeff or nonlinear");
  auto* s_opt = solve_cmd->add_option("--s", s_value, "power of D");
  auto* lambda_opt = solve_cmd->add_option("--lambda", lambda_text, "eigenvalue, e.g. 0.7+0.2i");
  solve_cmd->add_option("--coeffs", coeffs_text, "c_1,...,c_n of D^n + c_1 D^{n-1} + ... + c_n");
  auto* matrix_opt = solve_cmd->add_option("--matrix", matrix_text, "rows separated by ';', entries by ','");
  solve_cmd->add_option("--theta-coeffs", theta_text, "c_0,...,c_p of c(theta)");
  auto* m_opt = solve_cmd->add_option("--m", m_value, "power of D in (D^m f)^n = 0");
  auto* n_opt = solve_cmd->add_option("--n", n_value, "outer power in (D^m f)^n = 0");
  solve_cmd->add_option("--output", output_path, "write the JSON document here");
  solve_cmd->add_flag("--json", as_json, "print JSON instead of text");

  auto* verify_cmd = app.add_subcommand("verify", "re-check a document written by solve");
  verify_cmd->add_option("--input", input_path, "solution JSON file")->required();
  verify_cmd->add_option("--output", output_path, "write the report JSON here");
  verify_cmd->add_flag("--json", as_json, "print JSON instead of text");

  int st_p = 0;
  int st_m = 0;
  int st_n = 0;
  auto* structure_cmd = app.add_subcommand("structure", "index sets of the general solution of (D^m f)^n = 0");
  structure_cmd->add_option("--p", st_p, "nilpotency order p")->required();
  structure_cmd->add_option("--m", st_m, "power of D")->required();
  structure_cmd->add_option("--n", st_n, "outer power")->required();
  structure_cmd->add_option("--output", output_path, "write the JSON document here");
  structure_cmd->add_flag("--json", as_json, "print JSON instead of text");

  auto* selftest_cmd = app.add_subcommand("selftest", "run the acceptance criteria");
  app.fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    if (const auto nl = msg.find('\n'); nl != std::string::npos)
      msg.resize(nl);
    err << "error: " << msg << "\n";
    return kExitParse;
  }

  auto emit = [&](const Outcome& o) {
    const std::string text = write_json(o.document);
    if (!output_path.empty())
      write_file(output_path, text);
    out << (as_json ? text : o.pretty);
    return o.ok ? kExitOk : kExitVerify;
  };

  try {
    if (*selftest_cmd) {
      const auto results = acceptance::run_all();
      bool ok = true;
      for (const auto& r : results) {
        out << acceptance::format_line(r) << "\n";
        ok = ok && r.passed;
      }
      return ok ? kExitOk : kExitVerify;
    }
    if (*structure_cmd) {
      ProblemSpec st;
      st.p = st_p;
      st.kind = "nonlinear";
      st.m = st_m;
      st.n = st_n;
      return emit(solve(st, tol));
    }
    if (*verify_cmd)
      return emit(verify_document(parse_json_text(read_file(input_path)), tol));

    if (!input_path.empty()) {
      spec = problem_from_json(parse_json_text(read_file(input_path)));
    } else {
      if (spec.kind.empty())
        throw ParseError("--kind", "required (or give --input)");
      if (*s_opt)
        spec.s = s_value;
      if (*lambda_opt)
        spec.lambda = parse_complex_literal(lambda_text, "--lambda");
      if (!coeffs_text.empty())
        spec.coeffs = parse_complex_list(coeffs_text, "--coeffs");
      if (*matrix_opt)
        spec.matrix = parse_matrix_literal(matrix_text, "--matrix");
      if (!theta_text.empty())
        spec.theta_coeffs = parse_complex_list(theta_text, "--theta-coeffs");
      if (*m_opt)
        spec.m = m_value;
      if (*n_opt)
        spec.n = n_value;
    }
    return emit(solve(spec, tol));
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

} // namespace paracalc::cli

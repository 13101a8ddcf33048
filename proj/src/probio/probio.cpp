#include "ipqp/probio.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ipqp::io {

using nlohmann::json;
using nlohmann::ordered_json;

FormatError::FormatError(std::string field, std::size_t line, const std::string& message)
    : ContractError((line ? "line " + std::to_string(line) + ": " : std::string()) +
                    (field.empty() ? message : field + ": " + message)),
      field_(std::move(field)),
      line_(line) {}

namespace {

constexpr const char* kProblemFormat = "ipqp-problem";
constexpr const char* kSolutionFormat = "ipqp-solution";
constexpr int kVersion = 1;

std::size_t line_at(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset; ++i) line += text[i] == '\n';
  return line;
}

// Line of the first occurrence of "key"; top-level keys are unique names.
std::size_t key_line(std::string_view text, std::string_view key) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  const auto pos = text.find(quoted);
  return pos == std::string_view::npos ? 0 : line_at(text, pos);
}

struct Reader {
  std::string_view text;

  [[noreturn]] void fail(const std::string& field, const std::string& message) const {
    const std::string top = field.substr(0, field.find_first_of(".["));
    throw FormatError(field, key_line(text, top), message);
  }

  const json& member(const json& obj, const std::string& key, const std::string& path) const {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path, "missing");
    return *it;
  }

  Index index_value(const json& v, const std::string& path) const {
    if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0)) {
      fail(path, "expected a nonnegative integer");
    }
    return v.get<Index>();
  }

  std::vector<Index> indices(const json& v, const std::string& path) const {
    if (!v.is_array()) fail(path, "expected an array");
    std::vector<Index> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(index_value(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  Vector values(const json& v, const std::string& path, bool allow_inf,
                std::optional<Index> expected = std::nullopt) const {
    if (!v.is_array()) fail(path, "expected an array");
    if (expected && v.size() != *expected) {
      fail(path, "expected " + std::to_string(*expected) + " entries, found " +
                     std::to_string(v.size()));
    }
    Vector out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const json& e = v[i];
      const std::string at = path + "[" + std::to_string(i) + "]";
      if (e.is_number()) {
        out.push_back(e.get<double>());
      } else if (e.is_string() && allow_inf) {
        const auto& s = e.get_ref<const std::string&>();
        if (s == "+inf" || s == "inf") {
          out.push_back(kInf);
        } else if (s == "-inf") {
          out.push_back(-kInf);
        } else {
          fail(at, "unknown token '" + s + "' (expected a number, -inf or +inf)");
        }
      } else {
        fail(at, allow_inf ? "expected a number, -inf or +inf" : "expected a finite number");
      }
    }
    return out;
  }

  CsrMatrix csr(const json& v, const std::string& path, Index rows, Index cols) const {
    if (!v.is_object()) fail(path, "expected an object");
    auto offsets = indices(member(v, "row_offsets", path + ".row_offsets"), path + ".row_offsets");
    auto cidx = indices(member(v, "col_indices", path + ".col_indices"), path + ".col_indices");
    auto vals = values(member(v, "values", path + ".values"), path + ".values", false);
    try {
      return CsrMatrix(rows, cols, std::move(offsets), std::move(cidx), std::move(vals));
    } catch (const ContractError& e) {
      fail(path, e.what());
    }
  }
};

json number_array(std::span<const double> v) {
  json out = json::array();
  for (double x : v) {
    if (std::isinf(x)) {
      out.push_back(x > 0 ? "+inf" : "-inf");
    } else {
      out.push_back(x);
    }
  }
  return out;
}

json index_array(std::span<const Index> v) {
  json out = json::array();
  for (Index i : v) out.push_back(i);
  return out;
}

ordered_json csr_json(const CsrMatrix& a) {
  ordered_json out;
  out["row_offsets"] = index_array(a.row_offsets());
  out["col_indices"] = index_array(a.col_indices());
  out["values"] = number_array(a.values());
  return out;
}

ordered_json hessian_json(const SymmetricOperator& h) {
  ordered_json out;
  if (const auto* d = dynamic_cast<const DiagonalOperator*>(&h)) {
    out["kind"] = "diag";
    out["diag"] = number_array(d->entries());
  } else if (const auto* c = dynamic_cast<const CsrSymmetricOperator*>(&h)) {
    out["kind"] = "csr";
    const ordered_json body = csr_json(c->matrix());
    for (const auto& [k, v] : body.items()) out[k] = v;
  } else if (const auto* s = dynamic_cast<const DenseSymmetricOperator*>(&h)) {
    out["kind"] = "csr";
    const ordered_json body = csr_json(CsrMatrix::from_dense(h.dim(), h.dim(), s->data()));
    for (const auto& [k, v] : body.items()) out[k] = v;
  } else if (const auto* b = dynamic_cast<const BfgsOperator*>(&h)) {
    out["kind"] = "bfgs";
    out["h0"] = number_array(b->h0());
    out["k"] = b->pair_count();
    json cols = json::array();
    for (Index k = 0; k < b->column_count(); ++k) cols.push_back(number_array(b->column(k)));
    out["columns"] = std::move(cols);
    out["weights"] = number_array(b->weights());
  } else {
    throw ContractError("write_problem: unsupported Hessian operator type");
  }
  return out;
}

// One top-level key per line.
std::string lines(const ordered_json& doc) {
  std::string out = "{\n";
  std::size_t i = 0;
  for (const auto& [key, value] : doc.items()) {
    out += json(key).dump() + ": " + value.dump();
    out += ++i < doc.size() ? ",\n" : "\n";
  }
  out += "}\n";
  return out;
}

}  // namespace

QpProblem parse_problem(std::string_view text) {
  const Reader r{text};
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw FormatError("", line_at(text, e.byte > 0 ? e.byte - 1 : 0), "malformed document");
  }
  if (!doc.is_object()) throw FormatError("", 1, "expected a JSON object");

  const json& format = r.member(doc, "format", "format");
  if (format != kProblemFormat) r.fail("format", "expected \"ipqp-problem\"");
  const json& version = r.member(doc, "version", "version");
  if (version != kVersion) r.fail("version", "unsupported version");

  const Index n = r.index_value(r.member(doc, "n", "n"), "n");
  const Index m = r.index_value(r.member(doc, "m", "m"), "m");

  const json& hj = r.member(doc, "hessian", "hessian");
  if (!hj.is_object()) r.fail("hessian", "expected an object");
  const json& kind = r.member(hj, "kind", "hessian.kind");
  std::shared_ptr<const SymmetricOperator> hessian;
  try {
    if (kind == "diag") {
      hessian = std::make_shared<DiagonalOperator>(
          r.values(r.member(hj, "diag", "hessian.diag"), "hessian.diag", false, n));
    } else if (kind == "csr") {
      hessian = std::make_shared<CsrSymmetricOperator>(r.csr(hj, "hessian", n, n));
    } else if (kind == "bfgs") {
      Vector h0 = r.values(r.member(hj, "h0", "hessian.h0"), "hessian.h0", false, n);
      const Index k = r.index_value(r.member(hj, "k", "hessian.k"), "hessian.k");
      const json& cols = r.member(hj, "columns", "hessian.columns");
      if (!cols.is_array() || cols.size() != 2 * k) {
        r.fail("hessian.columns", "expected 2k = " + std::to_string(2 * k) + " columns");
      }
      Vector u;
      u.reserve(2 * k * n);
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const Vector col =
            r.values(cols[c], "hessian.columns[" + std::to_string(c) + "]", false, n);
        u.insert(u.end(), col.begin(), col.end());
      }
      Vector w = r.values(r.member(hj, "weights", "hessian.weights"), "hessian.weights", false,
                          2 * k);
      hessian = std::make_shared<BfgsOperator>(std::move(h0), std::move(u), std::move(w));
    } else {
      r.fail("hessian.kind", "expected diag, csr or bfgs");
    }
  } catch (const FormatError&) {
    throw;
  } catch (const ContractError& e) {
    r.fail("hessian", e.what());
  }

  Vector p = r.values(r.member(doc, "linear_term", "linear_term"), "linear_term", false, n);
  auto a = std::make_shared<const CsrMatrix>(
      r.csr(r.member(doc, "constraints", "constraints"), "constraints", m, n));
  Vector l = r.values(r.member(doc, "lin_lower", "lin_lower"), "lin_lower", true, m);
  Vector u = r.values(r.member(doc, "lin_upper", "lin_upper"), "lin_upper", true, m);
  Vector lo = r.values(r.member(doc, "var_lower", "var_lower"), "var_lower", true, n);
  Vector hi = r.values(r.member(doc, "var_upper", "var_upper"), "var_upper", true, n);
  try {
    return QpProblem(std::move(hessian), std::move(p), std::move(a), std::move(l), std::move(u),
                     std::move(lo), std::move(hi));
  } catch (const ProblemError& e) {
    const std::string& field = e.field();
    const std::string top = field.substr(0, field.find('['));
    throw FormatError(field, key_line(text, top), std::string(e.what()).substr(field.size() + 2));
  }
}

std::string write_problem(const QpProblem& problem) {
  ordered_json doc;
  doc["format"] = kProblemFormat;
  doc["version"] = kVersion;
  doc["n"] = problem.n();
  doc["m"] = problem.m();
  doc["hessian"] = hessian_json(problem.hessian());
  doc["linear_term"] = number_array(problem.linear_term());
  doc["constraints"] = csr_json(problem.constraints());
  doc["lin_lower"] = number_array(problem.lin_lower());
  doc["lin_upper"] = number_array(problem.lin_upper());
  doc["var_lower"] = number_array(problem.var_lower());
  doc["var_upper"] = number_array(problem.var_upper());
  return lines(doc);
}

std::string write_solution(const IpmResult& result, const IpmConfig& cfg,
                           const SolutionOptions& opts) {
  ordered_json doc;
  doc["format"] = kSolutionFormat;
  doc["version"] = kVersion;
  doc["status"] = to_string(result.status);
  doc["message"] = result.message;
  doc["objective"] = result.objective;
  doc["x"] = number_array(result.iterate.x);
  ordered_json mult;
  mult["lin_lower"] = number_array(result.iterate.mult.lin_lower);
  mult["lin_upper"] = number_array(result.iterate.mult.lin_upper);
  mult["var_lower"] = number_array(result.iterate.mult.var_lower);
  mult["var_upper"] = number_array(result.iterate.mult.var_upper);
  doc["multipliers"] = std::move(mult);
  ordered_json res;
  res["norm_inf"] = result.residuals.norm_inf();
  res["dual_inf"] = result.residuals.dual_inf();
  res["primal_inf"] = result.residuals.primal_inf();
  res["comp_inf"] = result.residuals.comp_inf();
  doc["residuals"] = std::move(res);
  doc["mu"] = result.iterate.mu;
  doc["ipm_iterations"] = result.stats.ipm_iterations;
  doc["cg_iterations"] = result.stats.cg_iterations;
  ordered_json c;
  c["mu0_scale"] = cfg.mu0_scale;
  c["mu_tol"] = cfg.mu_tol;
  c["mu_divisor"] = cfg.mu_divisor;
  c["tau"] = cfg.tau;
  c["max_iterations"] = cfg.max_iterations;
  c["pcg_rel_tolerance"] = cfg.pcg_rel_tolerance ? json(*cfg.pcg_rel_tolerance) : json("auto");
  c["pcg_abs_tolerance"] = cfg.pcg_abs_tolerance;
  c["pcg_max_iterations"] =
      cfg.pcg_max_iterations ? json(*cfg.pcg_max_iterations) : json("auto");
  c["pcg_warm_start"] = cfg.pcg_warm_start;
  doc["config"] = std::move(c);
  if (opts.timings) {
    const auto& t = result.stats.timings;
    ordered_json tj;
    tj["setup"] = t.setup_ms;
    tj["rhs"] = t.rhs_ms;
    tj["pcg"] = t.pcg_ms;
    tj["step"] = t.step_ms;
    tj["residual"] = t.residual_ms;
    tj["total"] = t.total_ms;
    doc["timings_ms"] = std::move(tj);
  }
  return lines(doc);
}

std::string trace_record(const IterationTrace& t) {
  ordered_json r;
  r["iteration"] = t.iteration;
  r["mu"] = t.mu;
  r["residual_inf"] = t.residual_inf;
  r["dual_inf"] = t.dual_inf;
  r["primal_inf"] = t.primal_inf;
  r["comp_inf"] = t.comp_inf;
  r["cg_iterations"] = t.cg_iterations;
  r["cg_relative_residual"] = t.cg_relative_residual;
  r["cg_rel_tolerance"] = t.cg_rel_tolerance;
  r["refinement_steps"] = t.refinement_steps;
  r["newton_relative_residual"] = t.newton_relative_residual;
  r["alpha_x"] = t.alpha_x;
  r["alpha_lambda"] = t.alpha_lambda;
  r["min_interior"] = t.min_interior;
  r["mu_decreased"] = t.mu_decreased;
  return r.dump();
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace ipqp::io

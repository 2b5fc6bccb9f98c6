#include "accpen/spec_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace accpen {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& context) {
  if (!j.is_object()) throw SpecError(context + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key()))
      throw SpecError("unknown field '" + item.key() + "' in " + context);
  }
}

double number_field(const json& j, const std::string& what) {
  if (!j.is_number()) throw SpecError(what + " must be a number");
  return j.get<double>();
}

/// Box bounds may be the strings "inf" / "-inf" since JSON has no infinities.
double bound_value(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw SpecError(what + " must be a number or \"inf\"/\"-inf\"");
}

Vector to_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw SpecError(what + " must be an array of numbers");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = number_field(j[i], what);
  return v;
}

Vector to_bound_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw SpecError(what + " must be an array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = bound_value(j[i], what);
  return v;
}

Matrix to_matrix(const json& j, const std::string& what) {
  if (!j.is_array()) throw SpecError(what + " must be an array of rows");
  const std::size_t rows = j.size();
  if (rows == 0) return Matrix(0, 0);
  if (!j[0].is_array()) throw SpecError(what + " rows must be arrays");
  const std::size_t cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw SpecError(what + " rows must all have the same length");
    for (std::size_t c = 0; c < cols; ++c)
      m(r, c) = number_field(j[r][c], what);
  }
  return m;
}

ordered_json vector_json(const Vector& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

ordered_json bound_vector_json(const Vector& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isinf(v(i)))
      arr.push_back(v(i) > 0 ? "inf" : "-inf");
    else
      arr.push_back(v(i));
  }
  return arr;
}

ordered_json matrix_json(const Matrix& m) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    arr.push_back(std::move(row));
  }
  return arr;
}

BoxDomain parse_domain(const json& j) {
  reject_unknown(j, {"lower", "upper", "cap_G", "cap_g"}, "domain");
  if (!j.contains("lower") || !j.contains("upper"))
    throw SpecError("domain needs both 'lower' and 'upper'");
  Vector lower = to_bound_vector(j.at("lower"), "domain.lower");
  Vector upper = to_bound_vector(j.at("upper"), "domain.upper");
  if (j.contains("cap_G") != j.contains("cap_g"))
    throw SpecError("domain cap needs both 'cap_G' and 'cap_g'");
  try {
    if (j.contains("cap_G"))
      return BoxDomain(std::move(lower), std::move(upper),
                       to_matrix(j.at("cap_G"), "domain.cap_G"),
                       to_vector(j.at("cap_g"), "domain.cap_g"));
    return BoxDomain(std::move(lower), std::move(upper));
  } catch (const std::invalid_argument& e) {
    throw SpecError(std::string("invalid domain: ") + e.what());
  }
}

ordered_json domain_json(const BoxDomain& d) {
  ordered_json j;
  j["lower"] = bound_vector_json(d.lower);
  j["upper"] = bound_vector_json(d.upper);
  if (d.cap_G.rows() > 0) {
    j["cap_G"] = matrix_json(d.cap_G);
    j["cap_g"] = vector_json(d.cap_g);
  }
  return j;
}

int int_field(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw SpecError(what + " must be an integer");
  return j.get<int>();
}

std::uint64_t seed_field(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw SpecError(what + " must be an integer");
  return j.get<std::uint64_t>();
}

std::string string_field(const json& j, const std::string& what) {
  if (!j.is_string()) throw SpecError(what + " must be a string");
  return j.get<std::string>();
}

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw SpecError("failed to parse " + path + ": " + e.what());
  }
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw SpecError("cannot open file for writing: " + path);
  out << contents;
  if (!out) throw SpecError("failed while writing " + path);
}

double parse_double_token(const std::string& token, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw SpecError("cannot parse number '" + token + "' in " + what);
  }
}

MethodSpec parse_method(const json& j) {
  reject_unknown(j,
                 {"variant", "label", "alpha", "max_iter", "grad_tol",
                  "record_every", "strong_s", "lipschitz_L", "augmented",
                  "dual_step"},
                 "method");
  if (!j.contains("variant")) throw SpecError("method needs a 'variant'");
  MethodSpec m;
  m.config.variant = parse_solver_variant(string_field(j.at("variant"), "variant"));
  if (j.contains("alpha")) m.config.alpha = number_field(j.at("alpha"), "alpha");
  if (j.contains("max_iter")) {
    m.config.max_iter = int_field(j.at("max_iter"), "max_iter");
    m.has_max_iter = true;
  }
  if (j.contains("grad_tol"))
    m.config.grad_tol = number_field(j.at("grad_tol"), "grad_tol");
  if (j.contains("record_every"))
    m.config.record_every = int_field(j.at("record_every"), "record_every");
  if (j.contains("strong_s"))
    m.config.strong_s = number_field(j.at("strong_s"), "strong_s");
  if (j.contains("lipschitz_L"))
    m.config.lipschitz_L = number_field(j.at("lipschitz_L"), "lipschitz_L");
  if (j.contains("augmented")) {
    if (!j.at("augmented").is_boolean())
      throw SpecError("augmented must be a boolean");
    m.config.augmented = j.at("augmented").get<bool>();
  }
  if (j.contains("dual_step"))
    m.config.dual_step = number_field(j.at("dual_step"), "dual_step");
  if (j.contains("label")) m.label = string_field(j.at("label"), "label");
  if (m.label.empty()) {
    m.label = solver_variant_name(m.config.variant);
    if (m.config.variant == SolverVariant::kSaddlePoint && m.config.augmented)
      m.label += "_augmented";
  }
  return m;
}

ordered_json method_json(const MethodSpec& m) {
  ordered_json j;
  j["variant"] = solver_variant_name(m.config.variant);
  std::string auto_label = solver_variant_name(m.config.variant);
  if (m.config.variant == SolverVariant::kSaddlePoint && m.config.augmented)
    auto_label += "_augmented";
  if (m.label != auto_label) j["label"] = m.label;
  if (m.config.alpha > 0.0) j["alpha"] = m.config.alpha;
  if (m.has_max_iter) j["max_iter"] = m.config.max_iter;
  if (m.config.grad_tol != 1e-9) j["grad_tol"] = m.config.grad_tol;
  if (m.config.record_every != 1) j["record_every"] = m.config.record_every;
  if (m.config.strong_s > 0.0) j["strong_s"] = m.config.strong_s;
  if (m.config.lipschitz_L > 0.0) j["lipschitz_L"] = m.config.lipschitz_L;
  if (m.config.augmented) j["augmented"] = true;
  if (m.config.dual_step > 0.0) j["dual_step"] = m.config.dual_step;
  return j;
}

}  // namespace

SolverVariant parse_solver_variant(const std::string& name) {
  if (name == "nesterov_convex") return SolverVariant::kNesterovConvex;
  if (name == "nesterov_strong") return SolverVariant::kNesterovStrong;
  if (name == "gradient_descent") return SolverVariant::kGradientDescent;
  if (name == "saddle_point") return SolverVariant::kSaddlePoint;
  throw SpecError("unknown solver variant '" + name + "'");
}

EpsilonPolicy parse_epsilon_policy(const std::string& text) {
  if (text == "theorem") return EpsilonPolicy::theorem_bound();
  if (text == "quadratic") return EpsilonPolicy::quadratic_bound();
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  if (head == "fixed" && colon != std::string::npos) {
    const double eps = parse_double_token(text.substr(colon + 1), "epsilon policy");
    if (!(eps > 0.0)) throw SpecError("fixed epsilon must be positive");
    return EpsilonPolicy::fixed(eps);
  }
  if (head == "strong" && colon != std::string::npos) {
    const std::string rest = text.substr(colon + 1);
    const auto second = rest.find(':');
    if (second == std::string::npos) {
      // strong:<s> with c estimated from samples
      const double s = parse_double_token(rest, "epsilon policy");
      if (!(s > 0.0)) throw SpecError("strong-convexity s must be positive");
      return EpsilonPolicy::strong_bound(0.0, s);
    }
    const double c = parse_double_token(rest.substr(0, second), "epsilon policy");
    const double s = parse_double_token(rest.substr(second + 1), "epsilon policy");
    if (!(s > 0.0)) throw SpecError("strong-convexity s must be positive");
    if (!(c > s)) throw SpecError("strong-convexity bound needs c > s");
    return EpsilonPolicy::strong_bound(c, s);
  }
  throw SpecError("unrecognized epsilon policy '" + text +
                  "' (expected fixed:<eps>, theorem, strong:<s>, "
                  "strong:<c>:<s>, or quadratic)");
}

ProblemSpecData parse_problem_spec(const json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw SpecError("problem spec needs a 'kind' field");
  ProblemSpecData spec;
  spec.kind = string_field(j.at("kind"), "kind");

  if (spec.kind == "example1") {
    reject_unknown(j, {"kind", "domain"}, "example1 problem spec");
  } else if (spec.kind == "quadratic") {
    reject_unknown(j, {"kind", "dimension", "num_constraints", "seed", "domain"},
                   "quadratic problem spec");
    if (!j.contains("dimension") || !j.contains("num_constraints"))
      throw SpecError("quadratic spec needs 'dimension' and 'num_constraints'");
    spec.dimension = int_field(j.at("dimension"), "dimension");
    spec.num_constraints = int_field(j.at("num_constraints"), "num_constraints");
    if (j.contains("seed")) spec.seed = seed_field(j.at("seed"), "seed");
  } else if (spec.kind == "exp_benchmark") {
    reject_unknown(j, {"kind", "dimension", "seed", "rhs", "beta", "gamma", "domain"},
                   "exp_benchmark problem spec");
    if (!j.contains("dimension"))
      throw SpecError("exp_benchmark spec needs 'dimension'");
    spec.dimension = int_field(j.at("dimension"), "dimension");
    if (j.contains("seed")) spec.seed = seed_field(j.at("seed"), "seed");
    if (j.contains("rhs")) spec.rhs = number_field(j.at("rhs"), "rhs");
    if (j.contains("beta") != j.contains("gamma"))
      throw SpecError("give both 'beta' and 'gamma' or neither");
    if (j.contains("beta")) {
      spec.beta = to_vector(j.at("beta"), "beta");
      spec.gamma = to_vector(j.at("gamma"), "gamma");
    }
  } else if (spec.kind == "custom_quadratic_data") {
    reject_unknown(j, {"kind", "Q", "h", "A", "b", "domain"},
                   "custom_quadratic_data problem spec");
    for (const char* field : {"Q", "h", "A", "b"})
      if (!j.contains(field))
        throw SpecError(std::string("custom_quadratic_data spec needs '") + field + "'");
    spec.Q = to_matrix(j.at("Q"), "Q");
    spec.h = to_vector(j.at("h"), "h");
    spec.A = to_matrix(j.at("A"), "A");
    spec.b = to_vector(j.at("b"), "b");
  } else {
    throw SpecError("unknown problem kind '" + spec.kind + "'");
  }

  if (j.contains("domain")) spec.domain = parse_domain(j.at("domain"));
  return spec;
}

ProblemSpecData load_problem_spec(const std::string& path) {
  return parse_problem_spec(parse_file(path));
}

ordered_json problem_spec_to_json(const ProblemSpecData& spec) {
  ordered_json j;
  j["kind"] = spec.kind;
  if (spec.kind == "quadratic") {
    j["dimension"] = spec.dimension;
    j["num_constraints"] = spec.num_constraints;
    j["seed"] = spec.seed;
  } else if (spec.kind == "exp_benchmark") {
    j["dimension"] = spec.dimension;
    j["seed"] = spec.seed;
    j["rhs"] = spec.rhs;
    if (spec.beta) j["beta"] = vector_json(*spec.beta);
    if (spec.gamma) j["gamma"] = vector_json(*spec.gamma);
  } else if (spec.kind == "custom_quadratic_data") {
    j["Q"] = matrix_json(*spec.Q);
    j["h"] = vector_json(*spec.h);
    j["A"] = matrix_json(*spec.A);
    j["b"] = vector_json(*spec.b);
  }
  if (spec.domain) j["domain"] = domain_json(*spec.domain);
  return j;
}

void save_problem_spec(const ProblemSpecData& spec, const std::string& path) {
  write_file(path, problem_spec_to_json(spec).dump(2) + "\n");
}

Problem build_problem(const ProblemSpecData& spec) {
  if (spec.kind == "example1") {
    return spec.domain ? make_example1(*spec.domain) : make_example1();
  }
  if (spec.kind == "quadratic") {
    if (spec.dimension < 2) throw SpecError("quadratic spec needs dimension >= 2");
    if (spec.num_constraints < 1 || spec.num_constraints >= spec.dimension)
      throw SpecError("quadratic spec needs 1 <= num_constraints < dimension");
    Problem p = make_random_quadratic(spec.dimension, spec.num_constraints, spec.seed);
    if (spec.domain)
      return Problem(p.objective_ptr(), p.constraint_matrix(), p.constraint_rhs(),
                     *spec.domain);
    return p;
  }
  if (spec.kind == "exp_benchmark") {
    if (spec.dimension < 2)
      throw SpecError("exp_benchmark spec needs dimension >= 2");
    Vector beta, gamma;
    if (spec.beta) {
      beta = *spec.beta;
      gamma = *spec.gamma;
      if (beta.size() != spec.dimension || gamma.size() != spec.dimension)
        throw SpecError("beta/gamma length must equal dimension");
    } else {
      default_exp_coefficients(spec.dimension, spec.seed, &beta, &gamma);
    }
    if (spec.domain)
      return make_exp_benchmark(spec.dimension, beta, gamma, spec.rhs, *spec.domain);
    return make_exp_benchmark(spec.dimension, beta, gamma, spec.rhs);
  }
  if (spec.kind == "custom_quadratic_data") {
    const int n = static_cast<int>(spec.h->size());
    BoxDomain domain = spec.domain ? *spec.domain : BoxDomain::cube(n, -10.0, 10.0);
    return make_quadratic(*spec.Q, *spec.h, *spec.A, *spec.b, std::move(domain));
  }
  throw SpecError("unknown problem kind '" + spec.kind + "'");
}

ExperimentSpecData parse_experiment_spec(const json& j) {
  reject_unknown(j,
                 {"problem", "epsilon", "methods", "iters", "optimal_value",
                  "start", "out", "seed"},
                 "experiment spec");
  if (!j.contains("problem")) throw SpecError("experiment spec needs 'problem'");
  if (!j.contains("methods") || !j.at("methods").is_array() ||
      j.at("methods").empty())
    throw SpecError("experiment spec needs a non-empty 'methods' array");
  ExperimentSpecData spec;
  spec.problem_path = string_field(j.at("problem"), "problem");
  for (const auto& mj : j.at("methods")) spec.methods.push_back(parse_method(mj));
  if (j.contains("epsilon"))
    spec.epsilon_policy = string_field(j.at("epsilon"), "epsilon");
  parse_epsilon_policy(spec.epsilon_policy);  // fail early on bad policies
  if (j.contains("iters")) spec.iters = int_field(j.at("iters"), "iters");
  if (spec.iters < 1) throw SpecError("iters must be >= 1");
  if (j.contains("optimal_value"))
    spec.optimal_value = string_field(j.at("optimal_value"), "optimal_value");
  if (spec.optimal_value != "kkt_oracle" && spec.optimal_value != "reference_run" &&
      spec.optimal_value.rfind("file:", 0) != 0)
    throw SpecError("optimal_value must be kkt_oracle, reference_run, or file:<path>");
  if (j.contains("start")) spec.start = string_field(j.at("start"), "start");
  if (j.contains("out")) spec.out_dir = string_field(j.at("out"), "out");
  if (j.contains("seed")) spec.seed = seed_field(j.at("seed"), "seed");
  return spec;
}

ExperimentSpecData load_experiment_spec(const std::string& path) {
  ExperimentSpecData spec = parse_experiment_spec(parse_file(path));
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  std::filesystem::path problem(spec.problem_path);
  if (problem.is_relative()) spec.problem_path = (base / problem).string();
  if (spec.optimal_value.rfind("file:", 0) == 0) {
    std::filesystem::path ref(spec.optimal_value.substr(5));
    if (ref.is_relative())
      spec.optimal_value = "file:" + (base / ref).string();
  }
  return spec;
}

ordered_json experiment_spec_to_json(const ExperimentSpecData& spec) {
  ordered_json j;
  j["problem"] = spec.problem_path;
  j["epsilon"] = spec.epsilon_policy;
  ordered_json methods = ordered_json::array();
  for (const MethodSpec& m : spec.methods) methods.push_back(method_json(m));
  j["methods"] = std::move(methods);
  j["iters"] = spec.iters;
  j["optimal_value"] = spec.optimal_value;
  j["start"] = spec.start;
  j["out"] = spec.out_dir;
  j["seed"] = spec.seed;
  return j;
}

void save_experiment_spec(const ExperimentSpecData& spec, const std::string& path) {
  write_file(path, experiment_spec_to_json(spec).dump(2) + "\n");
}

ordered_json certificate_to_json(const ConvexityCertificate& cert) {
  ordered_json j;
  j["kind"] = cert.kind == CertificateKind::kConvex ? "convex" : "strongly_convex";
  j["assumption_ok"] = cert.assumption_ok;
  j["for_all_epsilon"] = cert.for_all_epsilon;
  if (std::isnan(cert.epsilon_bound))
    j["epsilon_bound"] = nullptr;  // refused certificates carry no bound
  else
    j["epsilon_bound"] = cert.epsilon_bound;
  if (cert.kind == CertificateKind::kStronglyConvex) {
    j["strong_c"] = cert.strong_c;
    j["strong_s"] = cert.strong_s;
  }
  j["lambda_min_aat"] = cert.lambda_min_aat;
  j["num_samples"] = cert.samples.size();
  if (cert.worst_sample >= 0 &&
      cert.worst_sample < static_cast<int>(cert.samples.size())) {
    const SampleRecord& rec = cert.samples[cert.worst_sample];
    ordered_json w;
    w["index"] = cert.worst_sample;
    w["lambda_min_hw"] = rec.lambda_min_hw;
    w["lambda_max_h"] = rec.lambda_max_h;
    w["r_value"] = rec.r_value;
    w["bound"] = rec.bound;
    w["x"] = vector_json(rec.x);
    j["worst_sample"] = std::move(w);
  } else {
    j["worst_sample"] = nullptr;
  }
  j["degenerate_samples"] = cert.degenerate_samples;
  j["note"] = cert.note;
  ordered_json samples = ordered_json::array();
  for (const SampleRecord& rec : cert.samples) {
    ordered_json s;
    s["x"] = vector_json(rec.x);
    s["lambda_min_hw"] = rec.lambda_min_hw;
    s["lambda_max_h"] = rec.lambda_max_h;
    s["r_value"] = rec.r_value;
    s["bound"] = rec.bound;
    samples.push_back(std::move(s));
  }
  j["samples"] = std::move(samples);
  return j;
}

void save_certificate(const ConvexityCertificate& cert, const std::string& path) {
  write_file(path, certificate_to_json(cert).dump(2) + "\n");
}

void write_trace_csv(const RunTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SpecError("cannot open trace file for writing: " + path);
  out << "k,f,f_eps,gap,residual,wall_time_s\n";
  char buf[512];
  for (const TraceRecord& rec : trace.records) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", rec.k,
                  rec.f, rec.f_eps, rec.gap, rec.residual, rec.wall_time_s);
    out << buf;
  }
  if (!out) throw SpecError("failed while writing " + path);
}

}  // namespace accpen

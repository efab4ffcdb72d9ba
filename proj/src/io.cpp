#include "npga/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace npga {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json matrix_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

VectorXd vector_from_json(const json& j) {
  VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

json check_to_json(const AssumptionCheck& c) {
  json out = {{"pass", c.pass}, {"witness", c.witness}};
  if (!c.note.empty()) out["note"] = c.note;
  return out;
}

json bound_to_json(const Bound& b) {
  return json{{"value", b.value}, {"open", b.open}};
}

}  // namespace

std::string trace_to_csv(const Trace& trace, bool include_timings) {
  std::ostringstream os;
  os << "iter,comm_rounds,gap,consensus_err,kkt,lyapunov,wall_ms\n";
  for (const auto& row : trace.rows) {
    os << row.iter << "," << row.comm_rounds << "," << fmt_double(row.gap) << ","
       << fmt_double(row.consensus_err) << "," << fmt_double(row.kkt) << ","
       << fmt_double(row.lyapunov) << "," << fmt_double(include_timings ? row.wall_ms : 0.0)
       << "\n";
  }
  return os.str();
}

json steps_to_json(const StepSizes& steps) {
  return json{{"alpha", steps.alpha}, {"beta", steps.beta}, {"gamma", steps.gamma}, {"theta", steps.theta}};
}

StepSizes steps_from_json(const json& j) {
  StepSizes s;
  s.alpha = j.at("alpha").get<double>();
  s.beta = j.at("beta").get<double>();
  s.gamma = j.at("gamma").get<double>();
  s.theta = j.value("theta", 0.0);
  return s;
}

json scheme_to_json(const NetworkScheme& scheme) {
  json out;
  out["name"] = scheme.name;
  out["n"] = scheme.n();
  out["comm_rounds"] = scheme.comm_rounds;
  out["B2"] = matrix_to_json(scheme.b2);
  out["C"] = matrix_to_json(scheme.c);
  out["D"] = matrix_to_json(scheme.d);
  if (!scheme.warnings.empty()) out["warnings"] = scheme.warnings;
  return out;
}

json assumption_report_to_json(const AssumptionReport& report) {
  return json{{"a4_i", check_to_json(report.a4_i)},     {"a4_ii", check_to_json(report.a4_ii)},
              {"a4_iii", check_to_json(report.a4_iii)}, {"a4_iv", check_to_json(report.a4_iv)},
              {"a6", check_to_json(report.a6)},         {"a7", check_to_json(report.a7)},
              {"a9", check_to_json(report.a9)},         {"a4", report.a4()}};
}

json mixing_validation_to_json(const MixingValidationReport& report) {
  auto prop = [](const PropertyCheck& c) { return json{{"pass", c.pass}, {"witness", c.witness}}; };
  return json{{"symmetry", prop(report.symmetry)},
              {"sparsity", prop(report.sparsity)},
              {"null_space", prop(report.null_space)},
              {"spectrum", prop(report.spectrum)},
              {"all_pass", report.all_pass()}};
}

json certificate_to_json(const RateCertificate& cert) {
  json out;
  out["case"] = rate_case_to_string(cert.which);
  out["alpha_max"] = bound_to_json(cert.alpha_max);
  out["beta_max"] = bound_to_json(cert.beta_max);
  out["gamma_max"] = bound_to_json(cert.gamma_max);
  out["gamma_depends_on_alpha_beta"] = cert.gamma_depends_on_alpha_beta;
  out["steps"] = steps_to_json(cert.steps);
  out["delta"] = cert.delta;
  out["delta1"] = cert.delta1;
  out["delta2"] = cert.delta2;
  out["delta3"] = cert.delta3;
  out["c1"] = cert.c1;
  out["c2"] = cert.c2;
  out["c3"] = cert.c3;
  out["omega"] = cert.omega;
  out["spectral"] = {{"sigma_max_C", cert.spectral.sigma_max_c},
                     {"sigma_max_B", cert.spectral.sigma_max_b},
                     {"sigma_min_nz_B", cert.spectral.sigma_min_nz_b},
                     {"sigma_max_A_block", cert.spectral.sigma_max_a_block}};
  out["eta_min_E"] = cert.eta_min_e;
  out["eta_min_F"] = cert.eta_min_f;
  out["l_h"] = cert.l_h;
  out["mu"] = cert.mu;
  out["l"] = cert.l;
  return out;
}

json fixed_point_to_json(const FixedPoint& fp) {
  return json{{"x_star", vector_to_json(fp.x_star)},
              {"lambda_star", vector_to_json(fp.lambda_star)},
              {"v_star", vector_to_json(fp.v_star)},
              {"y_star_c", vector_to_json(fp.y_star_c)},
              {"beta", fp.beta},
              {"residuals",
               {{"opt_x", fp.residuals.opt_x},
                {"eq_v", fp.residuals.eq_v},
                {"eq_bv", fp.residuals.eq_bv},
                {"eq_prox", fp.residuals.eq_prox},
                {"col_b_rel", fp.residuals.col_b_rel}}}};
}

FixedPoint fixed_point_from_json(const json& j) {
  FixedPoint fp;
  fp.x_star = vector_from_json(j.at("x_star"));
  fp.lambda_star = vector_from_json(j.at("lambda_star"));
  fp.v_star = vector_from_json(j.at("v_star"));
  fp.y_star_c = vector_from_json(j.at("y_star_c"));
  fp.beta = j.at("beta").get<double>();
  const json& r = j.at("residuals");
  fp.residuals.opt_x = r.at("opt_x").get<double>();
  fp.residuals.eq_v = r.at("eq_v").get<double>();
  fp.residuals.eq_bv = r.at("eq_bv").get<double>();
  fp.residuals.eq_prox = r.at("eq_prox").get<double>();
  fp.residuals.col_b_rel = r.at("col_b_rel").get<double>();
  return fp;
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

}  // namespace npga

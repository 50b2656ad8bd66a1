#include "qspcat.h"

#include <cstring>
#include <string>

#include "core/catalyst.hpp"
#include "core/config.hpp"
#include "core/fejer.hpp"
#include "core/jsonio.hpp"
#include "core/mqsp.hpp"
#include "core/poly.hpp"
#include "core/protocol.hpp"
#include "core/stateconv.hpp"

#define QSPCAT_EXPORT __attribute__((visibility("default")))

namespace {

thread_local std::string g_last_error;

using qspcat::BlockCatalystMatrices;
using qspcat::Catalyst;
using qspcat::Config;
using qspcat::ConversionInstance;
using qspcat::Json;
using qspcat::Mat;
using qspcat::NumericError;
using qspcat::ParseError;
using qspcat::PolyVector;
using qspcat::Protocol;
using qspcat::Vec;

Config make_config(const char* text) {
  Config cfg;
  if (text != nullptr && *text != '\0') cfg.apply_kv_text(text);
  return cfg;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return QSPCAT_OK;
  } catch (const ParseError& e) {
    g_last_error = e.what();
    return QSPCAT_ERR_PARSE;
  } catch (const NumericError& e) {
    g_last_error = e.what();
    return QSPCAT_ERR_NUMERIC;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return QSPCAT_ERR_INTERNAL;
  }
}

int arg_error(const char* what) {
  g_last_error = what;
  return QSPCAT_ERR_ARGUMENT;
}

Json displacement_report_json(const qspcat::DisplacementReport& rep) {
  return Json{{"pass", rep.pass},
              {"max_residual", rep.max_residual},
              {"residual_min_eig", rep.residual_min_eig}};
}

Json catalyst_parts_json(const Catalyst& v) {
  Json parts = Json::array();
  for (const auto& p : v.parts) parts.push_back(qspcat::poly_to_json(p));
  return parts;
}

Catalyst catalyst_from_json_text(const char* text) {
  const Json j = qspcat::parse_json_text(text, "catalyst");
  if (!j.is_object() || !j.contains("parts") || !j.at("parts").is_array())
    throw ParseError("catalyst: expected {\"parts\": [polynomial, ...]}");
  Catalyst v;
  for (const auto& jp : j.at("parts")) v.parts.push_back(qspcat::poly_from_json(jp));
  return v;
}

}  // namespace

extern "C" {

struct qspcat_poly {
  PolyVector value;
};
struct qspcat_protocol {
  Protocol value;
};

QSPCAT_EXPORT const char* qspcat_version(void) { return "0.1.0"; }

QSPCAT_EXPORT const char* qspcat_last_error(void) { return g_last_error.c_str(); }

QSPCAT_EXPORT void qspcat_string_free(char* s) { delete[] s; }

QSPCAT_EXPORT int qspcat_poly_parse(const char* json, qspcat_poly** out) {
  if (json == nullptr || out == nullptr) return arg_error("poly_parse: null argument");
  return guarded([&] {
    Json j = qspcat::parse_json_text(json, "polynomial");
    *out = new qspcat_poly{qspcat::poly_from_json(j)};
  });
}

QSPCAT_EXPORT int qspcat_poly_to_json(const qspcat_poly* p, char** out) {
  if (p == nullptr || out == nullptr) return arg_error("poly_to_json: null argument");
  return guarded([&] { *out = dup_string(qspcat::poly_to_json(p->value).dump()); });
}

QSPCAT_EXPORT void qspcat_poly_free(qspcat_poly* p) { delete p; }

QSPCAT_EXPORT int qspcat_poly_num_vars(const qspcat_poly* p) {
  return p == nullptr ? -1 : p->value.num_vars();
}

QSPCAT_EXPORT int qspcat_poly_ambient_dim(const qspcat_poly* p) {
  return p == nullptr ? -1 : p->value.ambient_dim();
}

QSPCAT_EXPORT int qspcat_poly_degree(const qspcat_poly* p, int var) {
  if (p == nullptr || var < 0 || var >= p->value.num_vars()) return -1;
  return p->value.degree(var);
}

QSPCAT_EXPORT int qspcat_poly_evaluate(const qspcat_poly* p, const double* z,
                                       double* out) {
  if (p == nullptr || z == nullptr || out == nullptr)
    return arg_error("poly_evaluate: null argument");
  return guarded([&] {
    std::vector<qspcat::Complex> zs(p->value.num_vars());
    for (std::size_t i = 0; i < zs.size(); ++i) zs[i] = {z[2 * i], z[2 * i + 1]};
    const Vec v = p->value.evaluate(zs);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      out[2 * i] = v[i].real();
      out[2 * i + 1] = v[i].imag();
    }
  });
}

QSPCAT_EXPORT int qspcat_poly_sup_norm(const qspcat_poly* p, int grid_per_axis,
                                       double* out_max, double* out_min) {
  if (p == nullptr || out_max == nullptr || out_min == nullptr)
    return arg_error("poly_sup_norm: null argument");
  return guarded([&] {
    const auto rep = qspcat::sup_norm_check(p->value, grid_per_axis, 0.0, 1e300, false);
    *out_max = rep.max_norm;
    *out_min = rep.min_norm;
  });
}

QSPCAT_EXPORT int qspcat_complete_outer(const qspcat_poly* p, const char* config,
                                        qspcat_poly** q, char** report_json) {
  if (p == nullptr) return arg_error("complete_outer: null polynomial");
  return guarded([&] {
    const Config cfg = make_config(config);
    PolyVector out = qspcat::complete_outer(p->value, cfg);
    if (report_json != nullptr) {
      const auto gap = qspcat::gap_polynomial(p->value, cfg);
      const auto inv = qspcat::root_inventory(gap, cfg);
      Json roots = Json::array();
      for (std::size_t i = 0; i < inv.roots.size(); ++i)
        roots.push_back(Json{{"root", {inv.roots[i].real(), inv.roots[i].imag()}},
                             {"boundary", static_cast<bool>(inv.boundary[i])},
                             {"partner", inv.partner[i]}});
      Json rep{{"gap_degree", gap.n},
               {"origin_multiplicity", inv.origin_multiplicity},
               {"roots", roots}};
      *report_json = dup_string(rep.dump());
    }
    if (q != nullptr) *q = new qspcat_poly{std::move(out)};
  });
}

QSPCAT_EXPORT int qspcat_enumerate_completions(const qspcat_poly* p, int max_count,
                                               const char* config, char** list_json) {
  if (p == nullptr || list_json == nullptr)
    return arg_error("enumerate_completions: null argument");
  return guarded([&] {
    const Config cfg = make_config(config);
    const auto list = qspcat::enumerate_completions(p->value, max_count, cfg);
    Json out = Json::array();
    for (const auto& qp : list) out.push_back(qspcat::poly_to_json(qp));
    *list_json = dup_string(out.dump());
  });
}

QSPCAT_EXPORT int qspcat_catalyst(const qspcat_poly* tau, int partial, double scale,
                                  const char* config, char** out_json) {
  if (tau == nullptr || out_json == nullptr)
    return arg_error("catalyst: null argument");
  return guarded([&] {
    const Config cfg = make_config(config);
    PolyVector target = tau->value;
    if (partial != 0) target = qspcat::complete_to_state(target, cfg);
    qspcat::CatalystMatrix x = qspcat::catalyst_gram(target, cfg);
    Catalyst v = qspcat::catalyst_from_gram(x, cfg);
    const bool scaled = scale > 0.0 && scale < 1.0;
    if (scaled) {
      v = qspcat::scale_catalyst(v, scale);
      x.x *= scale * scale;
    }
    const auto rep = qspcat::verify_displacement(
        x, scaled ? target.scaled(scale) : target,
        scaled || partial != 0 ? cfg.psd_tol * std::max(x.n, 1) : 1e-9,
        scaled || partial != 0);
    Json out{{"n", x.n},
             {"x", qspcat::matrix_to_json(x.x)},
             {"parts", catalyst_parts_json(v)},
             {"completed_target", qspcat::poly_to_json(target)},
             {"objective", qspcat::catalyst_objective(v)},
             {"verification", displacement_report_json(rep)}};
    *out_json = dup_string(out.dump());
  });
}

QSPCAT_EXPORT int qspcat_protocol_parse(const char* json, const char* config,
                                        qspcat_protocol** out) {
  if (json == nullptr || out == nullptr)
    return arg_error("protocol_parse: null argument");
  return guarded([&] {
    const Config cfg = make_config(config);
    Json j = qspcat::parse_json_text(json, "protocol");
    *out = new qspcat_protocol{qspcat::protocol_from_json(j, cfg.unitarity_tol)};
  });
}

QSPCAT_EXPORT int qspcat_protocol_to_json(const qspcat_protocol* p, char** out) {
  if (p == nullptr || out == nullptr)
    return arg_error("protocol_to_json: null argument");
  return guarded([&] { *out = dup_string(qspcat::protocol_to_json(p->value).dump()); });
}

QSPCAT_EXPORT void qspcat_protocol_free(qspcat_protocol* p) { delete p; }

QSPCAT_EXPORT int qspcat_protocol_dim(const qspcat_protocol* p) {
  return p == nullptr ? -1 : p->value.dim;
}

QSPCAT_EXPORT int qspcat_protocol_length(const qspcat_protocol* p) {
  return p == nullptr ? -1 : p->value.length();
}

QSPCAT_EXPORT int qspcat_protocol_evaluate(const qspcat_protocol* p, const double* z,
                                           double* out) {
  if (p == nullptr || z == nullptr || out == nullptr)
    return arg_error("protocol_evaluate: null argument");
  return guarded([&] {
    std::vector<qspcat::Complex> zs(p->value.num_vars);
    for (std::size_t i = 0; i < zs.size(); ++i) zs[i] = {z[2 * i], z[2 * i + 1]};
    const Vec v = qspcat::evaluate_protocol(p->value, zs);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      out[2 * i] = v[i].real();
      out[2 * i + 1] = v[i].imag();
    }
  });
}

QSPCAT_EXPORT int qspcat_protocol_verify(const qspcat_protocol* p, const qspcat_poly* tau,
                                         int grid_per_axis, double* max_error) {
  if (p == nullptr || tau == nullptr || max_error == nullptr)
    return arg_error("protocol_verify: null argument");
  return guarded(
      [&] { *max_error = qspcat::verify_protocol(p->value, tau->value, grid_per_axis); });
}

QSPCAT_EXPORT int qspcat_synthesize(const qspcat_poly* tau, int via_catalyst,
                                    const char* config, qspcat_protocol** out) {
  if (tau == nullptr || out == nullptr) return arg_error("synthesize: null argument");
  return guarded([&] {
    const Config cfg = make_config(config);
    Protocol p;
    if (via_catalyst != 0) {
      const auto x = qspcat::catalyst_gram(tau->value, cfg);
      const auto v = qspcat::catalyst_from_gram(x, cfg);
      p = qspcat::synthesize_from_catalyst(tau->value, v, cfg);
    } else {
      p = qspcat::synthesize_direct(tau->value, cfg);
    }
    *out = new qspcat_protocol{std::move(p)};
  });
}

QSPCAT_EXPORT int qspcat_mqsp_solve(const qspcat_poly* tau, const int* window,
                                    int partial, int min_rank, const char* config,
                                    char** blocks_json, char** report_json) {
  if (tau == nullptr || window == nullptr || blocks_json == nullptr)
    return arg_error("mqsp_solve: null argument");
  return guarded([&] {
    const Config cfg = make_config(config);
    qspcat::MqspInstance inst{
        tau->value, std::vector<int>(window, window + tau->value.num_vars()),
        partial != 0};
    qspcat::SolveReport rep;
    BlockCatalystMatrices blocks = qspcat::solve_feasibility(inst, cfg, &rep);
    std::vector<int> rank_history;
    if (min_rank != 0) blocks = qspcat::rank_heuristic(inst, blocks, cfg, &rep, &rank_history);
    *blocks_json = dup_string(qspcat::blocks_to_json(blocks).dump());
    if (report_json != nullptr) {
      const auto ranks = qspcat::block_ranks(blocks, cfg);
      const auto support = qspcat::support_check(blocks, inst.window, cfg);
      Json out{{"converged", rep.converged},
               {"iterations", rep.iterations},
               {"constraint_violation", rep.constraint_violation},
               {"block_ranks", ranks},
               {"rank_history", rank_history},
               {"support_ok", support.pass}};
      *report_json = dup_string(out.dump());
    }
  });
}

QSPCAT_EXPORT int qspcat_mqsp_synthesize(const qspcat_poly* tau, const char* blocks_json,
                                         const char* config, qspcat_protocol** out) {
  if (tau == nullptr || blocks_json == nullptr || out == nullptr)
    return arg_error("mqsp_synthesize: null argument");
  return guarded([&] {
    const Config cfg = make_config(config);
    const Json j = qspcat::parse_json_text(blocks_json, "blocks");
    const BlockCatalystMatrices blocks = qspcat::blocks_from_json(j);
    const PolyVector completed = qspcat::complete_from_residual(tau->value, blocks, cfg);
    const auto subs = qspcat::subcatalysts_from_blocks(blocks, cfg);
    *out = new qspcat_protocol{qspcat::synthesize_mqsp(completed, subs, cfg)};
  });
}

QSPCAT_EXPORT int qspcat_simulate(const char* instance_json, const char* catalyst_json,
                                  double epsilon, const char* config,
                                  char** report_json) {
  if (instance_json == nullptr || catalyst_json == nullptr || report_json == nullptr)
    return arg_error("simulate: null argument");
  return guarded([&] {
    const Config cfg = make_config(config);
    const ConversionInstance inst =
        qspcat::instance_from_json(qspcat::parse_json_text(instance_json, "instance"), cfg);
    const Catalyst v = catalyst_from_json_text(catalyst_json);
    const auto labels = qspcat::catalyst_vectors(v, inst);
    const auto rep = qspcat::run_algorithm1(inst, labels, epsilon, cfg);
    Json per_label = Json::array();
    for (std::size_t i = 0; i < rep.error_normalized.size(); ++i)
      per_label.push_back(Json{{"error_normalized", rep.error_normalized[i]},
                               {"error_raw", rep.error_raw[i]},
                               {"las_vegas", rep.las_vegas[i]}});
    Json out{{"T", rep.t_queries},
             {"epsilon", rep.epsilon},
             {"max_error_normalized", rep.max_error_normalized},
             {"max_error_raw", rep.max_error_raw},
             {"per_label", per_label}};
    *report_json = dup_string(out.dump());
  });
}

QSPCAT_EXPORT int qspcat_dual(const char* instance_json, const char* gamma_json,
                              int partial, const char* config, char** report_json) {
  if (instance_json == nullptr || gamma_json == nullptr || report_json == nullptr)
    return arg_error("dual: null argument");
  return guarded([&] {
    const Config cfg = make_config(config);
    const ConversionInstance inst =
        qspcat::instance_from_json(qspcat::parse_json_text(instance_json, "instance"), cfg);
    Json gj = qspcat::parse_json_text(gamma_json, "gamma");
    const Mat gamma =
        qspcat::matrix_from_json(gj.is_object() && gj.contains("matrix") ? gj.at("matrix") : gj);
    const auto rep = qspcat::dual_certificate_value(gamma, inst, partial != 0, cfg);
    Json out{{"accepted", rep.accepted},
             {"value", rep.value},
             {"constraint_eig", rep.constraint_eig},
             {"gamma_max_eig", rep.gamma_max_eig}};
    *report_json = dup_string(out.dump());
  });
}

}  // extern "C"

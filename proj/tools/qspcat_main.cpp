// qspcat command-line tool: completion, catalyst computation, protocol
// synthesis and verification, M-QSP solving, and state-conversion simulation.
// Talks to the core exclusively through the C API in qspcat.h.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qspcat.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitVerification = 1;
constexpr int kExitUsage = 2;

struct CliError {
  int code;
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{kExitUsage, "cannot open file: " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Relative outputs land in QSPCAT_OUT_DIR when set.
std::string resolve_output(const std::string& path) {
  const char* dir = std::getenv("QSPCAT_OUT_DIR");
  if (dir == nullptr || *dir == '\0' || std::filesystem::path(path).is_absolute())
    return path;
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / path).string();
}

void write_file(const std::string& path, const std::string& text) {
  const std::string full = resolve_output(path);
  std::ofstream out(full, std::ios::binary);
  if (!out) throw CliError{kExitUsage, "cannot write file: " + full};
  out << text;
}

std::string sig17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Maps a C API status to the documented exit codes.
void check_status(int status) {
  if (status == QSPCAT_OK) return;
  const int code =
      (status == QSPCAT_ERR_PARSE || status == QSPCAT_ERR_ARGUMENT) ? kExitUsage
                                                                    : kExitVerification;
  throw CliError{code, qspcat_last_error()};
}

std::string take_string(char* s) {
  std::string out = s == nullptr ? "" : s;
  qspcat_string_free(s);
  return out;
}

struct PolyHandle {
  qspcat_poly* p = nullptr;
  ~PolyHandle() { qspcat_poly_free(p); }
};

struct ProtocolHandle {
  qspcat_protocol* p = nullptr;
  ~ProtocolHandle() { qspcat_protocol_free(p); }
};

PolyHandle load_poly(const std::string& path) {
  PolyHandle h;
  check_status(qspcat_poly_parse(read_file(path).c_str(), &h.p));
  return h;
}

// Flat key = value configuration: --config file plus --set overrides.
struct ConfigText {
  std::string text;

  double lookup(const std::string& key, double fallback) const {
    std::istringstream in(text);
    std::string line;
    double value = fallback;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
      };
      if (trim(line.substr(0, eq)) == key) {
        try {
          value = std::stod(trim(line.substr(eq + 1)));
        } catch (const std::exception&) {
        }
      }
    }
    return value;
  }
};

void verify_written_protocol(const std::string& path, const std::string& target_path,
                             const ConfigText& cfg) {
  ProtocolHandle proto;
  check_status(
      qspcat_protocol_parse(read_file(resolve_output(path)).c_str(), cfg.text.c_str(),
                            &proto.p));
  PolyHandle tau = load_poly(target_path);
  double err = 0.0;
  check_status(qspcat_protocol_verify(proto.p, tau.p, 0, &err));
  const double tol = cfg.lookup("synth_tol", 1e-8);
  if (err > std::max(tol, 1e-6))
    throw CliError{kExitVerification,
                   "emitted protocol fails verification (grid error " + sig17(err) + ")"};
}

int run(int argc, char** argv) {
  CLI::App app{"QSP protocol synthesis via state-conversion catalysts"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> config_sets;
  app.add_option("--config", config_path, "flat key = value configuration file");
  app.add_option("--set", config_sets, "config override, e.g. --set seed=7");

  // complete
  auto* complete = app.add_subcommand("complete", "complementary polynomial(s) of P");
  std::string complete_input, complete_mode = "outer";
  int complete_max = 64;
  std::string complete_out = "completions.json";
  std::string complete_report = "completion_report.json";
  complete->add_option("--input", complete_input, "P as polynomial JSON")->required();
  complete->add_option("--mode", complete_mode, "outer | all")
      ->check(CLI::IsMember({"outer", "all"}));
  complete->add_option("--max-count", complete_max, "cap on enumerated completions");
  complete->add_option("--out", complete_out, "output JSON (array of polynomials)");
  complete->add_option("--report", complete_report, "root inventory report JSON");

  // catalyst
  auto* catalyst = app.add_subcommand("catalyst", "catalyst Gram matrix and parts");
  std::string catalyst_target, catalyst_out = "catalyst.json";
  bool catalyst_partial = false;
  double catalyst_scale = 1.0;
  catalyst->add_option("--target", catalyst_target, "tau as polynomial JSON")->required();
  catalyst->add_flag("--partial", catalyst_partial, "complete a partial target first");
  catalyst->add_option("--scale", catalyst_scale, "convert |0> to c*tau, c in (0,1]");
  catalyst->add_option("--out", catalyst_out, "output JSON");

  // synthesize
  auto* synth = app.add_subcommand("synthesize", "layer-stripping synthesis");
  std::string synth_target, synth_out = "protocol.json";
  bool synth_via_catalyst = false;
  synth->add_option("--target", synth_target, "tau as polynomial JSON")->required();
  synth->add_flag("--via-catalyst", synth_via_catalyst,
                  "check every step against the catalyst grading");
  synth->add_option("--out", synth_out, "protocol JSON output")->required();

  // verify
  auto* verify = app.add_subcommand("verify", "grid comparison of protocol vs target");
  std::string verify_protocol, verify_target, verify_csv = "verify.csv";
  int verify_grid = 257;
  verify->add_option("--protocol", verify_protocol, "protocol JSON")->required();
  verify->add_option("--target", verify_target, "tau as polynomial JSON")->required();
  verify->add_option("--grid", verify_grid, "grid points per axis");
  verify->add_option("--out", verify_csv, "CSV output (theta..., error)");

  // mqsp-solve
  auto* msolve = app.add_subcommand("mqsp-solve", "feasibility blocks for M-QSP");
  std::string msolve_target, msolve_window, msolve_out = "blocks.json";
  std::string msolve_report = "solve_report.json";
  bool msolve_partial = false, msolve_minrank = false;
  msolve->add_option("--target", msolve_target, "tau as polynomial JSON")->required();
  msolve->add_option("--window", msolve_window, "per-variable window l1,l2,...")
      ->required();
  msolve->add_flag("--partial", msolve_partial, "only P is given");
  msolve->add_flag("--min-rank", msolve_minrank, "run the rank heuristic");
  msolve->add_option("--out", msolve_out, "blocks JSON output");
  msolve->add_option("--report", msolve_report, "solver report JSON");

  // mqsp-synth
  auto* msynth = app.add_subcommand("mqsp-synth", "protocol from feasibility blocks");
  std::string msynth_target, msynth_blocks, msynth_out = "protocol.json";
  msynth->add_option("--target", msynth_target, "tau as polynomial JSON")->required();
  msynth->add_option("--blocks", msynth_blocks, "blocks JSON from mqsp-solve")
      ->required();
  msynth->add_option("--out", msynth_out, "protocol JSON output")->required();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "state-conversion simulation");
  std::string sim_instance, sim_catalyst, sim_out = "report.json";
  std::vector<double> sim_epsilons;
  simulate->add_option("--instance", sim_instance, "instance JSON")->required();
  simulate->add_option("--catalyst", sim_catalyst, "catalyst JSON with parts")
      ->required();
  simulate->add_option("--epsilon", sim_epsilons, "target error(s)")->required();
  simulate->add_option("--out", sim_out, "report JSON (CSV sidecar alongside)");

  // dual
  auto* dual = app.add_subcommand("dual", "adversary certificate evaluation");
  std::string dual_instance, dual_gamma, dual_out = "dual_report.json";
  bool dual_partial = false;
  dual->add_option("--instance", dual_instance, "instance JSON")->required();
  dual->add_option("--gamma", dual_gamma, "Hermitian label matrix JSON")->required();
  dual->add_flag("--partial", dual_partial, "require Gamma <= 0");
  dual->add_option("--out", dual_out, "report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitUsage;
  }

  ConfigText cfg;
  if (!config_path.empty()) cfg.text = read_file(config_path) + "\n";
  for (const auto& kv : config_sets) cfg.text += kv + "\n";

  if (complete->parsed()) {
    PolyHandle p = load_poly(complete_input);
    char* report = nullptr;
    if (complete_mode == "outer") {
      qspcat_poly* q = nullptr;
      check_status(qspcat_complete_outer(p.p, cfg.text.c_str(), &q, &report));
      PolyHandle qh{q};
      char* qjson = nullptr;
      check_status(qspcat_poly_to_json(qh.p, &qjson));
      write_file(complete_out, "[" + take_string(qjson) + "]");
    } else {
      char* list = nullptr;
      check_status(
          qspcat_enumerate_completions(p.p, complete_max, cfg.text.c_str(), &list));
      write_file(complete_out, take_string(list));
      check_status(qspcat_complete_outer(p.p, cfg.text.c_str(), nullptr, &report));
    }
    write_file(complete_report, take_string(report));
    std::cout << "wrote " << resolve_output(complete_out) << " and "
              << resolve_output(complete_report) << "\n";
    return kExitOk;
  }

  if (catalyst->parsed()) {
    PolyHandle tau = load_poly(catalyst_target);
    char* out = nullptr;
    check_status(qspcat_catalyst(tau.p, catalyst_partial ? 1 : 0, catalyst_scale,
                                 cfg.text.c_str(), &out));
    const std::string text = take_string(out);
    write_file(catalyst_out, text);
    const Json j = Json::parse(text);
    if (!j.at("verification").at("pass").get<bool>())
      throw CliError{kExitVerification, "catalyst verification failed"};
    std::cout << "wrote " << resolve_output(catalyst_out) << " (objective "
              << sig17(j.at("objective").get<double>()) << ")\n";
    return kExitOk;
  }

  if (synth->parsed()) {
    PolyHandle tau = load_poly(synth_target);
    ProtocolHandle proto;
    check_status(qspcat_synthesize(tau.p, synth_via_catalyst ? 1 : 0, cfg.text.c_str(),
                                   &proto.p));
    char* pjson = nullptr;
    check_status(qspcat_protocol_to_json(proto.p, &pjson));
    write_file(synth_out, take_string(pjson));
    verify_written_protocol(synth_out, synth_target, cfg);
    std::cout << "wrote " << resolve_output(synth_out) << " (length "
              << qspcat_protocol_length(proto.p) << ", dimension "
              << qspcat_protocol_dim(proto.p) << ")\n";
    return kExitOk;
  }

  if (verify->parsed()) {
    ProtocolHandle proto;
    check_status(qspcat_protocol_parse(read_file(verify_protocol).c_str(),
                                       cfg.text.c_str(), &proto.p));
    PolyHandle tau = load_poly(verify_target);
    const int m = qspcat_poly_num_vars(tau.p);
    if (verify_grid < 2) throw CliError{kExitUsage, "grid must be at least 2"};

    const int dim_proto = qspcat_protocol_dim(proto.p);
    const int dim_tau = qspcat_poly_ambient_dim(tau.p);
    const int dim = std::max(dim_proto, dim_tau);
    std::ostringstream csv;
    for (int j = 1; j <= m; ++j) csv << "theta_" << j << ",";
    csv << "error\n";
    double max_err = 0.0;
    std::vector<int> idx(m, 0);
    std::vector<double> z(2 * m), a(2 * dim, 0.0), b(2 * dim, 0.0);
    while (true) {
      for (int j = 0; j < m; ++j) {
        const double theta = 2.0 * std::numbers::pi * idx[j] / verify_grid;
        z[2 * j] = std::cos(theta);
        z[2 * j + 1] = std::sin(theta);
      }
      std::fill(a.begin(), a.end(), 0.0);
      std::fill(b.begin(), b.end(), 0.0);
      check_status(qspcat_protocol_evaluate(proto.p, z.data(), a.data()));
      check_status(qspcat_poly_evaluate(tau.p, z.data(), b.data()));
      double err2 = 0.0;
      for (int i = 0; i < 2 * dim; ++i) err2 += (a[i] - b[i]) * (a[i] - b[i]);
      const double err = std::sqrt(err2);
      max_err = std::max(max_err, err);
      for (int j = 0; j < m; ++j)
        csv << sig17(2.0 * std::numbers::pi * idx[j] / verify_grid) << ",";
      csv << sig17(err) << "\n";
      int j = m - 1;
      for (; j >= 0; --j) {
        if (++idx[j] < verify_grid) break;
        idx[j] = 0;
      }
      if (j < 0) break;
    }
    write_file(verify_csv, csv.str());
    const double tol = cfg.lookup("synth_tol", 1e-8);
    std::cout << "max grid error " << sig17(max_err) << " (tolerance "
              << sig17(std::max(tol, 1e-6)) << ")\n";
    if (max_err > std::max(tol, 1e-6))
      throw CliError{kExitVerification, "protocol does not reproduce the target"};
    return kExitOk;
  }

  if (msolve->parsed()) {
    PolyHandle tau = load_poly(msolve_target);
    const int m = qspcat_poly_num_vars(tau.p);
    std::vector<int> window;
    std::stringstream ss(msolve_window);
    std::string item;
    while (std::getline(ss, item, ','))
      try {
        window.push_back(std::stoi(item));
      } catch (const std::exception&) {
        throw CliError{kExitUsage, "bad window entry '" + item + "'"};
      }
    if (static_cast<int>(window.size()) != m)
      throw CliError{kExitUsage, "window must list one bound per variable"};
    char* blocks = nullptr;
    char* report = nullptr;
    check_status(qspcat_mqsp_solve(tau.p, window.data(), msolve_partial ? 1 : 0,
                                   msolve_minrank ? 1 : 0, cfg.text.c_str(), &blocks,
                                   &report));
    write_file(msolve_out, take_string(blocks));
    const std::string report_text = take_string(report);
    write_file(msolve_report, report_text);
    const Json j = Json::parse(report_text);
    std::cout << "converged: " << j.at("converged").get<bool>()
              << ", constraint violation "
              << sig17(j.at("constraint_violation").get<double>()) << "\n";
    if (!j.at("converged").get<bool>())
      throw CliError{kExitVerification,
                     "solver did not reach feasibility (not a proof of infeasibility)"};
    return kExitOk;
  }

  if (msynth->parsed()) {
    PolyHandle tau = load_poly(msynth_target);
    ProtocolHandle proto;
    check_status(qspcat_mqsp_synthesize(tau.p, read_file(msynth_blocks).c_str(),
                                        cfg.text.c_str(), &proto.p));
    char* pjson = nullptr;
    check_status(qspcat_protocol_to_json(proto.p, &pjson));
    write_file(msynth_out, take_string(pjson));
    std::cout << "wrote " << resolve_output(msynth_out) << " (length "
              << qspcat_protocol_length(proto.p) << ", dimension "
              << qspcat_protocol_dim(proto.p) << ")\n";
    return kExitOk;
  }

  if (simulate->parsed()) {
    const std::string instance = read_file(sim_instance);
    const std::string cat = read_file(sim_catalyst);
    Json runs = Json::array();
    std::ostringstream csv;
    csv << "T,max_error\n";
    for (double eps : sim_epsilons) {
      char* report = nullptr;
      check_status(
          qspcat_simulate(instance.c_str(), cat.c_str(), eps, cfg.text.c_str(), &report));
      Json j = Json::parse(take_string(report));
      csv << j.at("T").get<long long>() << ","
          << sig17(j.at("max_error_normalized").get<double>()) << "\n";
      runs.push_back(std::move(j));
    }
    Json out{{"runs", runs}};
    write_file(sim_out, out.dump());
    std::string csv_path = sim_out;
    const auto dot = csv_path.rfind('.');
    csv_path = (dot == std::string::npos ? csv_path : csv_path.substr(0, dot)) + ".csv";
    write_file(csv_path, csv.str());
    std::cout << "wrote " << resolve_output(sim_out) << " and "
              << resolve_output(csv_path) << "\n";
    return kExitOk;
  }

  if (dual->parsed()) {
    char* report = nullptr;
    check_status(qspcat_dual(read_file(dual_instance).c_str(),
                             read_file(dual_gamma).c_str(), dual_partial ? 1 : 0,
                             cfg.text.c_str(), &report));
    const std::string text = take_string(report);
    write_file(dual_out, text);
    const Json j = Json::parse(text);
    if (!j.at("accepted").get<bool>()) {
      std::cout << "certificate rejected (constraint eigenvalue "
                << sig17(j.at("constraint_eig").get<double>()) << ")\n";
      return kExitVerification;
    }
    std::cout << "certificate value " << sig17(j.at("value").get<double>()) << "\n";
    return kExitOk;
  }

  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

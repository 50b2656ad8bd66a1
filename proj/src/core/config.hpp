#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qspcat {

// Thrown on malformed input (bad JSON, schema violations, bad flags).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a numerical precondition or verification fails.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Tolerances and solver options shared across modules. All randomness
// (unitary completions, solver jitter) flows from `seed`.
struct Config {
  double drop_tol = 1e-12;        // coefficients below this are pruned
  double psd_tol = 1e-9;          // PSD slack per unit dimension
  double gap_tol = 1e-9;          // allowed overshoot of |P| above 1
  double boundary_tol = 1e-7;     // ||r|-1| below this marks a boundary root
  double cluster_tol = 1e-5;      // max distance inside a boundary root cluster
  double root_tol = 1e-6;         // root matching / dedup tolerance
  double pairing_tol = 1e-6;      // relative tolerance for reciprocal pairs
  double completion_tol = 1e-9;   // ||P|^2+|Q|^2-1| on the check grid
  double unitarity_tol = 1e-10;
  double ortho_tol = 1e-8;        // endpoint-orthogonality slack in stripping
  double gram_tol = 1e-7;         // Gram mismatch threshold for matching
  double match_tol = 1e-8;        // columnwise error of a matched unitary
  double synth_tol = 1e-8;        // grid error of synthesized protocols
  double feas_tol = 1e-11;        // residual norm declaring total-mode feasibility
  double rank_tol = 1e-7;         // relative eigenvalue cutoff for numerical rank
  double dual_tol = 1e-9;         // slack on the dual constraint lambda_max <= 1
  int max_iter = 20000;           // Dykstra iteration cap
  std::uint64_t seed = 20240901;

  // Parses flat `key = value` lines (TOML-style scalars, '#' comments) and
  // overrides the matching fields. Unknown keys are an error.
  void apply_kv_text(const std::string& text);
  void set(const std::string& key, const std::string& value);
};

}  // namespace qspcat

#include "core/config.hpp"

#include <sstream>

namespace qspcat {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
  auto as_double = [&]() {
    try {
      std::size_t pos = 0;
      double v = std::stod(value, &pos);
      if (pos != value.size()) throw std::invalid_argument(value);
      return v;
    } catch (const std::exception&) {
      throw ParseError("config: bad numeric value '" + value + "' for key '" + key + "'");
    }
  };
  if (key == "drop_tol") drop_tol = as_double();
  else if (key == "psd_tol") psd_tol = as_double();
  else if (key == "gap_tol") gap_tol = as_double();
  else if (key == "boundary_tol") boundary_tol = as_double();
  else if (key == "cluster_tol") cluster_tol = as_double();
  else if (key == "root_tol") root_tol = as_double();
  else if (key == "pairing_tol") pairing_tol = as_double();
  else if (key == "completion_tol") completion_tol = as_double();
  else if (key == "unitarity_tol") unitarity_tol = as_double();
  else if (key == "ortho_tol") ortho_tol = as_double();
  else if (key == "gram_tol") gram_tol = as_double();
  else if (key == "match_tol") match_tol = as_double();
  else if (key == "synth_tol") synth_tol = as_double();
  else if (key == "feas_tol") feas_tol = as_double();
  else if (key == "rank_tol") rank_tol = as_double();
  else if (key == "dual_tol") dual_tol = as_double();
  else if (key == "max_iter") max_iter = static_cast<int>(as_double());
  else if (key == "seed") seed = static_cast<std::uint64_t>(as_double());
  else throw ParseError("config: unknown key '" + key + "'");

  if (key != "seed" && key != "max_iter" && as_double() <= 0.0)
    throw ParseError("config: key '" + key + "' must be positive");
}

void Config::apply_kv_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config: expected 'key = value', got '" + line + "'");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

}  // namespace qspcat

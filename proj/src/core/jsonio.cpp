#include "core/jsonio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace qspcat {
namespace {

Json complex_to_json(const Complex& c) { return Json::array({c.real(), c.imag()}); }

Complex complex_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError(where + ": expected [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

const Json& require(const Json& j, const std::string& key, const std::string& what) {
  if (!j.is_object() || !j.contains(key))
    throw ParseError(what + ": missing field '" + key + "'");
  return j.at(key);
}

int require_int(const Json& j, const std::string& key, const std::string& what) {
  const Json& v = require(j, key, what);
  if (!v.is_number_integer())
    throw ParseError(what + ": field '" + key + "' must be an integer");
  return v.get<int>();
}

}  // namespace

Json poly_to_json(const PolyVector& p) {
  Json terms = Json::array();
  for (const auto& [k, v] : p.coeffs()) {
    Json coeff = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) coeff.push_back(complex_to_json(v[i]));
    terms.push_back(Json{{"exp", k}, {"coeff", coeff}});
  }
  return Json{{"num_vars", p.num_vars()}, {"ambient_dim", p.ambient_dim()},
              {"terms", terms}};
}

PolyVector poly_from_json(const Json& j) {
  const int m = require_int(j, "num_vars", "polynomial");
  const int dim = require_int(j, "ambient_dim", "polynomial");
  if (m < 1 || dim < 1)
    throw ParseError("polynomial: num_vars and ambient_dim must be >= 1");
  PolyVector p(m, dim);
  const Json& terms = require(j, "terms", "polynomial");
  if (!terms.is_array()) throw ParseError("polynomial: 'terms' must be an array");
  for (const auto& t : terms) {
    const Json& exp = require(t, "exp", "polynomial term");
    if (!exp.is_array() || static_cast<int>(exp.size()) != m)
      throw ParseError("polynomial term: 'exp' must list one exponent per variable");
    MultiIndex k;
    for (const auto& e : exp) {
      if (!e.is_number_integer() || e.get<int>() < 0)
        throw ParseError("polynomial term: exponents must be integers >= 0");
      k.push_back(e.get<int>());
    }
    const Json& coeff = require(t, "coeff", "polynomial term");
    if (!coeff.is_array() || static_cast<int>(coeff.size()) != dim)
      throw ParseError("polynomial term: 'coeff' must have ambient_dim entries");
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = complex_from_json(coeff[i], "polynomial coeff");
    try {
      p.add_coeff(k, v);
    } catch (const NumericError& e) {
      throw ParseError(std::string("polynomial: ") + e.what());
    }
  }
  return p;
}

Json matrix_to_json(const Mat& m) {
  Json entries = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      entries.push_back(complex_to_json(m(r, c)));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

Mat matrix_from_json(const Json& j) {
  const int rows = require_int(j, "rows", "matrix");
  const int cols = require_int(j, "cols", "matrix");
  if (rows < 0 || cols < 0) throw ParseError("matrix: negative shape");
  const Json& entries = require(j, "entries", "matrix");
  if (!entries.is_array() || static_cast<int>(entries.size()) != rows * cols)
    throw ParseError("matrix: 'entries' must hold rows*cols pairs");
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      m(r, c) = complex_from_json(entries[r * cols + c], "matrix entry");
  return m;
}

Json vector_to_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v[i]));
  return out;
}

Vec vector_from_json(const Json& j) {
  if (!j.is_array()) throw ParseError("vector: expected an array of [re, im]");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v[i] = complex_from_json(j[i], "vector entry");
  return v;
}

Json protocol_to_json(const Protocol& p) {
  Json layers = Json::array();
  for (const auto& layer : p.layers) {
    Json symbols = Json::array();
    for (int s : layer.symbols)
      symbols.push_back(s == 0 ? "1" : "z" + std::to_string(s));
    layers.push_back(symbols);
  }
  Json unis = Json::array();
  for (const auto& a : p.unitaries) {
    Json entries = Json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c)
        entries.push_back(complex_to_json(a(r, c)));
    unis.push_back(entries);
  }
  return Json{{"N", p.dim}, {"m", p.num_vars}, {"layers", layers}, {"unitaries", unis}};
}

Protocol protocol_from_json(const Json& j, double unitarity_tol) {
  Protocol p;
  p.dim = require_int(j, "N", "protocol");
  p.num_vars = require_int(j, "m", "protocol");
  const Json& layers = require(j, "layers", "protocol");
  const Json& unis = require(j, "unitaries", "protocol");
  if (!layers.is_array() || !unis.is_array())
    throw ParseError("protocol: 'layers' and 'unitaries' must be arrays");
  for (const auto& jl : layers) {
    if (!jl.is_array()) throw ParseError("protocol: each layer must be an array");
    SignalLayer layer;
    for (const auto& js : jl) {
      if (!js.is_string()) throw ParseError("protocol: symbols are strings");
      const std::string s = js.get<std::string>();
      if (s == "1") {
        layer.symbols.push_back(0);
      } else if (s.size() >= 2 && s[0] == 'z') {
        int var = 0;
        try {
          var = std::stoi(s.substr(1));
        } catch (const std::exception&) {
          throw ParseError("protocol: bad symbol '" + s + "'");
        }
        if (var < 1 || var > p.num_vars)
          throw ParseError("protocol: symbol '" + s + "' out of range");
        layer.symbols.push_back(var);
      } else {
        throw ParseError("protocol: bad symbol '" + s + "'");
      }
    }
    p.layers.push_back(layer);
  }
  for (const auto& ja : unis) {
    if (!ja.is_array() || static_cast<int>(ja.size()) != p.dim * p.dim)
      throw ParseError("protocol: each unitary must hold N*N entries");
    Mat a(p.dim, p.dim);
    for (int r = 0; r < p.dim; ++r)
      for (int c = 0; c < p.dim; ++c)
        a(r, c) = complex_from_json(ja[r * p.dim + c], "protocol unitary");
    p.unitaries.push_back(a);
  }
  try {
    p.validate(unitarity_tol);
  } catch (const NumericError& e) {
    throw ParseError(e.what());
  }
  return p;
}

Json blocks_to_json(const BlockCatalystMatrices& x) {
  Json idx = Json::array();
  for (const auto& k : x.x_index_order) idx.push_back(k);
  Json ridx = Json::array();
  for (const auto& k : x.residual_index_order) ridx.push_back(k);
  Json blocks = Json::array();
  for (const auto& b : x.blocks) blocks.push_back(matrix_to_json(b));
  return Json{{"m", x.num_vars},       {"window", x.window},
              {"mode", x.partial ? "partial" : "total"},
              {"index_order", idx},    {"blocks", blocks},
              {"residual_index_order", ridx}, {"residual", matrix_to_json(x.residual)}};
}

BlockCatalystMatrices blocks_from_json(const Json& j) {
  BlockCatalystMatrices x;
  x.num_vars = require_int(j, "m", "blocks");
  const Json& win = require(j, "window", "blocks");
  if (!win.is_array() || static_cast<int>(win.size()) != x.num_vars)
    throw ParseError("blocks: 'window' must list one bound per variable");
  for (const auto& w : win) {
    if (!w.is_number_integer() || w.get<int>() < 1)
      throw ParseError("blocks: window entries must be integers >= 1");
    x.window.push_back(w.get<int>());
  }
  const std::string mode = require(j, "mode", "blocks").get<std::string>();
  if (mode != "total" && mode != "partial")
    throw ParseError("blocks: mode must be 'total' or 'partial'");
  x.partial = mode == "partial";

  auto read_order = [&](const char* key) {
    std::vector<MultiIndex> out;
    const Json& arr = require(j, key, "blocks");
    if (!arr.is_array()) throw ParseError("blocks: index order must be an array");
    for (const auto& e : arr) {
      if (!e.is_array() || static_cast<int>(e.size()) != x.num_vars)
        throw ParseError("blocks: index entries must have m components");
      MultiIndex k;
      for (const auto& c : e) k.push_back(c.get<int>());
      out.push_back(k);
    }
    return out;
  };
  x.x_index_order = read_order("index_order");
  x.residual_index_order = read_order("residual_index_order");
  const Json& blocks = require(j, "blocks", "blocks");
  if (!blocks.is_array() || static_cast<int>(blocks.size()) != x.num_vars)
    throw ParseError("blocks: need one X matrix per variable");
  for (const auto& b : blocks) {
    Mat mat = matrix_from_json(b);
    if (mat.rows() != static_cast<Eigen::Index>(x.x_index_order.size()) ||
        mat.cols() != mat.rows())
      throw ParseError("blocks: X matrix shape does not match the index order");
    x.blocks.push_back(mat);
  }
  x.residual = matrix_from_json(require(j, "residual", "blocks"));
  if (x.residual.rows() != static_cast<Eigen::Index>(x.residual_index_order.size()))
    throw ParseError("blocks: residual shape does not match its index order");
  return x;
}

Json instance_to_json(const ConversionInstance& inst) {
  Json labels = Json::array();
  for (int x = 0; x < inst.labels(); ++x)
    labels.push_back(Json{{"oracle", matrix_to_json(inst.oracles[x])},
                          {"xi", vector_to_json(inst.xi[x])},
                          {"tau", vector_to_json(inst.tau[x])}});
  return Json{{"oracle_dim", inst.oracle_dim},
              {"partial", inst.partial},
              {"labels", labels}};
}

ConversionInstance instance_from_json(const Json& j, const Config& cfg) {
  if (j.is_object() && j.contains("qsp")) {
    const Json& q = j.at("qsp");
    PolyVector tau = poly_from_json(require(q, "target", "qsp instance"));
    const int grid = require_int(q, "grid", "qsp instance");
    try {
      return qsp_instance(tau, grid, cfg);
    } catch (const NumericError& e) {
      throw ParseError(std::string("qsp instance: ") + e.what());
    }
  }
  ConversionInstance inst;
  inst.oracle_dim = require_int(j, "oracle_dim", "instance");
  if (j.contains("partial")) {
    if (!j.at("partial").is_boolean())
      throw ParseError("instance: 'partial' must be a boolean");
    inst.partial = j.at("partial").get<bool>();
  }
  const Json& labels = require(j, "labels", "instance");
  if (!labels.is_array() || labels.empty())
    throw ParseError("instance: 'labels' must be a nonempty array");
  for (const auto& l : labels) {
    inst.oracles.push_back(matrix_from_json(require(l, "oracle", "instance label")));
    inst.xi.push_back(vector_from_json(require(l, "xi", "instance label")));
    inst.tau.push_back(vector_from_json(require(l, "tau", "instance label")));
  }
  try {
    inst.validate(cfg.unitarity_tol);
  } catch (const NumericError& e) {
    throw ParseError(std::string("instance: ") + e.what());
  }
  return inst;
}

Json parse_json_text(const std::string& text, const std::string& what) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError(what + ": malformed JSON");
  return j;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file: " + path);
  out << text;
}

std::string format_sig17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace qspcat

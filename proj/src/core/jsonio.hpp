#pragma once

#include <string>

#include <json.hpp>

#include "core/mqsp.hpp"
#include "core/poly.hpp"
#include "core/protocol.hpp"
#include "core/stateconv.hpp"

namespace qspcat {

using Json = nlohmann::ordered_json;

// Polynomial schema:
//   {"num_vars": m, "ambient_dim": K,
//    "terms": [{"exp": [k_1..k_m], "coeff": [[re,im], ...]}, ...]}
// Terms are emitted in lexicographic order on exp.
Json poly_to_json(const PolyVector& p);
PolyVector poly_from_json(const Json& j);

// Square/rectangular matrix: {"rows": r, "cols": c, "entries": [[re,im], ...]}
// with entries flat in row-major order.
Json matrix_to_json(const Mat& m);
Mat matrix_from_json(const Json& j);

Json vector_to_json(const Vec& v);
Vec vector_from_json(const Json& j);

// Protocol schema: {"N":…, "m":…, "layers":[["1","z1",…],…],
// "unitaries":[[[re,im],…],…]} with each unitary flat row-major.
Json protocol_to_json(const Protocol& p);
Protocol protocol_from_json(const Json& j, double unitarity_tol);

Json blocks_to_json(const BlockCatalystMatrices& x);
BlockCatalystMatrices blocks_from_json(const Json& j);

// Conversion instance: either explicit
//   {"oracle_dim": d, "partial": bool,
//    "labels": [{"oracle": <matrix>, "xi": <vector>, "tau": <vector>}, ...]}
// or the QSP shorthand {"qsp": {"target": <polynomial>, "grid": g}}.
Json instance_to_json(const ConversionInstance& inst);
ConversionInstance instance_from_json(const Json& j, const Config& cfg);

Json parse_json_text(const std::string& text, const std::string& what);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Floats at 17 significant digits, as in every CSV this tool emits.
std::string format_sig17(double v);

}  // namespace qspcat

#include <doctest.h>

#include <random>

#include "core/jsonio.hpp"
#include "testutil.hpp"

using namespace qspcat;
using namespace qspcat::testing;

namespace {
const Config kCfg;
}

TEST_CASE("polynomial JSON round-trip preserves coefficients and term order") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 6; ++trial) {
    PolyVector p = random_normalized_tau(3, 5, rng);
    Json j = poly_to_json(p);
    PolyVector q = poly_from_json(j);
    CHECK(q.num_vars() == p.num_vars());
    CHECK(q.ambient_dim() == p.ambient_dim());
    CHECK(std::abs(l2_inner(p, q) - l2_inner(p, p)) < 1e-14);
    // Canonical ordering: lexicographic on exp.
    MultiIndex prev;
    bool first = true;
    for (const auto& term : j.at("terms")) {
      MultiIndex k = term.at("exp").get<MultiIndex>();
      if (!first) CHECK(prev < k);
      prev = k;
      first = false;
    }
    // Byte-identical re-serialization.
    CHECK(poly_to_json(q).dump() == j.dump());
  }
}

TEST_CASE("polynomial JSON rejects malformed input") {
  CHECK_THROWS_AS(poly_from_json(parse_json_text("{}", "t")), ParseError);
  CHECK_THROWS_AS(poly_from_json(parse_json_text(
                      R"({"num_vars":1,"ambient_dim":1,"terms":[{"exp":[0,1],"coeff":[[1,0]]}]})",
                      "t")),
                  ParseError);
  CHECK_THROWS_AS(poly_from_json(parse_json_text(
                      R"({"num_vars":1,"ambient_dim":2,"terms":[{"exp":[0],"coeff":[[1,0]]}]})",
                      "t")),
                  ParseError);
  CHECK_THROWS_AS(poly_from_json(parse_json_text(
                      R"({"num_vars":1,"ambient_dim":1,"terms":[{"exp":[-1],"coeff":[[1,0]]}]})",
                      "t")),
                  ParseError);
  CHECK_THROWS_AS(parse_json_text("{not json", "t"), ParseError);
}

TEST_CASE("matrix JSON round-trip") {
  Mat m(2, 3);
  m << Complex(1, -2), Complex(0, 1), Complex(3, 0), Complex(-1, 0), Complex(0, 0),
      Complex(2, 2);
  Mat back = matrix_from_json(matrix_to_json(m));
  CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(matrix_from_json(parse_json_text(
                      R"({"rows":2,"cols":2,"entries":[[1,0]]})", "t")),
                  ParseError);
}

TEST_CASE("protocol JSON round-trip") {
  std::mt19937_64 rng(11);
  Protocol p = random_protocol(3, 4, rng);
  Json j = protocol_to_json(p);
  Protocol q = protocol_from_json(j, kCfg.unitarity_tol);
  CHECK(q.dim == p.dim);
  CHECK(q.length() == p.length());
  for (double theta : {0.4, 2.2}) {
    const auto z = torus_point(theta);
    CHECK((evaluate_protocol(p, z) - evaluate_protocol(q, z)).norm() < 1e-14);
  }
  CHECK(protocol_to_json(q).dump() == j.dump());

  // Symbol strings as in the schema.
  CHECK(j.at("layers")[0][0].get<std::string>() == "1");
  CHECK(j.at("layers")[0][2].get<std::string>() == "z1");

  Json bad = j;
  bad["unitaries"][0][0] = Json::array({2.0, 0.0});
  CHECK_THROWS_AS(protocol_from_json(bad, kCfg.unitarity_tol), ParseError);
}

TEST_CASE("blocks JSON round-trip") {
  PolyVector tau = PolyVector::monomial(2, 1, {1, 1}, Vec::Ones(1));
  MqspInstance inst{tau, {2, 2}, false};
  BlockCatalystMatrices x = solve_feasibility(inst, kCfg, nullptr);
  Json j = blocks_to_json(x);
  BlockCatalystMatrices y = blocks_from_json(j);
  CHECK(y.num_vars == x.num_vars);
  CHECK(y.window == x.window);
  CHECK(y.x_index_order == x.x_index_order);
  for (int b = 0; b < 2; ++b)
    CHECK((y.blocks[b] - x.blocks[b]).cwiseAbs().maxCoeff() == 0.0);
  CHECK(blocks_to_json(y).dump() == j.dump());
}

TEST_CASE("instance JSON: explicit labels and qsp shorthand") {
  PolyVector tau = PolyVector::monomial(1, 1, {2}, Vec::Ones(1));
  ConversionInstance inst = qsp_instance(tau, 5, kCfg);
  Json j = instance_to_json(inst);
  ConversionInstance back = instance_from_json(j, kCfg);
  CHECK(back.labels() == inst.labels());
  CHECK((back.oracles[2] - inst.oracles[2]).cwiseAbs().maxCoeff() == 0.0);

  Json shorthand{{"qsp", Json{{"target", poly_to_json(tau)}, {"grid", 5}}}};
  ConversionInstance built = instance_from_json(shorthand, kCfg);
  CHECK(built.labels() == 5);
  CHECK((built.tau[1] - inst.tau[1]).cwiseAbs().maxCoeff() < 1e-15);

  Json bad = shorthand;
  bad["qsp"]["grid"] = 3;  // below 2*deg+1
  CHECK_THROWS_AS(instance_from_json(bad, kCfg), ParseError);
}

TEST_CASE("17-significant-digit formatting round-trips doubles") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double x = gauss(rng) * std::pow(10.0, int(rng() % 7) - 3);
    CHECK(std::stod(format_sig17(x)) == x);
  }
}

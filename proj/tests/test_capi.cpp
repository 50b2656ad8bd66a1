// Exercises the shared-library surface: handles, JSON crossing, error codes.
// Linked against libqspcat only, no core headers.

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include <json.hpp>

#include "qspcat.h"

namespace {

using Json = nlohmann::json;

std::string take(char* s) {
  std::string out = s == nullptr ? "" : s;
  qspcat_string_free(s);
  return out;
}

constexpr const char* kHalfPair =
    R"({"num_vars":1,"ambient_dim":2,"terms":[
        {"exp":[0],"coeff":[[0.5,0],[0.5,0]]},
        {"exp":[1],"coeff":[[0.5,0],[-0.5,0]]}]})";

constexpr const char* kZ8 =
    R"({"num_vars":1,"ambient_dim":1,"terms":[{"exp":[8],"coeff":[[1,0]]}]})";

}  // namespace

TEST_CASE("version and error plumbing") {
  CHECK(std::strlen(qspcat_version()) > 0);
  qspcat_poly* p = nullptr;
  CHECK(qspcat_poly_parse("{oops", &p) == QSPCAT_ERR_PARSE);
  CHECK(std::strlen(qspcat_last_error()) > 0);
  CHECK(qspcat_poly_parse(nullptr, &p) == QSPCAT_ERR_ARGUMENT);
}

TEST_CASE("polynomial handle accessors and evaluation") {
  qspcat_poly* p = nullptr;
  REQUIRE(qspcat_poly_parse(kHalfPair, &p) == QSPCAT_OK);
  CHECK(qspcat_poly_num_vars(p) == 1);
  CHECK(qspcat_poly_ambient_dim(p) == 2);
  CHECK(qspcat_poly_degree(p, 0) == 1);
  double z[2] = {1.0, 0.0};
  double out[4] = {0, 0, 0, 0};
  REQUIRE(qspcat_poly_evaluate(p, z, out) == QSPCAT_OK);
  CHECK(out[0] == doctest::Approx(1.0));
  CHECK(out[2] == doctest::Approx(0.0));
  double mx = 0, mn = 0;
  REQUIRE(qspcat_poly_sup_norm(p, 9, &mx, &mn) == QSPCAT_OK);
  CHECK(mx == doctest::Approx(1.0));
  CHECK(mn == doctest::Approx(1.0));

  char* json = nullptr;
  REQUIRE(qspcat_poly_to_json(p, &json) == QSPCAT_OK);
  qspcat_poly* q = nullptr;
  REQUIRE(qspcat_poly_parse(json, &q) == QSPCAT_OK);
  char* json2 = nullptr;
  REQUIRE(qspcat_poly_to_json(q, &json2) == QSPCAT_OK);
  CHECK(take(json) == take(json2));
  qspcat_poly_free(p);
  qspcat_poly_free(q);
}

TEST_CASE("completion through the C API") {
  qspcat_poly* p = nullptr;
  REQUIRE(qspcat_poly_parse(
              R"({"num_vars":1,"ambient_dim":1,"terms":[{"exp":[1],"coeff":[[0.5,0]]}]})",
              &p) == QSPCAT_OK);
  qspcat_poly* q = nullptr;
  char* report = nullptr;
  REQUIRE(qspcat_complete_outer(p, nullptr, &q, &report) == QSPCAT_OK);
  const Json rep = Json::parse(take(report));
  CHECK(rep.at("gap_degree").get<int>() == 1);
  double z[2] = {1.0, 0.0};
  double out[2] = {0, 0};
  REQUIRE(qspcat_poly_evaluate(q, z, out) == QSPCAT_OK);
  CHECK(out[0] == doctest::Approx(std::sqrt(3.0) / 2.0));
  qspcat_poly_free(q);

  char* list = nullptr;
  REQUIRE(qspcat_enumerate_completions(p, 8, nullptr, &list) == QSPCAT_OK);
  CHECK(Json::parse(take(list)).size() == 1);
  qspcat_poly_free(p);

  // A polynomial above 1 on the torus is a numeric failure, not a parse one.
  qspcat_poly* big = nullptr;
  REQUIRE(qspcat_poly_parse(
              R"({"num_vars":1,"ambient_dim":1,"terms":[{"exp":[1],"coeff":[[2,0]]}]})",
              &big) == QSPCAT_OK);
  CHECK(qspcat_complete_outer(big, nullptr, &q, nullptr) == QSPCAT_ERR_NUMERIC);
  qspcat_poly_free(big);
}

TEST_CASE("catalyst and synthesis through the C API") {
  qspcat_poly* tau = nullptr;
  REQUIRE(qspcat_poly_parse(kHalfPair, &tau) == QSPCAT_OK);
  char* cat = nullptr;
  REQUIRE(qspcat_catalyst(tau, 0, 1.0, nullptr, &cat) == QSPCAT_OK);
  const Json j = Json::parse(take(cat));
  CHECK(j.at("n").get<int>() == 1);
  CHECK(j.at("verification").at("pass").get<bool>());
  CHECK(j.at("x").at("entries")[0][0].get<double>() == doctest::Approx(0.5));
  CHECK(j.at("objective").get<double>() == doctest::Approx(0.5));

  for (int via : {0, 1}) {
    qspcat_protocol* proto = nullptr;
    REQUIRE(qspcat_synthesize(tau, via, nullptr, &proto) == QSPCAT_OK);
    CHECK(qspcat_protocol_length(proto) == 1);
    double err = -1.0;
    REQUIRE(qspcat_protocol_verify(proto, tau, 0, &err) == QSPCAT_OK);
    CHECK(err < 1e-9);
    char* pj = nullptr;
    REQUIRE(qspcat_protocol_to_json(proto, &pj) == QSPCAT_OK);
    qspcat_protocol* parsed = nullptr;
    REQUIRE(qspcat_protocol_parse(take(pj).c_str(), nullptr, &parsed) == QSPCAT_OK);
    CHECK(qspcat_protocol_dim(parsed) == 2);
    qspcat_protocol_free(parsed);
    qspcat_protocol_free(proto);
  }
  qspcat_poly_free(tau);
}

TEST_CASE("config text reaches the core") {
  qspcat_poly* tau = nullptr;
  REQUIRE(qspcat_poly_parse(kHalfPair, &tau) == QSPCAT_OK);
  qspcat_protocol* proto = nullptr;
  CHECK(qspcat_synthesize(tau, 0, "bad_key = 1\n", &proto) == QSPCAT_ERR_PARSE);
  CHECK(qspcat_synthesize(tau, 0, "synth_tol = 1e-6\n", &proto) == QSPCAT_OK);
  qspcat_protocol_free(proto);
  qspcat_poly_free(tau);
}

TEST_CASE("mqsp pipeline through the C API") {
  qspcat_poly* tau = nullptr;
  REQUIRE(qspcat_poly_parse(
              R"({"num_vars":2,"ambient_dim":1,"terms":[{"exp":[1,1],"coeff":[[1,0]]}]})",
              &tau) == QSPCAT_OK);
  const int window[2] = {2, 2};
  char* blocks = nullptr;
  char* report = nullptr;
  REQUIRE(qspcat_mqsp_solve(tau, window, 0, 1, nullptr, &blocks, &report) == QSPCAT_OK);
  const Json rep = Json::parse(take(report));
  CHECK(rep.at("converged").get<bool>());
  CHECK(rep.at("support_ok").get<bool>());
  int total_rank = 0;
  for (const auto& r : rep.at("block_ranks")) total_rank += r.get<int>();
  CHECK(total_rank == 2);

  const std::string blocks_text = take(blocks);
  qspcat_protocol* proto = nullptr;
  REQUIRE(qspcat_mqsp_synthesize(tau, blocks_text.c_str(), nullptr, &proto) == QSPCAT_OK);
  double err = -1.0;
  REQUIRE(qspcat_protocol_verify(proto, tau, 0, &err) == QSPCAT_OK);
  CHECK(err < 1e-6);
  qspcat_protocol_free(proto);
  qspcat_poly_free(tau);
}

TEST_CASE("simulation and dual through the C API") {
  qspcat_poly* z8 = nullptr;
  REQUIRE(qspcat_poly_parse(kZ8, &z8) == QSPCAT_OK);
  char* cat = nullptr;
  REQUIRE(qspcat_catalyst(z8, 0, 1.0, nullptr, &cat) == QSPCAT_OK);
  const std::string cat_text = take(cat);

  Json inst{{"qsp", Json{{"target", Json::parse(kZ8)}, {"grid", 33}}}};
  char* report = nullptr;
  REQUIRE(qspcat_simulate(inst.dump().c_str(), cat_text.c_str(), 0.1, nullptr,
                          &report) == QSPCAT_OK);
  const Json rep = Json::parse(take(report));
  CHECK(rep.at("T").get<int>() == 1600);
  CHECK(rep.at("max_error_normalized").get<double>() <= 0.1);
  CHECK(rep.at("per_label").size() == 33);

  Json gamma{{"rows", 33}, {"cols", 33}};
  Json entries = Json::array();
  for (int i = 0; i < 33 * 33; ++i) entries.push_back(Json::array({0.0, 0.0}));
  gamma["entries"] = entries;
  char* dual = nullptr;
  REQUIRE(qspcat_dual(inst.dump().c_str(), gamma.dump().c_str(), 0, nullptr, &dual) ==
          QSPCAT_OK);
  const Json drep = Json::parse(take(dual));
  CHECK(drep.at("accepted").get<bool>());
  CHECK(drep.at("value").get<double>() == 0.0);
  qspcat_poly_free(z8);
}

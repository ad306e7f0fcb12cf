#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <thread>

#include "dacrank/documents.hpp"
#include "dacrank/pipeline.hpp"
#include "dacrank/service.hpp"

#include <httplib.h>

using namespace dacrank;

namespace {

const std::string kData = DACRANK_TEST_DATA_DIR;

json rank_body() {
  json experts = to_json(read_prior_set(kData + "/elicited_priors.json"))["experts"];
  return json{{"posterior", spec_to_json(Normal{2.29, 0.09446738646980397})},
              {"benchmark", spec_to_json(Uniform{0, 5})},
              {"experts", experts}};
}

std::vector<std::size_t> ranks_by_input(const json& report) {
  std::vector<std::size_t> out;
  for (const auto& e : report["experts"])
    for (const auto& entry : report["entries"])
      if (entry["expert_id"] == e["id"]) out.push_back(entry["rank"].get<std::size_t>());
  return out;
}

// Local server on an ephemeral port for the lifetime of a test case.
struct LiveServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  LiveServer() {
    mount_routes(server);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LiveServer() {
    server.stop();
    thread.join();
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

}  // namespace

TEST_CASE("handlers") {
  const auto health = handle_health();
  CHECK(health.status == 200);
  CHECK(json::parse(health.body)["version"] == kToolVersion);

  const auto d = handle_density(R"({"spec":{"family":"normal","parameters":{"mean":0,"sd":1}},"xs":[0]})");
  REQUIRE(d.status == 200);
  CHECK(json::parse(d.body)["densities"][0].get<double>() == doctest::Approx(0.3989423).epsilon(1e-7));

  const auto q = handle_quantiles(R"({"spec":{"family":"uniform","parameters":{"lower":0,"upper":5}},"ps":[0.2,0.5]})");
  REQUIRE(q.status == 200);
  CHECK(json::parse(q.body)["xs"][0].get<double>() == doctest::Approx(1.0));

  const auto k = handle_kl(R"({"p":{"family":"normal","parameters":{"mean":0,"sd":1}},
                               "q":{"family":"normal","parameters":{"mean":0.5,"sd":1}}})");
  REQUIRE(k.status == 200);
  CHECK(json::parse(k.body)["value"].get<double>() == doctest::Approx(0.125).epsilon(1e-9));
}

TEST_CASE("handler errors") {
  CHECK(handle_density("not json").status == 400);
  CHECK(handle_density(R"({"xs":[0]})").status == 400);
  CHECK(handle_quantiles(R"({"spec":{"family":"normal","parameters":{"mean":0,"sd":1}},"ps":[1.5]})").status == 400);
  const auto bad = handle_kl(R"({"p":{"family":"normal","parameters":{"mean":0,"sd":-1}},
                                 "q":{"family":"normal","parameters":{"mean":0,"sd":1}}})");
  CHECK(bad.status == 400);
  CHECK(json::parse(bad.body).contains("error"));

  auto body = rank_body();
  body["benchmark"] = body["posterior"];
  const auto same = handle_rank(body.dump());
  CHECK(same.status == 422);
  const auto j = json::parse(same.body);
  CHECK(j.contains("diagnostics"));
  CHECK(j["diagnostics"].contains("value"));

  body = rank_body();
  body["experts"] = json::array();
  CHECK(handle_rank(body.dump()).status == 400);
}

TEST_CASE("live HTTP round trips") {
  LiveServer live;
  auto cli = live.client();

  auto health = cli.Get("/api/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(json::parse(health->body)["status"] == "ok");

  auto kl_res = cli.Post("/api/kl", R"({"p":{"family":"normal","parameters":{"mean":0,"sd":1}},
                                       "q":{"family":"normal","parameters":{"mean":0.5,"sd":1}}})",
                         "application/json");
  REQUIRE(kl_res);
  CHECK(kl_res->status == 200);
  CHECK(json::parse(kl_res->body)["value"].get<double>() == doctest::Approx(0.125).epsilon(1e-9));

  auto dens = cli.Post("/api/density", R"({"spec":{"family":"normal","parameters":{"mean":0,"sd":1}},"xs":[0]})",
                       "application/json");
  REQUIRE(dens);
  CHECK(json::parse(dens->body)["densities"][0].get<double>() == doctest::Approx(0.3989423).epsilon(1e-7));

  auto quant = cli.Post("/api/quantiles",
                        R"({"spec":{"family":"skew_normal","parameters":{"location":2.15,"scale":0.09,"shape":0.78}},
                            "ps":[0.621736]})",
                        "application/json");
  REQUIRE(quant);
  CHECK(json::parse(quant->body)["xs"][0].get<double>() == doctest::Approx(2.15).epsilon(1e-5));

  auto rank = cli.Post("/api/rank", rank_body().dump(), "application/json");
  REQUIRE(rank);
  REQUIRE(rank->status == 200);
  const auto report = json::parse(rank->body);
  CHECK(ranks_by_input(report) == std::vector<std::size_t>{2, 3, 4, 1});
  CHECK(report["input_digests"].contains("request"));

  auto schema = cli.Post("/api/rank", R"({"benchmark":{"family":"normal"}})", "application/json");
  REQUIRE(schema);
  CHECK(schema->status == 400);

  auto same_body = rank_body();
  same_body["benchmark"] = same_body["posterior"];
  auto same = cli.Post("/api/rank", same_body.dump(), "application/json");
  REQUIRE(same);
  CHECK(same->status == 422);
}

TEST_CASE("service and library agree") {
  const auto body = rank_body();
  const auto via_service = json::parse(handle_rank(body.dump()).body);
  const auto direct = run_rank(rank_request_from_json(body));
  for (const auto& entry : via_service["entries"]) {
    for (const auto& e : direct.entries)
      if (e.expert_id == entry["expert_id"]) CHECK(entry["dac_value"].get<double>() == e.dac_value);
  }
}

TEST_CASE("rank from observations over HTTP matches the CSV path") {
  const auto data = read_dataset_csv(kData + "/posterior_equivalent.csv");
  auto body = rank_body();
  body.erase("posterior");
  body["observations"] = std::vector<double>(data.observations.begin(), data.observations.end());
  const auto reply = handle_rank(body.dump());
  REQUIRE(reply.status == 200);
  const auto report = json::parse(reply.body);
  CHECK(ranks_by_input(report) == std::vector<std::size_t>{2, 3, 4, 1});
  CHECK(report["benchmark_kl"]["value"].get<double>() == doctest::Approx(2.55).epsilon(1e-9));
}

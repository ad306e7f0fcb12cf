#include "dacrank/service.hpp"

#include "dacrank/dac.hpp"
#include "dacrank/documents.hpp"
#include "dacrank/errors.hpp"
#include "dacrank/pipeline.hpp"

// After Eigen: <resolv.h>, pulled in by httplib, defines a `_res` macro.
#include <httplib.h>

namespace dacrank {

namespace {

HttpReply reply(int status, const json& j) { return {status, j.dump()}; }

HttpReply bad_request(const std::string& message) { return reply(400, json{{"error", message}}); }

json parse_body(std::string_view body) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("body: invalid JSON: ") + e.what());
  }
}

std::vector<double> number_array(const json& j, const char* key) {
  const std::string path = std::string("request.") + key;
  if (!j.is_object() || !j.contains(key)) throw ValidationError(path + ": missing field");
  const auto& a = j.at(key);
  if (!a.is_array()) throw ValidationError(path + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out.push_back(number_from_json(a[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

DistributionSpec spec_field(const json& j, const char* key) {
  const std::string path = std::string("request.") + key;
  if (!j.is_object() || !j.contains(key)) throw ValidationError(path + ": missing field");
  return spec_from_json(j.at(key), path);
}

template <class F>
HttpReply guarded(F&& f) {
  try {
    return f();
  } catch (const BenchmarkRatioError& e) {
    return reply(422, json{{"error", e.what()}, {"diagnostics", to_json(e.kl())}});
  } catch (const ValidationError& e) {
    return bad_request(e.what());
  } catch (const DomainError& e) {
    return bad_request(e.what());
  } catch (const json::exception& e) {
    return bad_request(std::string("body: ") + e.what());
  } catch (const NumericalError& e) {
    return reply(422, json{{"error", e.what()}});
  }
}

}  // namespace

HttpReply handle_density(std::string_view body) {
  return guarded([&] {
    const auto j = parse_body(body);
    const auto spec = spec_field(j, "spec");
    json out = json::array();
    for (double x : number_array(j, "xs")) out.push_back(density(spec, x));
    return reply(200, json{{"densities", std::move(out)}});
  });
}

HttpReply handle_quantiles(std::string_view body) {
  return guarded([&] {
    const auto j = parse_body(body);
    const auto spec = spec_field(j, "spec");
    const auto ps = number_array(j, "ps");
    json out = json::array();
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (!(ps[i] > 0.0 && ps[i] < 1.0))
        throw ValidationError("request.ps[" + std::to_string(i) + "]: must lie strictly inside (0, 1)");
      out.push_back(quantile(spec, ps[i]));
    }
    return reply(200, json{{"xs", std::move(out)}});
  });
}

HttpReply handle_kl(std::string_view body) {
  return guarded([&] {
    const auto j = parse_body(body);
    const auto p = spec_field(j, "p");
    const auto q = spec_field(j, "q");
    QuadratureConfig cfg;
    if (j.contains("quadrature")) cfg = quadrature_from_json(j.at("quadrature"), "request.quadrature");
    return reply(200, to_json(kl(p, q, cfg)));
  });
}

HttpReply handle_rank(std::string_view body) {
  return guarded([&] {
    const auto request = rank_request_from_json(parse_body(body));
    const auto report = run_rank(request);
    const std::map<std::string, std::string> digests{{"request", sha256_hex(rank_request_inputs(request).dump())}};
    return reply(200, report_document(report, digests));
  });
}

HttpReply handle_health() {
  return reply(200, json{{"status", "ok"}, {"tool", "dacrank"}, {"version", kToolVersion}});
}

void mount_routes(httplib::Server& server) {
  auto post = [&server](const char* route, HttpReply (*handler)(std::string_view)) {
    server.Post(route, [handler](const httplib::Request& req, httplib::Response& res) {
      const auto r = handler(req.body);
      res.status = r.status;
      res.set_content(r.body, "application/json");
    });
  };
  post("/api/density", handle_density);
  post("/api/quantiles", handle_quantiles);
  post("/api/kl", handle_kl);
  post("/api/rank", handle_rank);
  server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    const auto r = handle_health();
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });
}

bool serve(const std::string& host, int port) {
  httplib::Server server;
  mount_routes(server);
  return server.listen(host, port);
}

}  // namespace dacrank

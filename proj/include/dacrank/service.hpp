#pragma once

#include <string>
#include <string_view>

namespace httplib {
class Server;
}

namespace dacrank {

/// Status code and JSON body of one service response.
struct HttpReply {
  int status = 200;
  std::string body;
};

// Stateless request handlers. Each takes the raw request body. Schema
// violations answer 400 with a field-level message; numerical failures
// answer 422 with KL diagnostics.
HttpReply handle_density(std::string_view body);
HttpReply handle_quantiles(std::string_view body);
HttpReply handle_kl(std::string_view body);
HttpReply handle_rank(std::string_view body);
HttpReply handle_health();

/// Registers POST /api/density, /api/quantiles, /api/kl, /api/rank and
/// GET /api/health.
void mount_routes(httplib::Server& server);

/// Blocks serving on host:port. Returns false if the socket cannot be bound.
bool serve(const std::string& host, int port);

}  // namespace dacrank

#pragma once

// HTTP front end: GET /v1/<endpoint> answered by CounselorApi.

#include "aic/api.hpp"
#include "aic/error.hpp"

#include <memory>

namespace httplib {
class Server;
}

namespace aic {

struct ServiceOptions {
  /// Per-request budget in seconds; slower requests get 503.
  double timeout = 10;
};

/// 400 for invalid arguments and parse errors, 404 not found, 422 for
/// insufficient history, data integrity and invalid prices, 500 otherwise.
int http_status(Error::Kind kind);

void install_routes(httplib::Server& server, std::shared_ptr<const CounselorApi> api, const ServiceOptions& options);

}  // namespace aic

#include "aic/service.hpp"

#include "aic/log.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdio>
#include <future>
#include <random>
#include <thread>

namespace aic {

namespace {

using json = nlohmann::json;

std::string opaque_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

struct Reply {
  int status = 200;
  json body;
};

Reply answer(const CounselorApi& api, const std::string& endpoint, const Query& query) {
  try {
    return {200, api.handle(endpoint, query)};
  } catch (const Error& e) {
    const int status = http_status(e.kind());
    if (status == 500) {
      const std::string id = opaque_id();
      log::error("request_failed", {{"id", id}, {"endpoint", endpoint}, {"kind", kind_name(e.kind())}, {"message", e.what()}});
      return {500, {{"error", "internal"}, {"id", id}}};
    }
    return {status, {{"error", kind_name(e.kind())}, {"message", e.what()}}};
  } catch (const std::exception& e) {
    const std::string id = opaque_id();
    log::error("request_failed", {{"id", id}, {"endpoint", endpoint}, {"message", e.what()}});
    return {500, {{"error", "internal"}, {"id", id}}};
  }
}

}  // namespace

int http_status(Error::Kind kind) {
  switch (kind) {
    case Error::Kind::kInvalidArgument:
    case Error::Kind::kParse:
      return 400;
    case Error::Kind::kNotFound:
      return 404;
    case Error::Kind::kInsufficientHistory:
    case Error::Kind::kDataIntegrity:
    case Error::Kind::kInvalidPrice:
      return 422;
    case Error::Kind::kConvergence:
    case Error::Kind::kNoRuleFired:
      return 500;
  }
  return 500;
}

void install_routes(httplib::Server& server, std::shared_ptr<const CounselorApi> api, const ServiceOptions& options) {
  const std::string fingerprint = api->workspace().fingerprint();
  const double timeout = options.timeout;
  server.Get(R"(/v1/([a-z]+))", [api, fingerprint, timeout](const httplib::Request& req, httplib::Response& res) {
    const std::string endpoint = req.matches[1];
    Query query;
    for (const auto& [k, v] : req.params) {
      if (query.contains(k)) {
        res.status = 400;
        res.set_content(json{{"error", "invalid_argument"}, {"message", "parameter '" + k + "' repeated"}, {"fingerprint", fingerprint}}.dump(),
                        "application/json");
        return;
      }
      query[k] = v;
    }
    const auto started = std::chrono::steady_clock::now();
    // The worker owns copies of everything it touches, so a timed-out
    // request can finish in the background without dangling references.
    auto task = std::make_shared<std::packaged_task<Reply()>>([api, endpoint, query] { return answer(*api, endpoint, query); });
    auto future = task->get_future();
    std::thread([task] { (*task)(); }).detach();
    Reply reply;
    if (future.wait_for(std::chrono::duration<double>(timeout)) == std::future_status::ready) {
      reply = future.get();
    } else {
      const long retry = std::max(1L, static_cast<long>(std::ceil(timeout)));
      reply = {503, {{"error", "timeout"}, {"message", "request exceeded " + std::to_string(timeout) + " s"}, {"retry_after", retry}}};
      res.set_header("Retry-After", std::to_string(retry));
    }
    reply.body["fingerprint"] = fingerprint;
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
    log::info("request", {{"endpoint", endpoint},
                          {"status", reply.status},
                          {"ms", std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count()}});
  });
}

}  // namespace aic

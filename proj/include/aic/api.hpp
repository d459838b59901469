#pragma once

// Request handling shared by the CLI and the HTTP service. Every answer is a
// JSON document carrying the configuration fingerprint.

#include "aic/workspace.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <string>

namespace aic {

using Query = std::map<std::string, std::string>;

class CounselorApi {
 public:
  explicit CounselorApi(std::shared_ptr<const Workspace> workspace);

  const Workspace& workspace() const { return *workspace_; }

  /// Dispatches by endpoint name (stocks, forecast, frontier, recommend,
  /// backtest). Throws NotFound for an unknown endpoint and InvalidArgument
  /// for malformed or unknown parameters.
  nlohmann::json handle(const std::string& endpoint, const Query& query) const;

  nlohmann::json stocks(const Query& query) const;
  nlohmann::json forecast(const Query& query) const;
  nlohmann::json frontier(const Query& query) const;
  nlohmann::json recommend(const Query& query) const;
  nlohmann::json backtest(const Query& query) const;

 private:
  std::shared_ptr<const Workspace> workspace_;
};

}  // namespace aic

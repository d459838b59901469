#include "aic/api.hpp"
#include "aic/cli.hpp"
#include "aic/service.hpp"

#include "synthetic.hpp"
#include "temp_dir.hpp"

#include <doctest.h>
#include <httplib.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

using namespace aic;
using aic::testing::TempDir;
using json = nlohmann::json;

namespace {

const std::vector<std::string> kUniverse{"AAA", "BBB", "CCC", "DDD", "EEE"};

const TempDir& data_dir() {
  static const TempDir dir;
  static const bool written = [] {
    synthetic::Options opt;
    opt.symbols = kUniverse;
    opt.incomplete = {"EEE"};
    synthetic::write_dataset(dir.path(), opt);
    return true;
  }();
  (void)written;
  return dir;
}

RunConfig test_config() {
  RunConfig c = load_config(std::nullopt, [](const std::string&) { return std::nullopt; });
  c.data_dir = data_dir().path();
  c.universe = kUniverse;
  c.dma = 20;
  return c;
}

std::shared_ptr<const CounselorApi> api() {
  static const auto a = std::make_shared<const CounselorApi>(std::make_shared<const Workspace>(test_config()));
  return a;
}

void check_simplex(const json& weights) {
  double sum = 0;
  for (const auto& w : weights) {
    CHECK(w["weight"].get<double>() >= -1e-12);
    sum += w["weight"].get<double>();
  }
  CHECK(sum == doctest::Approx(1).epsilon(1e-9));
}

/// Serves the API on an ephemeral port for the lifetime of the object.
class TestServer {
 public:
  explicit TestServer(ServiceOptions options) {
    install_routes(server_, api(), options);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~TestServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> cli_globals() {
  return {"--data-dir", data_dir().path().string(), "--universe", "AAA,BBB,CCC,DDD,EEE", "--dma", "20"};
}

}  // namespace

TEST_CASE("stocks endpoint") {
  const json j = api()->handle("stocks", {});
  CHECK(j["fingerprint"] == api()->workspace().fingerprint());
  CHECK(j["stocks"].size() == 5);
  CHECK(j["investable"] == json({"AAA", "BBB", "CCC", "DDD"}));
  const auto& eee = j["stocks"][4];
  CHECK(eee["incomplete"] == true);
  CHECK(eee["investable"] == false);
  CHECK(eee.contains("excluded"));
  CHECK_THROWS_AS(api()->handle("stocks", {{"x", "1"}}), InvalidArgument);
  CHECK_THROWS_AS(api()->handle("nothing", {}), NotFound);
}

TEST_CASE("forecast endpoint") {
  const json all = api()->handle("forecast", {{"symbol", "AAA"}});
  REQUIRE(all["rows"].size() > 10);
  CHECK(all["metrics"]["hr"].get<double>() >= 0);
  const std::string third = all["rows"][2]["date"];
  const json tail = api()->handle("forecast", {{"symbol", "AAA"}, {"from", third}});
  CHECK(tail["rows"].size() == all["rows"].size() - 2);
  CHECK_THROWS_AS(api()->handle("forecast", {}), InvalidArgument);
  CHECK_THROWS_AS(api()->handle("forecast", {{"symbol", "AAA"}, {"from", "May 3"}}), InvalidArgument);
  CHECK_THROWS_AS(api()->handle("forecast", {{"symbol", "ZZZ"}}), NotFound);
}

TEST_CASE("frontier endpoint") {
  const json j = api()->handle("frontier", {});
  REQUIRE(j["points"].size() >= 1);
  CHECK(j["symbols"].size() == 4);
  double previous = -1;
  for (const auto& p : j["points"]) {
    CHECK(p["risk"].get<double>() >= previous - 1e-9);
    previous = p["risk"];
  }
  const std::string early = to_string(api()->workspace().calendar()[5]);
  CHECK_THROWS_AS(api()->handle("frontier", {{"date", early}}), InsufficientHistory);
}

TEST_CASE("recommend endpoint") {
  for (const char* method : {"portfolio", "fic"}) {
    for (const char* eta : {"0", "0.3", "1"}) {
      const json j = api()->handle("recommend", {{"method", method}, {"eta", eta}});
      CHECK(j["method"] == method);
      check_simplex(j["weights"]);
    }
  }
  const json fic = api()->handle("recommend", {{"method", "fic"}});
  CHECK(fic["audit"].size() == 4);
  for (const auto& row : fic["audit"]) {
    CHECK(row["alpha"].get<double>() >= 0);
    CHECK(row["alpha"].get<double>() <= 1);
  }
  CHECK_THROWS_AS(api()->handle("recommend", {{"eta", "2"}}), InvalidArgument);
  CHECK_THROWS_AS(api()->handle("recommend", {{"method", "random"}}), InvalidArgument);
  CHECK_THROWS_AS(api()->handle("recommend", {{"mu", "1"}}), InvalidArgument);
}

TEST_CASE("backtest endpoint") {
  const Index start = api()->workspace().latest_decision_day() - 9;
  const json j = api()->handle("backtest", {{"start", std::to_string(start)}, {"days", "10"}, {"seed", "5"}});
  REQUIRE(j["ledgers"].size() == 3);
  for (const auto& ledger : j["ledgers"]) {
    CHECK(ledger["rows"].size() == 10);
    CHECK(ledger["final_budget"].get<double>() > 0);
  }
  const json again = api()->handle("backtest", {{"start", std::to_string(start)}, {"days", "10"}, {"seed", "5"}});
  CHECK(again == j);
  CHECK_THROWS_AS(api()->handle("backtest", {{"start", "0"}, {"days", "100000"}}), NotFound);
  CHECK_THROWS_AS(api()->handle("backtest", {{"days", "0"}}), InvalidArgument);
}

TEST_CASE("HTTP status mapping") {
  CHECK(http_status(Error::Kind::kInvalidArgument) == 400);
  CHECK(http_status(Error::Kind::kParse) == 400);
  CHECK(http_status(Error::Kind::kNotFound) == 404);
  CHECK(http_status(Error::Kind::kInsufficientHistory) == 422);
  CHECK(http_status(Error::Kind::kDataIntegrity) == 422);
  CHECK(http_status(Error::Kind::kInvalidPrice) == 422);
  CHECK(http_status(Error::Kind::kConvergence) == 500);
  CHECK(http_status(Error::Kind::kNoRuleFired) == 500);
}

TEST_CASE("HTTP service") {
  TestServer server({10});
  auto client = server.client();
  const std::string fp = api()->workspace().fingerprint();

  auto get = [&](const std::string& path) {
    auto res = client.Get(path);
    REQUIRE(res);
    return std::make_pair(res->status, json::parse(res->body));
  };

  const auto [ok, body] = get("/v1/recommend?method=fic&eta=0.3");
  CHECK(ok == 200);
  CHECK(body["fingerprint"] == fp);
  CHECK(body == api()->handle("recommend", {{"method", "fic"}, {"eta", "0.3"}}));

  const auto [unknown, unknown_body] = get("/v1/recommend?bogus=1");
  CHECK(unknown == 400);
  CHECK(unknown_body["error"] == "invalid_argument");
  CHECK(unknown_body["fingerprint"] == fp);
  CHECK(get("/v1/recommend?eta=0.1&eta=0.2").first == 400);
  CHECK(get("/v1/nothing").first == 404);
  CHECK(get("/v1/forecast?symbol=ZZZ").first == 404);
  const std::string early = to_string(api()->workspace().calendar()[5]);
  const auto [short_history, short_body] = get("/v1/recommend?date=" + early);
  CHECK(short_history == 422);
  CHECK(short_body["error"] == "insufficient_history");
}

TEST_CASE("HTTP timeout answers 503 with Retry-After") {
  {
    TestServer server({1e-6});
    auto client = server.client();
    auto res = client.Get("/v1/backtest?method=all&days=20&start=" +
                          std::to_string(api()->workspace().latest_decision_day() - 19));
    REQUIRE(res);
    CHECK(res->status == 503);
    CHECK(res->get_header_value("Retry-After") == "1");
    const json body = json::parse(res->body);
    CHECK(body["error"] == "timeout");
    CHECK(body["retry_after"] == 1);
    CHECK(body["fingerprint"] == api()->workspace().fingerprint());
  }
  // Let the abandoned worker finish before the process tears down.
  std::this_thread::sleep_for(std::chrono::seconds(2));
}

TEST_CASE("CLI") {
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"recommend", "--frobnicate"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"--log-level", "loud", "ingest"}).code == 2);

  const auto missing = cli({"--data-dir", "/nonexistent/data", "ingest"});
  CHECK(missing.code == 1);
  const json err = json::parse(missing.err);
  CHECK(err["kind"] == "not_found");
  CHECK(err["http_status"] == 404);

  auto args = cli_globals();
  args.insert(args.end(), {"recommend", "--method", "fic", "--eta", "0.3"});
  const auto rec = cli(args);
  REQUIRE(rec.code == 0);
  CHECK(json::parse(rec.out) == api()->handle("recommend", {{"method", "fic"}, {"eta", "0.3"}}));

  TempDir out;
  args = cli_globals();
  args.insert(args.end(), {"indicators", "--symbol", "AAA", "--out", (out / "aaa.csv").string()});
  REQUIRE(cli(args).code == 0);
  std::ifstream csv(out / "aaa.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "date,high,low,close,adx,spdi,smdi,sar");
}

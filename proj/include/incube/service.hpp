#pragma once

#include <atomic>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "incube/cube.hpp"
#include "incube/mining.hpp"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace incube {

struct HttpResponse {
  int status = 200;
  std::string body;
  std::map<std::string, std::string> headers;
};

struct ServiceOptions {
  // Mining requests whose input holds more items than this run as jobs.
  std::size_t async_item_threshold = 200000;
};

// Body of a /query response: the result plus the effective query under
// "query".
nlohmann::json query_response_json(const CellQuery& effective, const CellResult& result);

nlohmann::json rules_to_json(const std::vector<AssociationRule>& rules);
nlohmann::json patterns_to_json(const std::vector<SequentialPattern>& patterns);
nlohmann::json outliers_to_json(const std::vector<OutlierReport>& reports);

// Read-only JSON facade over one fact table. Endpoints:
//   GET  /schema
//   POST /query
//   POST /mine/rules, /mine/sequences, /mine/outliers
//   GET  /jobs/{id}
// Responses are a pure function of (snapshot, request); the elapsed time is
// reported in the X-Elapsed-Us header only.
class CubeService {
 public:
  explicit CubeService(ServiceOptions options = {});
  ~CubeService();

  CubeService(const CubeService&) = delete;
  CubeService& operator=(const CubeService&) = delete;

  // Requests already running keep the table they started with.
  void load(std::shared_ptr<const FactTable> table);
  std::shared_ptr<const FactTable> table() const;

  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

  // Blocks until stop(). Returns false when the address cannot be bound.
  bool listen(const std::string& host, int port);
  // Binds to an ephemeral port and returns it, or -1.
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();

 private:
  struct Job;

  HttpResponse schema() const;
  HttpResponse query(std::string_view body) const;
  HttpResponse mine(std::string_view kind, std::string_view body);
  HttpResponse job_status(std::string_view id) const;
  void install_routes();

  ServiceOptions options_;
  mutable std::mutex table_mutex_;
  std::shared_ptr<const FactTable> table_;

  mutable std::mutex jobs_mutex_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
  std::size_t next_job_ = 1;

  std::unique_ptr<httplib::Server> server_;
  std::vector<std::jthread> workers_;  // last, so workers finish first
};

}  // namespace incube

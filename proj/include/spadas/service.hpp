#pragma once

// HTTP/JSON front end over a loaded UnifiedIndex.
//
//   GET  /datasets
//   POST /search/datasets/range      {"lo": [x, y], "hi": [x, y]}
//   POST /search/datasets/exemplar   {"points": [[x, y, ...], ...], "metric": "ia"|"gbo"|
//                                     "haus_exact"|"haus_approx", "k": 10, "epsilon": 1.5}
//   POST /datasets/{id}/points/range {"lo": [x, y], "hi": [x, y]}
//   POST /datasets/{id}/points/nn    {"points": [[x, y, ...], ...]}

#include <cstddef>
#include <memory>
#include <mutex>
#include <string>

#include "spadas/index.hpp"

namespace spadas {

struct ServiceConfig {
  std::size_t max_payload_bytes = 16 * 1024 * 1024;
};

struct HttpResponse {
  int status = 200;
  std::string body;
};

class Service {
 public:
  explicit Service(ServiceConfig config = {});

  /// Swaps the served index; requests already running keep the old one.
  void load(std::shared_ptr<const UnifiedIndex> index);
  std::shared_ptr<const UnifiedIndex> index() const;

  /// Routes one request. Never throws; failures become 4xx/5xx bodies of the
  /// form {"error": "..."}.
  HttpResponse handle(const std::string& method, const std::string& path,
                      const std::string& body) const;

  const ServiceConfig& config() const { return config_; }

 private:
  ServiceConfig config_;
  mutable std::mutex mutex_;
  std::shared_ptr<const UnifiedIndex> index_;
};

/// Serves `service` on host:port until stop() is called from another thread.
class HttpServer {
 public:
  HttpServer(Service& service, std::string static_dir = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; returns the bound port (useful with port 0). Throws on failure.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Rounds to 12 significant decimal digits, the precision scores are served at.
double round_score(double value);

}  // namespace spadas

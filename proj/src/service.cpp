#include "spadas/service.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <regex>
#include <stdexcept>

#include "httplib.h"
#include "json.hpp"
#include "spadas/search.hpp"

namespace spadas {

using nlohmann::json;

namespace {

struct HttpError : std::runtime_error {
  HttpError(int s, const std::string& what) : std::runtime_error(what), status(s) {}
  int status;
};

HttpResponse error_response(int status, const std::string& message) {
  return {status, json{{"error", message}}.dump()};
}

json parse_body(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw HttpError(400, "request body is not valid JSON");
  if (!j.is_object()) throw HttpError(400, "request body must be a JSON object");
  return j;
}

std::array<double, 2> corner(const json& j, const char* key) {
  if (!j.contains(key)) throw HttpError(400, std::string("missing field '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw HttpError(400, std::string("'") + key + "' must be [x, y]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

RangeQuery range_of(const json& j) {
  const auto lo = corner(j, "lo");
  const auto hi = corner(j, "hi");
  if (!(lo[0] <= hi[0] && lo[1] <= hi[1])) throw HttpError(400, "'lo' must not exceed 'hi'");
  return RangeQuery(lo, hi);
}

Dataset query_of(const json& j, std::size_t dims) {
  if (!j.contains("points") || !j.at("points").is_array()) {
    throw HttpError(400, "missing array field 'points'");
  }
  const auto& pts = j.at("points");
  if (pts.empty()) throw HttpError(400, "'points' must not be empty");
  std::vector<double> coords;
  coords.reserve(pts.size() * dims);
  for (const auto& p : pts) {
    if (!p.is_array() || p.size() != dims) {
      throw HttpError(400, "every point needs " + std::to_string(dims) + " coordinates");
    }
    for (const auto& c : p) {
      if (!c.is_number()) throw HttpError(400, "coordinates must be numbers");
      coords.push_back(c.get<double>());
    }
  }
  return Dataset(0, "query", dims, std::move(coords));
}

json coords_json(std::span<const double> p) { return json(std::vector<double>(p.begin(), p.end())); }

json mbr_json(const Mbr& m) { return {{"lo", m.lo}, {"hi", m.hi}}; }

DatasetId id_of(const std::string& text) {
  // Path ids are plain decimal u32.
  DatasetId v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) throw HttpError(404, "unknown dataset " + text);
  return v;
}

const IndexedDataset& dataset_of(const UnifiedIndex& idx, const std::string& text) {
  const auto* d = idx.find(id_of(text));
  if (!d) throw HttpError(404, "unknown dataset " + text);
  return *d;
}

json list_datasets(const UnifiedIndex& idx) {
  json out = json::array();
  for (const auto& d : idx.datasets()) {
    out.push_back({{"id", d.id},
                   {"name", d.name},
                   {"point_count", d.tree.size()},
                   {"original_count", d.original_count},
                   {"mbr", mbr_json(d.mbr())}});
  }
  return out;
}

json dataset_range(const UnifiedIndex& idx, const json& body) {
  return {{"ids", range_dataset_search(idx, range_of(body))}};
}

json exemplar(const UnifiedIndex& idx, const json& body) {
  if (!body.contains("metric") || !body.at("metric").is_string()) {
    throw HttpError(400, "missing string field 'metric'");
  }
  MetricKind metric;
  try {
    metric = parse_metric(body.at("metric").get<std::string>());
  } catch (const Error& e) {
    throw HttpError(400, e.what());
  }
  std::size_t k = 10;
  if (body.contains("k")) {
    const auto& kj = body.at("k");
    if (!kj.is_number_integer() || kj.get<std::int64_t>() < 1) throw HttpError(400, "'k' must be an integer >= 1");
    k = kj.get<std::size_t>();
  }
  ExemplarOptions options;
  if (body.contains("epsilon") && !body.at("epsilon").is_null()) {
    const auto& e = body.at("epsilon");
    if (!e.is_number() || !(e.get<double>() > 0.0)) throw HttpError(400, "'epsilon' must be a positive number");
    options.epsilon = e.get<double>();
  }
  const Dataset query = query_of(body, idx.dims());
  json hits = json::array();
  for (const auto& h : exemplar_search(idx, query, metric, k, options)) {
    hits.push_back({{"id", h.id}, {"score", round_score(h.score)}, {"rank", h.rank}});
  }
  return {{"hits", hits}};
}

json point_range(const UnifiedIndex& idx, const IndexedDataset& d, const json& body) {
  json pts = json::array();
  for (const auto& p : range_point_search(idx, d.id, range_of(body))) pts.push_back(coords_json(p.coords()));
  return {{"points", pts}};
}

json point_nn(const UnifiedIndex& idx, const IndexedDataset& d, const json& body) {
  const Dataset query = query_of(body, idx.dims());
  json pairs = json::array();
  for (const auto& p : nn_point_search(idx, query, d.id)) {
    pairs.push_back({{"query", coords_json(p.query.coords())},
                     {"nn", coords_json(p.nearest.coords())},
                     {"dist", round_score(p.distance)}});
  }
  return {{"pairs", pairs}};
}

}  // namespace

double round_score(double value) {
  if (!std::isfinite(value)) return value;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return std::strtod(buf, nullptr);
}

Service::Service(ServiceConfig config) : config_(config) {}

void Service::load(std::shared_ptr<const UnifiedIndex> index) {
  std::lock_guard lock(mutex_);
  index_ = std::move(index);
}

std::shared_ptr<const UnifiedIndex> Service::index() const {
  std::lock_guard lock(mutex_);
  return index_;
}

HttpResponse Service::handle(const std::string& method, const std::string& path,
                             const std::string& body) const {
  static const std::regex point_route(R"(^/datasets/([^/]+)/points/(range|nn)$)");
  try {
    if (body.size() > config_.max_payload_bytes) {
      throw HttpError(413, "payload exceeds " + std::to_string(config_.max_payload_bytes) + " bytes");
    }
    std::smatch m;
    const bool known = path == "/datasets" || path == "/search/datasets/range" ||
                       path == "/search/datasets/exemplar" || std::regex_match(path, m, point_route);
    if (!known) throw HttpError(404, "no route for " + path);
    const bool want_get = path == "/datasets";
    if (method != (want_get ? "GET" : "POST")) throw HttpError(405, "method not allowed");

    const auto idx = index();
    if (!idx) throw HttpError(503, "no index loaded");

    json out;
    if (path == "/datasets") {
      out = list_datasets(*idx);
    } else if (path == "/search/datasets/range") {
      out = dataset_range(*idx, parse_body(body));
    } else if (path == "/search/datasets/exemplar") {
      out = exemplar(*idx, parse_body(body));
    } else {
      const auto& d = dataset_of(*idx, m[1].str());
      const json j = parse_body(body);
      out = m[2] == "range" ? point_range(*idx, d, j) : point_nn(*idx, d, j);
    }
    return {200, out.dump()};
  } catch (const HttpError& e) {
    return error_response(e.status, e.what());
  } catch (const Error& e) {
    return error_response(400, e.what());
  } catch (const json::exception& e) {
    return error_response(400, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

// ---- HTTP server ------------------------------------------------------------

struct HttpServer::Impl {
  explicit Impl(Service& s) : service(s) {}
  Service& service;
  httplib::Server server;
};

HttpServer::HttpServer(Service& service, std::string static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  // Larger bodies still reach the handler so the 413 carries a JSON body.
  srv.set_payload_max_length(service.config().max_payload_bytes + 1);
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = impl_->service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  srv.Get("/datasets", route);
  srv.Post("/search/datasets/range", route);
  srv.Post("/search/datasets/exemplar", route);
  srv.Post(R"(/datasets/[^/]+/points/(range|nn))", route);
  if (!static_dir.empty() && !srv.set_mount_point("/", static_dir)) {
    throw Error("cannot serve static files from " + static_dir);
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  if (port == 0) {
    const int bound = srv.bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind " + host);
    return bound;
  }
  if (!srv.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace spadas

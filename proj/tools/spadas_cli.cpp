// spadas: build indexes, run searches, run benchmarks and serve the HTTP API.
//
// Every flag can also come from the environment: SPADAS_<FLAG> with dashes
// turned into underscores (SPADAS_INDEX, SPADAS_MANIFEST, SPADAS_ADDR,
// SPADAS_STATIC, SPADAS_MAX_PAYLOAD, SPADAS_SEED, ...).

#include <chrono>
#include <csignal>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "spadas/baselines.hpp"
#include "spadas/io.hpp"
#include "spadas/search.hpp"
#include "spadas/service.hpp"

using namespace spadas;
using nlohmann::json;

namespace {

std::string env_name(const std::string& flag) {
  std::string out = "SPADAS_";
  for (char c : flag) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

template <class T>
CLI::Option* flag(CLI::App* app, const std::string& name, T& value, const std::string& help) {
  return app->add_option("--" + name, value, help)->envname(env_name(name));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json points_json(const Dataset& d) {
  json pts = json::array();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto p = d.point(i);
    pts.push_back(std::vector<double>(p.begin(), p.end()));
  }
  return pts;
}

std::string join(const json& arr) {
  std::string out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (i) out += ' ';
    out += arr[i].dump();
  }
  return out;
}

// Aligned plain-text rendering of a service response.
void print_text(const std::string& kind, const json& body) {
  std::ostringstream out;
  if (kind == "range") {
    for (const auto& id : body["ids"]) out << id.get<DatasetId>() << '\n';
  } else if (kind == "exemplar") {
    out << std::setw(6) << "rank" << std::setw(12) << "id" << "  score\n";
    for (const auto& h : body["hits"]) {
      out << std::setw(6) << h["rank"].get<std::size_t>() << std::setw(12) << h["id"].get<DatasetId>()
          << "  " << h["score"].dump() << '\n';
    }
  } else if (kind == "points-range") {
    for (const auto& p : body["points"]) out << join(p) << '\n';
  } else {
    for (const auto& p : body["pairs"]) {
      out << std::left << std::setw(40) << join(p["query"]) << std::setw(40) << join(p["nn"])
          << std::right << p["dist"].dump() << '\n';
    }
  }
  std::cout << out.str();
}

// ---- bench --------------------------------------------------------------------

struct BenchOptions {
  std::string suite;
  int repeat = 3;
  std::uint64_t seed = 1;
  std::size_t datasets = 100;
  std::size_t points = 1000;
};

template <class F>
double mean_seconds(int repeat, F&& run) {
  run();  // warmup, discarded
  double total = 0.0;
  for (int r = 0; r < repeat; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    run();
    total += seconds_since(t0);
  }
  return total / repeat;
}

void row(const std::string& parameter, double value, const std::string& method, double seconds) {
  std::cout << parameter << ',' << value << ',' << method << ',' << std::setprecision(6) << seconds << '\n';
}

void run_bench(const BenchOptions& o) {
  SyntheticSpec spec;
  spec.datasets = o.datasets;
  spec.points = o.points;
  spec.seed = o.seed;
  std::cout << "parameter,value,method,mean_seconds\n";

  if (o.suite == "build-scaling") {
    for (std::size_t n : {1000, 2000, 4000, 8000}) {
      spec.points = n;
      const auto syn = generate_synthetic(spec);
      row("n", static_cast<double>(n), "Build",
          mean_seconds(o.repeat, [&] { UnifiedIndex::build(syn.repository); }));
    }
    return;
  }

  if (o.suite == "params") {
    // theta, leaf capacity and repository size, each swept with the others at
    // their defaults; k = 10.
    auto sweep = [&](const std::string& name, double value, const SyntheticSpec& s, IndexParams p) {
      const auto repo = generate_synthetic(s).repository;
      const auto idx = UnifiedIndex::build(repo, p);
      const auto retained = baseline::retained_datasets(idx);
      const Dataset& q = retained[s.seed % retained.size()];
      row(name, value, "ExactHaus", mean_seconds(o.repeat, [&] { exemplar_search(idx, q, MetricKind::HausExact, 10); }));
      row(name, value, "ApproHaus", mean_seconds(o.repeat, [&] { exemplar_search(idx, q, MetricKind::HausApprox, 10); }));
      row(name, value, "GBO", mean_seconds(o.repeat, [&] { exemplar_search(idx, q, MetricKind::GBO, 10); }));
    };
    for (int t : {3, 4, 5, 6, 7}) {
      SyntheticSpec s = spec;
      s.theta = t;
      IndexParams p;
      p.theta = t;
      sweep("theta", t, s, p);
    }
    for (std::size_t f : {10, 20, 30, 40, 50}) {
      IndexParams p;
      p.leaf_capacity = f;
      sweep("f", static_cast<double>(f), spec, p);
    }
    for (std::size_t m : {o.datasets / 4, o.datasets / 2, o.datasets, 2 * o.datasets}) {
      SyntheticSpec s = spec;
      s.datasets = std::max<std::size_t>(m, 1);
      sweep("m", static_cast<double>(s.datasets), s, {});
    }
    return;
  }

  const auto syn = generate_synthetic(spec);
  const auto idx = UnifiedIndex::build(syn.repository);
  const auto retained = baseline::retained_datasets(idx);
  std::mt19937_64 rng(o.seed);
  const Dataset& query = retained[rng() % retained.size()];

  if (o.suite == "topk-haus") {
    for (std::size_t k : {1, 10, 20, 50}) {
      const auto kd = static_cast<double>(k);
      row("k", kd, "ExactHaus", mean_seconds(o.repeat, [&] { exemplar_search(idx, query, MetricKind::HausExact, k); }));
      row("k", kd, "ApproHaus", mean_seconds(o.repeat, [&] { exemplar_search(idx, query, MetricKind::HausApprox, k); }));
      row("k", kd, "ScanHaus", mean_seconds(o.repeat, [&] { baseline::scan_haus_topk(retained, query, k); }));
    }
  } else if (o.suite == "topk-overlap") {
    for (std::size_t k : {1, 10, 20, 50}) {
      const auto kd = static_cast<double>(k);
      row("k", kd, "IA", mean_seconds(o.repeat, [&] { exemplar_search(idx, query, MetricKind::IA, k); }));
      row("k", kd, "ScanIA", mean_seconds(o.repeat, [&] { baseline::scan_ia_topk(retained, query, k); }));
      row("k", kd, "GBO", mean_seconds(o.repeat, [&] { exemplar_search(idx, query, MetricKind::GBO, k); }));
      row("k", kd, "ScanGBO", mean_seconds(o.repeat, [&] { baseline::scan_gbo_topk(retained, idx.grid(), query, k); }));
    }
  } else if (o.suite == "nnp") {
    const Dataset& target_points = retained[rng() % retained.size()];
    const DatasetId target = target_points.id();
    for (std::size_t s : {100, 1000, 10000}) {
      SyntheticSpec qs = spec;
      qs.datasets = 1;
      qs.points = s;
      qs.seed = o.seed + 1;
      const auto q = generate_synthetic(qs).repository.datasets().front();
      const auto sd = static_cast<double>(s);
      row("s", sd, "NNP", mean_seconds(o.repeat, [&] { nn_point_search(idx, q, target); }));
      row("s", sd, "BruteNN", mean_seconds(o.repeat, [&] { baseline::brute_nn(q, target_points); }));
    }
  } else {
    throw Error("unknown bench suite " + o.suite);
  }
}

HttpServer* active_server = nullptr;

void on_signal(int) {
  if (active_server) active_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial dataset search engine"};
  app.require_subcommand(1);

  // build
  auto* build = app.add_subcommand("build", "Build and persist an index from a manifest");
  std::string manifest_path, out_path;
  std::optional<int> theta;
  std::optional<std::size_t> leaf_capacity;
  bool no_removal = false;
  flag(build, "manifest", manifest_path, "Repository manifest (JSON)")->required();
  flag(build, "out", out_path, "Index file to write")->required();
  flag(build, "theta", theta, "Grid resolution (1-16); default from manifest")->check(CLI::Range(1, 16));
  flag(build, "leaf-capacity", leaf_capacity, "Leaf capacity f; default from manifest")->check(CLI::PositiveNumber);
  build->add_flag("--no-outlier-removal", no_removal, "Keep every point")->envname("SPADAS_NO_OUTLIER_REMOVAL");

  // search
  auto* search = app.add_subcommand("search", "Run one search against an index");
  search->require_subcommand(1);
  std::string index_path, format = "json", metric = "haus_exact", query_path;
  std::vector<double> lo, hi;
  std::size_t k = 10;
  std::optional<double> epsilon;
  DatasetId dataset_id = 0;
  auto add_common = [&](CLI::App* sub) {
    flag(sub, "index", index_path, "Index file")->required();
    flag(sub, "format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
  };
  auto add_range = [&](CLI::App* sub) {
    sub->add_option("--lo", lo, "Lower corner x y")->required()->expected(2)->delimiter(',');
    sub->add_option("--hi", hi, "Upper corner x y")->required()->expected(2)->delimiter(',');
  };
  auto add_query = [&](CLI::App* sub) {
    flag(sub, "query", query_path, "Query point file (CSV or TSV)")->required()->check(CLI::ExistingFile);
  };
  auto* s_range = search->add_subcommand("range", "Datasets whose box meets a rectangle");
  add_common(s_range);
  add_range(s_range);
  auto* s_exemplar = search->add_subcommand("exemplar", "Top-k datasets most similar to a query set");
  add_common(s_exemplar);
  add_query(s_exemplar);
  flag(s_exemplar, "metric", metric, "ia, gbo, haus_exact or haus_approx")
      ->check(CLI::IsMember({"ia", "gbo", "haus_exact", "haus_approx", "haus"}));
  s_exemplar->add_option("-k,--k", k, "Number of results")->envname("SPADAS_K")->check(CLI::PositiveNumber);
  flag(s_exemplar, "epsilon", epsilon, "Approximation threshold for haus_approx")->check(CLI::PositiveNumber);
  auto* s_prange = search->add_subcommand("points-range", "Points of one dataset inside a rectangle");
  add_common(s_prange);
  flag(s_prange, "dataset", dataset_id, "Dataset id")->required();
  add_range(s_prange);
  auto* s_pnn = search->add_subcommand("points-nn", "Nearest point of one dataset for each query point");
  add_common(s_pnn);
  flag(s_pnn, "dataset", dataset_id, "Dataset id")->required();
  add_query(s_pnn);

  // bench
  auto* bench = app.add_subcommand("bench", "Timing sweeps over synthetic repositories (CSV)");
  BenchOptions bo;
  flag(bench, "suite", bo.suite, "topk-haus, topk-overlap, nnp, params or build-scaling")
      ->required()
      ->check(CLI::IsMember({"topk-haus", "topk-overlap", "nnp", "params", "build-scaling"}));
  flag(bench, "repeat", bo.repeat, "Timed repetitions per row")->check(CLI::PositiveNumber);
  flag(bench, "seed", bo.seed, "Random seed");
  flag(bench, "datasets", bo.datasets, "Datasets per repository")->check(CLI::PositiveNumber);
  flag(bench, "points", bo.points, "Points per dataset")->check(CLI::PositiveNumber);

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the HTTP JSON API");
  std::string addr = "127.0.0.1:8080", static_dir;
  std::size_t max_payload = ServiceConfig{}.max_payload_bytes;
  flag(serve, "index", index_path, "Index file")->required();
  flag(serve, "addr", addr, "HOST:PORT to listen on");
  flag(serve, "static", static_dir, "Directory of web UI assets")->check(CLI::ExistingDirectory);
  flag(serve, "max-payload", max_payload, "Request body cap in bytes");

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) {
      const Manifest m = load_manifest(manifest_path);
      const auto loaded = load_repository(Manifest{m.name, theta.value_or(m.theta), m.metric_dims,
                                                   leaf_capacity.value_or(m.leaf_capacity), m.datasets});
      if (loaded.rejected_rows) std::cerr << "skipped " << loaded.rejected_rows << " malformed rows\n";
      IndexParams params;
      params.theta = theta.value_or(m.theta);
      params.leaf_capacity = leaf_capacity.value_or(m.leaf_capacity);
      params.metric_dims = m.metric_dims;
      params.outlier_removal = !no_removal;
      const auto t0 = std::chrono::steady_clock::now();
      const auto idx = UnifiedIndex::build(loaded.repository, params);
      const double elapsed = seconds_since(t0);
      save_index(out_path, idx);
      std::cout << "datasets: " << idx.datasets().size() << '\n'
                << "build_seconds: " << elapsed << '\n'
                << "r_prime: " << idx.r_prime() << '\n'
                << "removed_points: " << idx.removed_points() << '\n';
      return 0;
    }

    if (search->parsed()) {
      const auto idx = std::make_shared<const UnifiedIndex>(load_index(index_path));
      Service service;
      service.load(idx);
      std::string kind, path;
      json body;
      if (s_range->parsed() || s_prange->parsed()) {
        body = {{"lo", lo}, {"hi", hi}};
      } else {
        const auto q = load_dataset(query_path, idx->dims());
        body["points"] = points_json(q.dataset);
      }
      if (s_range->parsed()) {
        kind = "range";
        path = "/search/datasets/range";
      } else if (s_exemplar->parsed()) {
        kind = "exemplar";
        path = "/search/datasets/exemplar";
        body["metric"] = metric;
        body["k"] = k;
        if (epsilon) body["epsilon"] = *epsilon;
      } else if (s_prange->parsed()) {
        kind = "points-range";
        path = "/datasets/" + std::to_string(dataset_id) + "/points/range";
      } else {
        kind = "points-nn";
        path = "/datasets/" + std::to_string(dataset_id) + "/points/nn";
      }
      const auto r = service.handle("POST", path, body.dump());
      if (r.status != 200) {
        std::cerr << "error: " << json::parse(r.body).value("error", r.body) << '\n';
        return 1;
      }
      if (format == "json") {
        std::cout << r.body << '\n';
      } else {
        print_text(kind, json::parse(r.body));
      }
      return 0;
    }

    if (bench->parsed()) {
      run_bench(bo);
      return 0;
    }

    if (serve->parsed()) {
      const auto colon = addr.rfind(':');
      if (colon == std::string::npos) throw Error("--addr must be HOST:PORT");
      const std::string host = addr.substr(0, colon);
      const int port = std::stoi(addr.substr(colon + 1));
      Service service(ServiceConfig{max_payload});
      service.load(std::make_shared<const UnifiedIndex>(load_index(index_path)));
      HttpServer server(service, static_dir);
      const int bound = server.bind(host, port);
      active_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on " << host << ':' << bound << std::endl;
      server.listen();
      active_server = nullptr;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

// Copyright 2026 The NSX Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: index, search, rerank, eval, loadtest,
// simulate-pool and serve.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"
#include "nsx/nsx.hpp"
#include "nsx/server.hpp"

namespace {

using nsx::parse_duration;

std::string format_score(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_json(const nlohmann::json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw nsx::Error("cannot write " + path);
  out << j.dump(2) << "\n";
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw nsx::Error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) lines.push_back(line);
  }
  return lines;
}

void print_ranked(const nsx::RankedList& list, std::size_t k) {
  for (std::size_t i = 0; i < list.entries.size() && i < k; ++i) {
    const auto& e = list.entries[i];
    std::cout << e.rank << '\t' << e.document.doc_id << '\t' << format_score(e.score)
              << '\n';
  }
}

// --- index -----------------------------------------------------------------

struct IndexArgs {
  std::string corpus;
  std::string out;
  std::size_t window = 150;
  std::size_t stride = 75;
};

int run_index(const IndexArgs& a) {
  nsx::WindowConfig wc{a.window, a.stride};
  auto index = nsx::Index::build(nsx::read_corpus_file(a.corpus), wc);
  index.save(a.out);
  std::cout << "indexed " << index.document_count() << " documents as "
            << index.passage_count() << " passages into " << a.out << "\n";
  return 0;
}

// --- search ----------------------------------------------------------------

struct SearchArgs {
  std::string index;
  std::string query;
  std::size_t k = 10;
  std::string scorer = "lexical";
  std::size_t shards = 1;
  std::size_t candidates = 1000;
  bool no_rerank = false;
  std::string format = "text";
};

int run_search(const SearchArgs& a) {
  nsx::ServiceConfig cfg;
  cfg.scorer = a.scorer;
  cfg.shards = a.shards;
  cfg.results = a.k;
  cfg.local_candidates = a.candidates;
  cfg.default_engine = a.no_rerank ? "bm25" : "nsx";
  cfg.engines[cfg.default_engine] = nsx::EngineSpec{
      a.no_rerank ? nsx::EnginePipeline::kSourceOrder : nsx::EnginePipeline::kRerank, {}};

  auto index = std::make_shared<const nsx::Index>(nsx::Index::load(a.index));
  cfg.windows = index->windows();
  std::vector<nsx::Gateway::NamedSource> sources;
  sources.push_back({"local_index",
                     std::make_shared<nsx::LocalIndexSource>(index, cfg.bm25), true});
  nsx::Gateway gw(cfg, std::move(sources), nullptr);
  const auto resp = gw.handle_search(a.query);

  if (a.format == "json") {
    auto j = resp.to_json();
    j.erase("timings_ms");
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  for (const auto& w : resp.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& r : resp.results) {
    std::cout << r.rank << '\t' << r.doc_id << '\t' << format_score(r.score) << '\n';
    if (r.highlighted) std::cout << "\t" << r.display_text << '\n';
  }
  return 0;
}

// --- rerank ----------------------------------------------------------------

struct RerankArgs {
  std::string scorer = "lexical";
  std::size_t shards = 1;
  std::string query;
  std::string candidates;
  std::size_t k = 1000;
  std::size_t window = 150;
  std::size_t stride = 75;
  long timeout_ms = 30000;
};

int run_rerank(const RerankArgs& a) {
  nsx::ServiceConfig cfg;
  cfg.scorer = a.scorer;
  cfg.shards = a.shards;
  cfg.scorer_timeout = std::chrono::milliseconds(a.timeout_ms);
  const auto scorer = nsx::Gateway::build_scorer(cfg);

  nsx::CandidatePool pool;
  pool.query_id = nsx::query_id_for(a.query);
  std::vector<nsx::SourceDocument> docs;
  for (auto& d : nsx::read_corpus_file(a.candidates)) {
    nsx::SourceDocument sd;
    sd.doc_id = std::move(d.doc_id);
    sd.source = nsx::SourceId::local();
    if (!d.title.empty()) sd.title = std::move(d.title);
    sd.text = std::move(d.text);
    docs.push_back(std::move(sd));
  }
  std::unordered_set<std::string> seen_urls, seen_ids;
  nsx::add_deduplicated(pool, std::move(docs), seen_urls, seen_ids);
  if (pool.documents.empty()) return 0;

  nsx::MergeConfig mc;
  mc.windows = nsx::WindowConfig{a.window, a.stride};
  print_ranked(nsx::merge_and_rank(pool, a.query, *scorer, mc), a.k);
  return 0;
}

// --- simulate-pool ---------------------------------------------------------

struct SimulateArgs {
  std::size_t fleet = 10;
  std::size_t reliable = 0;
  double eviction_rate = 0;
  std::string startup_min = "5m";
  std::string startup_max = "20m";
  std::string horizon = "90d";
  std::uint64_t seed = 0;
  std::string report;
  std::vector<double> thresholds{0.8};
};

int run_simulate(const SimulateArgs& a) {
  nsx::FleetSimConfig cfg;
  cfg.fleet_size = a.fleet;
  cfg.reliable_workers = a.reliable;
  cfg.eviction_rate_per_hour = a.eviction_rate;
  cfg.startup_min = parse_duration(a.startup_min);
  cfg.startup_max = parse_duration(a.startup_max);
  cfg.horizon = parse_duration(a.horizon);
  cfg.seed = a.seed;
  const auto report = nsx::simulate_fleet(cfg);
  const auto j = report.to_json(a.thresholds);
  if (!a.report.empty()) write_json(j, a.report);
  std::printf("evictions %zu, mean availability %.6f, min capacity %.2f\n",
              report.eviction_count, report.mean_availability(), report.min_capacity());
  for (double t : a.thresholds)
    std::printf("below %.2f: %.6f of time, %zu episodes\n", t,
                report.fraction_of_time_below(t), report.episodes_below(t));
  return 0;
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string run;
  std::string qrels;
  std::string metrics = "mrr@10,ndcg@20,map,p@10,r@10";
  std::string gain = "linear";
  int threshold = 1;
  int max_grade = 2;
  std::string report;
};

int run_eval(const EvalArgs& a) {
  nsx::eval::EvalOptions opts;
  opts.relevance_threshold = a.threshold;
  opts.gain = a.gain == "exp" ? nsx::eval::Gain::kExponential : nsx::eval::Gain::kLinear;
  const auto run = nsx::eval::parse_run_file(a.run);
  const auto qrels = nsx::eval::parse_qrels_file(a.qrels, a.max_grade);
  const auto report =
      nsx::eval::evaluate(run, qrels, nsx::eval::Metric::parse_list(a.metrics), opts);
  if (!a.report.empty()) write_json(report.to_json(), a.report);
  std::cout << report.to_table();
  return 0;
}

// --- loadtest --------------------------------------------------------------

struct LoadTestArgs {
  std::string target;
  std::size_t users = 1;
  std::string duration = "900s";
  std::string queries;
  std::uint64_t seed = 0;
  std::string think_min = "1s";
  std::string think_max = "15s";
  std::string label = "target";
  std::string report;
};

int run_load(const LoadTestArgs& a) {
  nsx::LoadTestConfig cfg;
  cfg.target = a.target;
  cfg.users = a.users;
  cfg.duration = parse_duration(a.duration);
  cfg.queries = read_lines(a.queries);
  cfg.seed = a.seed;
  cfg.think_min = parse_duration(a.think_min);
  cfg.think_max = parse_duration(a.think_max);
  const auto report = nsx::run_loadtest(cfg);
  if (!a.report.empty()) write_json(report.to_json(), a.report);
  std::cout << report.table_row(a.label) << "\n"
            << "requests " << report.request_count << ", errors " << report.error_count
            << "\n";
  return 0;
}

// --- serve -----------------------------------------------------------------

struct ServeArgs {
  std::string config;
  int port = 8080;
  std::string host = "0.0.0.0";
};

int run_serve(const ServeArgs& a) {
  nsx::Gateway gw(nsx::ServiceConfig::load(a.config));
  httplib::Server server;
  nsx::mount_routes(server, gw);
  std::cerr << "listening on " << a.host << ":" << a.port << "\n";
  if (!server.listen(a.host, a.port)) {
    std::cerr << "error: cannot listen on " << a.host << ":" << a.port << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nsx: multistage metasearch toolkit"};
  app.require_subcommand(1);

  IndexArgs ia;
  auto* index = app.add_subcommand("index", "Build a passage index from a TSV corpus");
  index->add_option("--corpus", ia.corpus, "doc_id<TAB>title<TAB>text file")->required();
  index->add_option("--out", ia.out, "Output directory")->required();
  index->add_option("--window", ia.window, "Window size in words")->capture_default_str();
  index->add_option("--stride", ia.stride, "Stride in words")->capture_default_str();

  SearchArgs sa;
  auto* search = app.add_subcommand("search", "Search an index through the full pipeline");
  search->add_option("--index", sa.index, "Index directory")->required();
  search->add_option("--query", sa.query, "Query text")->required();
  search->add_option("-k", sa.k, "Results to print")->capture_default_str();
  search->add_option("--scorer", sa.scorer, "lexical or remote:URL")->capture_default_str();
  search->add_option("--shards", sa.shards, "Scoring shards")->capture_default_str();
  search->add_option("--candidates", sa.candidates, "First-stage depth")
      ->capture_default_str();
  search->add_flag("--no-rerank", sa.no_rerank, "Print first-stage BM25 order");
  search->add_option("--format", sa.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();

  RerankArgs ra;
  auto* rerank = app.add_subcommand("rerank", "Rerank a candidate file with a scorer");
  rerank->add_option("--scorer", ra.scorer, "lexical or remote:URL")->capture_default_str();
  rerank->add_option("--shards", ra.shards, "Scoring shards")->capture_default_str();
  rerank->add_option("--query", ra.query, "Query text")->required();
  rerank->add_option("--candidates", ra.candidates, "doc_id<TAB>title<TAB>text file")
      ->required();
  rerank->add_option("-k", ra.k, "Results to print")->capture_default_str();
  rerank->add_option("--window", ra.window, "Window size in words")->capture_default_str();
  rerank->add_option("--stride", ra.stride, "Stride in words")->capture_default_str();
  rerank->add_option("--timeout-ms", ra.timeout_ms, "Remote scorer timeout")
      ->capture_default_str();

  SimulateArgs sm;
  auto* sim = app.add_subcommand("simulate-pool", "Simulate a preemptible worker fleet");
  sim->add_option("--fleet", sm.fleet, "Fleet size")->capture_default_str();
  sim->add_option("--reliable", sm.reliable, "Workers that are never evicted")
      ->capture_default_str();
  sim->add_option("--eviction-rate", sm.eviction_rate, "Evictions per worker-hour")
      ->capture_default_str();
  sim->add_option("--startup-min", sm.startup_min, "Minimum startup delay")
      ->capture_default_str();
  sim->add_option("--startup-max", sm.startup_max, "Maximum startup delay")
      ->capture_default_str();
  sim->add_option("--horizon", sm.horizon, "Simulated duration")->capture_default_str();
  sim->add_option("--seed", sm.seed, "RNG seed")->capture_default_str();
  sim->add_option("--report", sm.report, "Write the JSON report here ('-' for stdout)");
  sim->add_option("--threshold", sm.thresholds, "Capacity thresholds to summarize");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate a run file against qrels");
  eval->add_option("--run", ea.run, "TREC run file")->required();
  eval->add_option("--qrels", ea.qrels, "TREC qrels file")->required();
  eval->add_option("--metrics", ea.metrics, "Comma-separated metric list")
      ->capture_default_str();
  eval->add_option("--gain", ea.gain, "nDCG gain")
      ->check(CLI::IsMember({"linear", "exp"}))
      ->capture_default_str();
  eval->add_option("--threshold", ea.threshold, "Minimum relevant grade")
      ->capture_default_str();
  eval->add_option("--max-grade", ea.max_grade, "Highest allowed grade")
      ->capture_default_str();
  eval->add_option("--report", ea.report, "Write the JSON report here ('-' for stdout)");

  LoadTestArgs la;
  auto* load = app.add_subcommand("loadtest", "Closed-loop load test of a search endpoint");
  load->add_option("--target", la.target, "Search endpoint URL")->required();
  load->add_option("--users", la.users, "Simulated users")->capture_default_str();
  load->add_option("--duration", la.duration, "Test duration")->capture_default_str();
  load->add_option("--queries", la.queries, "Query file, one per line")->required();
  load->add_option("--seed", la.seed, "RNG seed")->capture_default_str();
  load->add_option("--think-min", la.think_min, "Minimum think time")->capture_default_str();
  load->add_option("--think-max", la.think_max, "Maximum think time")->capture_default_str();
  load->add_option("--label", la.label, "Row label")->capture_default_str();
  load->add_option("--report", la.report, "Write the JSON report here ('-' for stdout)");

  ServeArgs va;
  auto* serve = app.add_subcommand("serve", "Run the search and annotation service");
  serve->add_option("--config", va.config, "Service config JSON")->required();
  serve->add_option("--port", va.port, "Listen port")->capture_default_str();
  serve->add_option("--host", va.host, "Listen address")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*index) return run_index(ia);
    if (*search) return run_search(sa);
    if (*rerank) return run_rerank(ra);
    if (*sim) return run_simulate(sm);
    if (*eval) return run_eval(ea);
    if (*load) return run_load(la);
    if (*serve) return run_serve(va);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

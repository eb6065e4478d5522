// Copyright 2026 The soplab Authors
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

#include "soplab/cli.hpp"

#include <signal.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "soplab/dataset.hpp"
#include "soplab/digest.hpp"
#include "soplab/error.hpp"
#include "soplab/eval.hpp"
#include "soplab/record.hpp"
#include "soplab/registry.hpp"
#include "soplab/service.hpp"
#include "soplab/verifier.hpp"

namespace soplab {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr const char* kToolVersion = "0.1.0";

std::uint64_t resolve_seed(std::uint64_t flag) {
  const char* env = std::getenv("SOPLAB_SEED");
  if (env == nullptr || *env == '\0') return flag;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used, 10);
    if (used != std::strlen(env)) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParameterError(std::string("SOPLAB_SEED is not an unsigned integer: ") + env);
  }
}

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

void write_manifest(const std::string& command, const std::string& out, ordered_json config,
                    std::optional<std::uint64_t> seed, ordered_json extra = ordered_json::object(),
                    std::vector<std::string> outputs = {}) {
  ordered_json m;
  m["tool"] = "soplab";
  m["version"] = kToolVersion;
  m["command"] = command;
  m["config"] = std::move(config);
  m["seed"] = seed ? ordered_json(*seed) : ordered_json(nullptr);
  if (outputs.empty()) outputs.push_back(out);
  m["outputs"] = outputs;
  for (auto& [k, v] : extra.items()) m[k] = v;
  write_text_file(manifest_path(out), m.dump(2) + "\n");
}

nlohmann::json read_json_file(const std::string& path) {
  try {
    return nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    lines.push_back(std::move(l));
  }
  return lines;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParameterError("not an integer list: " + text);
    }
  }
  if (out.empty()) throw ParameterError("empty integer list");
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> f;
  std::size_t begin = 0;
  for (std::size_t tab; (tab = line.find('\t', begin)) != std::string::npos; begin = tab + 1) {
    f.push_back(line.substr(begin, tab - begin));
  }
  f.push_back(line.substr(begin));
  return f;
}

// Query TSV: map_id, start token, end token.
PathQuery parse_query(const MapRegistry& registry, const std::string& line, std::size_t line_no) {
  const auto f = split_tabs(line);
  if (f.size() < 3) throw FormatError("query line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
  const GridMap& map = registry.at(f[0]);
  const auto a = map.node_from_token(f[1]);
  const auto b = map.node_from_token(f[2]);
  if (!a || !b) throw FormatError("query line " + std::to_string(line_no) + ": unknown node token");
  return {map.map_id(), *a, *b};
}

std::vector<Record> decode_dataset(const std::vector<std::string>& lines, const GridMap& map) {
  std::vector<Record> out;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    auto r = decode_record(lines[k], map);
    if (const auto* fail = std::get_if<DecodeFailure>(&r)) {
      throw FormatError("dataset line " + std::to_string(k + 1) + ": " + fail->reason);
    }
    out.push_back(std::get<Record>(std::move(r)));
  }
  return out;
}

// ---------------------------------------------------------------------------

struct GenMap {
  int width = 0, height = 0;
  double sparsity = 0.5;
  std::uint64_t seed = 0;
  std::uint32_t index = 0;
  std::string out, registry;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("gen-map", "Generate a grid map from a random spanning tree");
    c->add_option("--width", width, "Columns")->required()->check(CLI::Range(2, 100000));
    c->add_option("--height", height, "Rows")->required()->check(CLI::Range(2, 100000));
    c->add_option("--sparsity", sparsity, "Probability of dropping each non-tree edge")->check(CLI::Range(0.0, 1.0));
    c->add_option("--seed", seed, "Master seed");
    c->add_option("--index", index, "Map index; the map id is m<index>");
    c->add_option("--out", out, "Map JSON path")->required();
    c->add_option("--registry", registry, "Registry JSON to create or append to");
  }

  int run(std::ostream& o) {
    const std::uint64_t s = resolve_seed(seed);
    GridMap map = generate_map(width, height, sparsity, s, index);
    std::vector<std::string> outputs{out};
    if (!registry.empty()) {
      MapRegistry reg;
      std::vector<std::string> paths;
      if (fs::exists(registry)) {
        reg = read_registry_file(registry);
        paths = registry_map_paths(registry);
      }
      const fs::path base = fs::absolute(registry).parent_path();
      reg.add(map);  // validates id and index before anything is written
      write_map_file(map, out);
      paths.push_back(fs::proximate(fs::absolute(out), base).generic_string());
      write_registry_file(reg, paths, registry);
      outputs.push_back(registry);
    } else {
      write_map_file(map, out);
    }
    write_manifest("gen-map", out,
                   {{"width", width}, {"height", height}, {"sparsity", sparsity}, {"index", index},
                    {"out", out}, {"registry", registry}},
                   s, {{"map_id", map.map_id()}, {"nodes", map.node_count()}, {"edges", map.edge_count()}},
                   outputs);
    o << ordered_json{{"map_id", map.map_id()}, {"nodes", map.node_count()}, {"edges", map.edge_count()}}.dump()
      << '\n';
    return 0;
  }
};

struct Split {
  std::string map, out;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("split", "Partition a map's nodes into train and holdout");
    c->add_option("--map", map, "Map JSON")->required();
    c->add_option("--train-fraction", train_fraction, "Fraction of nodes for training");
    c->add_option("--seed", seed, "Seed");
    c->add_option("--out", out, "Split JSON path")->required();
  }

  int run(std::ostream& o) {
    const std::uint64_t s = resolve_seed(seed);
    const GridMap m = read_map_file(map);
    const NodeSplit split = split_nodes(m, train_fraction, s);
    write_text_file(out, split_to_json(split).dump() + "\n");
    write_manifest("split", out, {{"map", map}, {"train_fraction", train_fraction}, {"out", out}}, s,
                   {{"train", split.train.size()}, {"holdout", split.holdout.size()}});
    o << ordered_json{{"train", split.train.size()}, {"holdout", split.holdout.size()}}.dump() << '\n';
    return 0;
  }
};

NodeSplit load_or_make_split(const std::string& path, const GridMap& map, double fraction,
                             std::uint64_t seed) {
  if (!path.empty()) return split_from_json(read_json_file(path), map);
  return split_nodes(map, fraction, seed);
}

struct GenPretrain {
  std::string registry, out, encoding = "interleaved";
  std::size_t walks = 0;
  int min_len = 64, max_len = 96;
  std::optional<int> planned_lmax;
  std::uint64_t seed = 0;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("gen-pretrain", "Write a random-walk pretraining corpus");
    c->add_option("--map-registry", registry, "Registry JSON")->required();
    c->add_option("--walks", walks, "Number of walks")->required();
    c->add_option("--min-len", min_len, "Minimum walk length in moves");
    c->add_option("--max-len", max_len, "Maximum walk length in moves");
    c->add_option("--planned-lmax", planned_lmax, "Longest planned SFT path; warns if walks are not longer");
    c->add_option("--encoding", encoding, "interleaved or nodes-only")
        ->check(CLI::IsMember({"interleaved", "nodes-only"}));
    c->add_option("--seed", seed, "Seed");
    c->add_option("--out", out, "Corpus path")->required();
  }

  int run(std::ostream& o, std::ostream& e) {
    const std::uint64_t s = resolve_seed(seed);
    const MapRegistry reg = read_registry_file(registry);
    PretrainSpec spec;
    spec.walks = walks;
    spec.min_length = min_len;
    spec.max_length = max_len;
    spec.seed = s;
    spec.encoding = encoding == "nodes-only" ? WalkEncoding::kNodesOnly : WalkEncoding::kInterleaved;
    spec.planned_sft_max_length = planned_lmax;
    std::ofstream file(out, std::ios::binary);
    if (!file) throw Error("io", "cannot write " + out);
    const PretrainSummary sum = write_pretrain_corpus(reg, spec, file);
    file.close();
    for (const auto& w : sum.warnings) e << ordered_json{{"warning", w}}.dump() << '\n';
    ordered_json stats{{"walks", sum.walks}, {"tokens", sum.tokens}, {"sha256", sum.digest},
                       {"warnings", sum.warnings}};
    write_manifest("gen-pretrain", out,
                   {{"map_registry", registry}, {"walks", walks}, {"min_len", min_len},
                    {"max_len", max_len},
                    {"planned_lmax", planned_lmax ? ordered_json(*planned_lmax) : ordered_json(nullptr)},
                    {"encoding", encoding}, {"out", out}},
                   s, stats);
    o << stats.dump() << '\n';
    return 0;
  }
};

struct GenSft {
  std::string map, split, out, allocation = "questions-first";
  double budget = 1.0, coverage = 0.8, train_fraction = 0.8;
  std::optional<std::size_t> records;
  int diversity = 1, answers = 1, lmin = 1, lmax = 20;
  std::uint64_t seed = 0;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("gen-sft", "Build a supervised fine-tuning dataset");
    c->add_option("--map", map, "Map JSON")->required();
    c->add_option("--split", split, "Split JSON; generated from --train-fraction when absent");
    c->add_option("--train-fraction", train_fraction, "Used only without --split");
    auto* b = c->add_option("--budget", budget, "Fraction of the candidate pool");
    c->add_option("--records", records, "Absolute record count (instead of --budget)")->excludes(b);
    c->add_option("--coverage", coverage, "Fraction of nodes appearing in questions");
    c->add_option("--diversity", diversity, "Endpoints per start node");
    c->add_option("--answers", answers, "Solutions per question (fixed-answers)");
    c->add_option("--lmin", lmin, "Minimum path length");
    c->add_option("--lmax", lmax, "Maximum path length");
    c->add_option("--allocation", allocation, "questions-first or fixed-answers")
        ->check(CLI::IsMember({"questions-first", "fixed-answers"}));
    c->add_option("--seed", seed, "Seed");
    c->add_option("--out", out, "Dataset path")->required();
  }

  int run(std::ostream& o) {
    const std::uint64_t s = resolve_seed(seed);
    const GridMap m = read_map_file(map);
    const NodeSplit sp = load_or_make_split(split, m, train_fraction, s);
    DatasetSpec spec;
    spec.map_id = m.map_id();
    spec.budget = budget;
    spec.records = records;
    spec.coverage = coverage;
    spec.diversity = diversity;
    spec.answers = answers;
    spec.min_length = lmin;
    spec.max_length = lmax;
    spec.allocation = *allocation_from_string(allocation);
    spec.seed = s;
    Dataset ds = build_sft_dataset(m, sp, spec);
    ds.manifest.files = {out};
    write_text_file(out, ds.content());
    write_manifest("gen-sft", out,
                   {{"map", map}, {"split", split}, {"train_fraction", sp.train_fraction}, {"out", out}},
                   s, {{"dataset", manifest_to_json(ds.manifest)}});
    o << manifest_to_json(ds.manifest).dump() << '\n';
    return 0;
  }
};

struct AugmentLength {
  std::string map, split, in, out, targets;
  double fraction = 0.01, train_fraction = 0.8;
  std::uint64_t seed = 0;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("augment-length", "Add exact-length paths to a dataset");
    c->add_option("--map", map, "Map JSON")->required();
    c->add_option("--split", split, "Split JSON; generated from --train-fraction when absent");
    c->add_option("--train-fraction", train_fraction, "Used only without --split");
    c->add_option("--in", in, "Existing dataset")->required();
    c->add_option("--targets", targets, "Comma-separated target lengths")->required();
    c->add_option("--fraction", fraction, "Added records per target, as a fraction of the dataset");
    c->add_option("--seed", seed, "Seed");
    c->add_option("--out", out, "Augmented dataset path")->required();
  }

  int run(std::ostream& o) {
    const std::uint64_t s = resolve_seed(seed);
    const GridMap m = read_map_file(map);
    const NodeSplit sp = load_or_make_split(split, m, train_fraction, s);
    const auto base = decode_dataset(read_lines(in), m);
    const auto lengths = parse_int_list(targets);
    const auto records = augment_with_length(base, m, sp, lengths, fraction, s);
    std::string content;
    for (const auto& r : records) content += encode_record(m, r) + '\n';
    write_text_file(out, content);
    ordered_json stats{{"records", records.size()}, {"added", records.size() - base.size()},
                       {"sha256", sha256_hex(content)}};
    write_manifest("augment-length", out,
                   {{"map", map}, {"split", split}, {"in", in}, {"targets", lengths},
                    {"fraction", fraction}, {"out", out}},
                   s, stats);
    o << stats.dump() << '\n';
    return 0;
  }
};

struct BuildEval {
  std::string map, split, groups, exclude, out;
  std::size_t per_group = 3000;
  std::uint64_t seed = 0;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("build-eval", "Sample evaluation queries per length group");
    c->add_option("--map", map, "Map JSON")->required();
    c->add_option("--split", split, "Split JSON; endpoints then come from its holdout nodes");
    c->add_option("--groups", groups, "Length groups, e.g. 20-30,30-40")->required();
    c->add_option("--per-group", per_group, "Queries per group");
    c->add_option("--exclude", exclude, "Dataset whose (start, end) pairs are excluded");
    c->add_option("--seed", seed, "Seed");
    c->add_option("--out", out, "Query TSV path")->required();
  }

  int run(std::ostream& o) {
    const std::uint64_t s = resolve_seed(seed);
    const GridMap m = read_map_file(map);
    std::optional<NodeSplit> sp;
    if (!split.empty()) sp = split_from_json(read_json_file(split), m);
    std::optional<PairSupport> support;
    if (!exclude.empty()) support = PairSupport::from_records(decode_dataset(read_lines(exclude), m));
    const auto sets = build_eval_sets(m, sp ? &*sp : nullptr, {parse_length_groups(groups), per_group, s},
                                      support ? &*support : nullptr);
    std::string content;
    ordered_json per = ordered_json::array();
    for (const auto& set : sets) {
      for (const auto& q : set.queries) content += query_to_tsv(m, q) + '\n';
      per.push_back({{"group", set.group.label()}, {"queries", set.queries.size()},
                     {"available", set.available}, {"shortfall", set.shortfall}});
    }
    write_text_file(out, content);
    write_manifest("build-eval", out,
                   {{"map", map}, {"split", split}, {"groups", groups}, {"per_group", per_group},
                    {"exclude", exclude}, {"out", out}},
                   s, {{"groups", per}, {"sha256", sha256_hex(content)}});
    o << per.dump() << '\n';
    return 0;
  }
};

struct Verify {
  std::string registry, in, out, method;
  bool no_cache = false;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("verify", "Classify completions against the shortest-path oracle");
    c->add_option("--map-registry", registry, "Registry JSON")->required();
    c->add_option("--in", in, "TSV: map_id, start, end, completion")->required();
    c->add_option("--method", method, "Label copied into every result");
    c->add_flag("--no-cache", no_cache, "Disable the distance cache");
    c->add_option("--out", out, "Results NDJSON path")->required();
  }

  int run(std::ostream& o) {
    const MapRegistry reg = read_registry_file(registry);
    std::optional<DistanceCache> cache;
    if (!no_cache) cache.emplace(4096);
    std::array<std::size_t, kOutcomeClassCount> counts{};
    std::string content;
    const auto lines = read_lines(in);
    for (std::size_t k = 0; k < lines.size(); ++k) {
      const auto f = split_tabs(lines[k]);
      VerificationResult r;
      std::string map_id;
      if (f.size() >= 4) {
        map_id = f[0];
        const std::size_t offset = f[0].size() + f[1].size() + f[2].size() + 3;
        r = verify_tokens(reg, f[0], f[1], f[2], std::string_view(lines[k]).substr(offset),
                          cache ? &*cache : nullptr);
      }
      ++counts[static_cast<std::size_t>(r.outcome)];
      auto j = ordered_json::parse(result_to_ndjson(k, r));
      j["map_id"] = map_id;
      if (!method.empty()) j["method"] = method;
      content += j.dump() + '\n';
    }
    write_text_file(out, content);
    ordered_json summary{{"total", lines.size()}};
    for (auto c : kAllOutcomeClasses) summary[std::string(to_string(c))] = counts[static_cast<std::size_t>(c)];
    write_manifest("verify", out,
                   {{"map_registry", registry}, {"in", in}, {"method", method}, {"cache", !no_cache},
                    {"out", out}},
                   std::nullopt, {{"summary", summary}});
    o << summary.dump() << '\n';
    return 0;
  }
};

struct Serve {
  std::string registry, host = "127.0.0.1";
  std::uint16_t port = 0;
  bool stdio = false, no_cache = false;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("serve", "Run the NDJSON reward service");
    c->add_option("--map-registry", registry, "Registry JSON")->required();
    c->add_option("--host", host, "IPv4 address to bind");
    auto* p = c->add_option("--port", port, "TCP port (0 picks a free one)");
    c->add_flag("--stdio", stdio, "Serve stdin/stdout instead of a socket")->excludes(p);
    c->add_flag("--no-cache", no_cache, "Disable the distance cache");
  }

  int run(std::istream& i, std::ostream& o) {
    const MapRegistry reg = read_registry_file(registry);
    RewardService service(reg, !no_cache);
    if (stdio) {
      service.serve_stream(i, o);
      return 0;
    }
    // Block termination signals so every server thread inherits the mask,
    // then wait for one here and shut down cleanly.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    RewardServer server(service, host, port);
    server.start();
    o << ordered_json{{"listening", host + ":" + std::to_string(server.port())}}.dump() << std::endl;
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
    return 0;
  }
};

std::vector<EvalEntry> load_results(const std::vector<std::string>& specs) {
  std::vector<EvalEntry> all;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot open " + path);
    auto entries = read_results(in);
    if (eq != std::string::npos) {
      for (auto& e : entries) e.method = spec.substr(0, eq);
    }
    all.insert(all.end(), std::make_move_iterator(entries.begin()), std::make_move_iterator(entries.end()));
  }
  return all;
}

fs::path sibling(const std::string& out, const std::string& suffix) {
  fs::path p(out);
  p.replace_extension(suffix);
  return p;
}

struct Eval {
  std::vector<std::string> results;
  std::string groups, out;
  bool fold = false;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("eval", "Success rates and error distribution per length group");
    c->add_option("--results", results, "Results NDJSON, optionally METHOD=path; repeatable")->required();
    c->add_option("--groups", groups, "Length groups, e.g. 0-10,10-20")->required();
    c->add_flag("--fold-malformed", fold, "Count Malformed as Invalid Move");
    c->add_option("--out", out, "Report JSON path")->required();
  }

  int run(std::ostream& o) {
    const auto entries = load_results(results);
    const auto gs = parse_length_groups(groups);
    const EvalReport report = build_report(entries, gs);
    const auto errors = error_distribution(entries, gs, fold);
    auto j = report_to_json(report);
    ordered_json err_rows = ordered_json::array();
    for (const auto& r : errors) {
      err_rows.push_back({{"method", r.method}, {"group", r.group.label()}, {"errors", r.errors},
                          {"NonShortest", r.non_shortest}, {"NotReached", r.not_reached},
                          {"InvalidMove", r.invalid_move}, {"Malformed", r.malformed}});
    }
    j["errors"] = err_rows;
    const std::string sr_csv = sibling(out, ".sr.csv").string();
    const std::string err_csv = sibling(out, ".errors.csv").string();
    write_text_file(out, j.dump(2) + "\n");
    write_text_file(sr_csv, success_rate_csv(report));
    write_text_file(err_csv, error_table_csv(errors, fold));
    write_manifest("eval", out,
                   {{"results", results}, {"groups", groups}, {"fold_malformed", fold}, {"out", out}},
                   std::nullopt, ordered_json::object(), {out, sr_csv, err_csv});
    o << ordered_json{{"rows", report.rows.size()}, {"ungrouped", report.ungrouped}}.dump() << '\n';
    return 0;
  }
};

struct Decompose {
  std::string registry, queries, out, queries_out;
  int lmax = 20;
  std::uint64_t seed = 0;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("decompose", "Split long queries into two subpath queries");
    c->add_option("--map-registry", registry, "Registry JSON")->required();
    c->add_option("--queries", queries, "Query TSV: map_id, start, end")->required();
    c->add_option("--lmax", lmax, "Training length; longer than twice this is skipped");
    c->add_option("--seed", seed, "Seed");
    c->add_option("--out", out, "Plan NDJSON path")->required();
    c->add_option("--queries-out", queries_out,
                  "Query TSV with long, sub1, sub2 per plan row (default: <out>.tsv)");
  }

  int run(std::ostream& o, std::ostream& e) {
    const std::uint64_t s = resolve_seed(seed);
    const MapRegistry reg = read_registry_file(registry);
    const auto lines = read_lines(queries);
    // Plan per map, keeping input order in the output.
    std::map<std::string, std::vector<std::pair<std::size_t, PathQuery>>> by_map;
    for (std::size_t k = 0; k < lines.size(); ++k) {
      if (lines[k].empty()) continue;
      const PathQuery q = parse_query(reg, lines[k], k + 1);
      by_map[q.map_id].push_back({k, q});
    }
    std::map<std::size_t, std::pair<const GridMap*, DecompositionQuery>> rows;
    std::vector<std::size_t> skipped;
    for (const auto& [map_id, items] : by_map) {
      const GridMap& m = reg.at(map_id);
      std::vector<PathQuery> qs;
      for (const auto& it : items) qs.push_back(it.second);
      // Seed per map so adding another map's queries leaves this one alone.
      auto plan = make_decomposition_queries(m, qs, lmax, derive_seed(s, m.map_index()));
      for (auto& d : plan.queries) {
        const std::size_t line = items[d.index].first;
        d.index = line;
        rows.emplace(line, std::make_pair(&m, d));
      }
      for (std::size_t k : plan.skipped) skipped.push_back(items[k].first + 1);
    }
    std::sort(skipped.begin(), skipped.end());
    std::string plan_text, tsv;
    for (const auto& [line, row] : rows) {
      const auto& [m, d] = row;
      plan_text += ordered_json{{"line", line + 1}, {"map_id", m->map_id()},
                                {"start", m->token(d.long_query.start)}, {"mid", m->token(d.midpoint)},
                                {"end", m->token(d.long_query.end)}, {"length", d.length},
                                {"sub1_length", d.sub1_length}, {"sub2_length", d.sub2_length}}
                       .dump() +
                   '\n';
      tsv += query_to_tsv(*m, d.long_query) + '\n' + query_to_tsv(*m, d.sub1) + '\n' +
             query_to_tsv(*m, d.sub2) + '\n';
    }
    const std::string tsv_path = queries_out.empty() ? out + ".tsv" : queries_out;
    write_text_file(out, plan_text);
    write_text_file(tsv_path, tsv);
    if (!skipped.empty()) {
      e << ordered_json{{"warning", "queries longer than 2*lmax skipped"}, {"lines", skipped}}.dump() << '\n';
    }
    ordered_json stats{{"planned", rows.size()}, {"skipped_lines", skipped}};
    write_manifest("decompose", out,
                   {{"map_registry", registry}, {"queries", queries}, {"lmax", lmax}, {"out", out},
                    {"queries_out", tsv_path}},
                   s, stats, {out, tsv_path});
    o << ordered_json{{"planned", rows.size()}, {"skipped", skipped.size()}}.dump() << '\n';
    return 0;
  }
};

struct Select {
  std::string candidates, strategy = "greedy-first", registry, out;
  bool valid_only = false;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("select", "Pick one completion per query from K candidates");
    c->add_option("--candidates", candidates, "Candidate NDJSON")->required();
    c->add_option("--strategy", strategy, "greedy-first, majority or shortest")
        ->check(CLI::IsMember({"greedy-first", "majority", "shortest"}));
    auto* v = c->add_flag("--valid-only", valid_only, "Only valid paths compete (needs a registry)");
    c->add_option("--map-registry", registry, "Registry JSON")->needs(v);
    v->needs(c->get_option("--map-registry"));
    c->add_option("--out", out, "Verify-ready TSV path")->required();
  }

  int run(std::ostream& o) {
    const auto strat = *strategy_from_string(strategy);
    std::ifstream in(candidates);
    if (!in) throw Error("io", "cannot open " + candidates);
    const auto sets = read_candidate_sets(in);
    std::optional<MapRegistry> reg;
    std::optional<DistanceCache> cache;
    if (valid_only) {
      reg = read_registry_file(registry);
      cache.emplace(4096);
    }
    std::string content;
    std::vector<std::size_t> chosen;
    for (const auto& set : sets) {
      std::vector<bool> mask;
      if (valid_only) {
        for (const auto& c : set.candidates) {
          const auto r = verify_tokens(*reg, set.map_id, set.start, set.end, c, &*cache);
          mask.push_back(r.outcome == OutcomeClass::kSuccess || r.outcome == OutcomeClass::kNonShortest);
        }
      }
      const std::size_t k = select_candidate(set.candidates, strat, valid_only ? &mask : nullptr);
      chosen.push_back(k);
      content += set.map_id + '\t' + set.start + '\t' + set.end + '\t' + set.candidates[k] + '\n';
    }
    write_text_file(out, content);
    write_manifest("select", out,
                   {{"candidates", candidates}, {"strategy", strategy}, {"valid_only", valid_only},
                    {"map_registry", registry}, {"out", out}},
                   std::nullopt, {{"chosen_index", chosen}});
    o << ordered_json{{"queries", sets.size()}}.dump() << '\n';
    return 0;
  }
};

std::vector<OutcomeRow> outcomes_from_plan(const std::string& plan_path, const std::string& results_path) {
  const auto plan = read_lines(plan_path);
  std::ifstream in(results_path);
  if (!in) throw Error("io", "cannot open " + results_path);
  const auto results = read_results(in);
  std::vector<nlohmann::json> rows;
  for (const auto& l : plan) {
    if (!l.empty()) rows.push_back(nlohmann::json::parse(l));
  }
  if (results.size() != 3 * rows.size()) {
    throw FormatError("expected 3 results per plan row (long, sub1, sub2): " + std::to_string(rows.size()) +
                      " rows, " + std::to_string(results.size()) + " results");
  }
  std::vector<OutcomeRow> table;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& lr = results[3 * k].result;
    const auto& s1 = results[3 * k + 1].result;
    const auto& s2 = results[3 * k + 2].result;
    const int len = rows[k].at("length").get<int>();
    if (lr.shortest_length != len || s1.shortest_length != rows[k].at("sub1_length").get<int>() ||
        s2.shortest_length != rows[k].at("sub2_length").get<int>()) {
      throw FormatError("results do not line up with plan row " + std::to_string(k + 1));
    }
    table.push_back({len, lr.outcome == OutcomeClass::kSuccess, s1.outcome == OutcomeClass::kSuccess,
                     s2.outcome == OutcomeClass::kSuccess});
  }
  return table;
}

std::vector<OutcomeRow> outcomes_from_file(const std::string& path) {
  std::vector<OutcomeRow> table;
  std::size_t n = 0;
  for (const auto& l : read_lines(path)) {
    ++n;
    if (l.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(l);
      table.push_back({j.at("length").get<int>(), j.at("long").get<bool>(), j.at("sub1").get<bool>(),
                       j.at("sub2").get<bool>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("outcomes line " + std::to_string(n) + ": " + e.what());
    }
  }
  return table;
}

struct Report {
  std::string plan, results, outcomes, groups, out;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("report", "Length-failure decomposition table");
    auto* p = c->add_option("--plan", plan, "Plan NDJSON from decompose");
    auto* r = c->add_option("--results", results, "Verified long, sub1, sub2 results in plan order");
    auto* t = c->add_option("--outcomes", outcomes, "Outcome table NDJSON {length, long, sub1, sub2}");
    p->needs(r);
    r->needs(p);
    t->excludes(p);
    c->add_option("--groups", groups, "Length groups, e.g. 20-30,30-40")->required();
    c->add_option("--out", out, "Report JSON path")->required();
  }

  int run(std::ostream& o) {
    if (plan.empty() && outcomes.empty()) throw ParameterError("report needs --plan/--results or --outcomes");
    const auto table = outcomes.empty() ? outcomes_from_plan(plan, results) : outcomes_from_file(outcomes);
    EvalReport rep;
    rep.groups = parse_length_groups(groups);
    rep.decomposition = decomposition_stats(table, rep.groups);
    auto j = report_to_json(rep);
    j.erase("rows");
    j.erase("ungrouped");
    const std::string csv = sibling(out, ".csv").string();
    write_text_file(out, j.dump(2) + "\n");
    write_text_file(csv, decomposition_csv(rep.decomposition));
    write_manifest("report", out,
                   {{"plan", plan}, {"results", results}, {"outcomes", outcomes}, {"groups", groups},
                    {"out", out}},
                   std::nullopt, ordered_json::object(), {out, csv});
    o << j["decomposition"].dump() << '\n';
    return 0;
  }
};

void print_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << ordered_json{{"error", message}, {"kind", kind}}.dump() << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"soplab: shortest-path planning benchmark tools", "soplab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  GenMap gen_map;
  Split split;
  GenPretrain gen_pretrain;
  GenSft gen_sft;
  AugmentLength augment;
  BuildEval build_eval;
  Verify verify;
  Serve serve;
  Eval eval;
  Decompose decompose;
  Select select;
  Report report;
  gen_map.add(app);
  gen_pretrain.add(app);
  gen_sft.add(app);
  split.add(app);
  augment.add(app);
  build_eval.add(app);
  verify.add(app);
  serve.add(app);
  eval.add(app);
  decompose.add(app);
  select.add(app);
  report.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    print_error(err, "usage", e.what());
    return 2;
  }

  try {
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "gen-map") return gen_map.run(out);
    if (name == "split") return split.run(out);
    if (name == "gen-pretrain") return gen_pretrain.run(out, err);
    if (name == "gen-sft") return gen_sft.run(out);
    if (name == "augment-length") return augment.run(out);
    if (name == "build-eval") return build_eval.run(out);
    if (name == "verify") return verify.run(out);
    if (name == "serve") return serve.run(in, out);
    if (name == "eval") return eval.run(out);
    if (name == "decompose") return decompose.run(out, err);
    if (name == "select") return select.run(out);
    if (name == "report") return report.run(out);
    print_error(err, "usage", "unknown subcommand " + name);
    return 2;
  } catch (const Error& e) {
    print_error(err, e.kind(), e.what());
  } catch (const nlohmann::json::exception& e) {
    print_error(err, "format", e.what());
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what());
  }
  return 1;
}

}  // namespace soplab

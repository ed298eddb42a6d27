#pragma once

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tablenet/al.hpp"
#include "tablenet/augment.hpp"
#include "tablenet/checker.hpp"
#include "tablenet/correlation.hpp"
#include "tablenet/disturbance.hpp"
#include "tablenet/generator.hpp"
#include "tablenet/http_provider.hpp"
#include "tablenet/manifest.hpp"
#include "tablenet/teds.hpp"

namespace tablenet {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { exit_ok = 0, exit_item_failures = 1, exit_config = 2 };

struct CheckerConfig {
  std::string ranker = "surrogate";  // surrogate | http
  int threshold = 3;
};

struct AugmentConfig {
  bool clear_bodies = true;  // blank body cells before re-infilling
};

struct SamplerConfig {
  std::string features = "structural";  // structural | file:<path>
  std::string strategy = "coreset";
  std::string metric = "euclidean";
  std::size_t budget = 10;
  std::size_t step = 1;
  std::size_t initial = 1;
  double test_fraction = 0.2;
  std::string scores;  // JSONL {id, score}; needed by ppl / hard
  std::string pool;
  std::string curve = "curve.csv";
};

// Whole-pipeline configuration file. Unknown keys are rejected so typos fail
// loudly; API keys are read from the environment only.
struct PipelineConfig {
  GenerationRequest generation;
  ProviderConfig provider;
  CheckerConfig checker;
  AugmentConfig augmentation;
  SamplerConfig sampler;
  std::string manifest_dir;
  std::string transcript_dir;
  std::string topic_memory;
  std::uint64_t seed = 0;

  static PipelineConfig load(const std::filesystem::path& path);
  static PipelineConfig from_json(const json& j);
  // Referenced inputs must exist before any work starts.
  void check_paths() const;
};

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* x) { return k == x; })) {
      throw ConfigError("unknown key '" + k + "' in " + where);
    }
  }
}

inline IntRange range_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(what + " must be [lo, hi]");
  return {j[0].get<int>(), j[1].get<int>()};
}

template <typename E>
E enum_value(const json& j, const std::string& what) {
  const E e = j.get<E>();
  if (json(e) != j) throw ConfigError("invalid " + what + " " + j.dump());
  return e;
}

}  // namespace detail

inline PipelineConfig PipelineConfig::from_json(const json& j) {
  detail::reject_unknown(j, {"seed", "generation", "provider", "checker", "augmentation", "sampler", "paths"},
                         "config");
  PipelineConfig c;
  try {
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("generation")) {
      const json& g = j["generation"];
      detail::reject_unknown(g,
                             {"count", "complexity", "colored", "lined", "rows", "cols",
                              "header_layout_weights", "domain", "language", "max_fallback", "workers"},
                             "generation");
      auto& r = c.generation;
      r.count = g.value("count", r.count);
      if (g.contains("complexity")) r.complexity = detail::enum_value<Complexity>(g["complexity"], "complexity");
      if (g.contains("colored")) r.colored = detail::enum_value<TriState>(g["colored"], "colored");
      if (g.contains("lined")) r.lined = detail::enum_value<TriState>(g["lined"], "lined");
      if (g.contains("rows")) r.rows = detail::range_from_json(g["rows"], "rows");
      if (g.contains("cols")) r.cols = detail::range_from_json(g["cols"], "cols");
      if (g.contains("header_layout_weights")) {
        r.header_layout_weights = g["header_layout_weights"].get<std::array<double, 3>>();
      }
      r.domain = g.value("domain", r.domain);
      if (g.contains("language")) {
        r.language = enum_from_string<Language>(g["language"].get<std::string>(), "language");
      }
      r.max_fallback = g.value("max_fallback", r.max_fallback);
      r.workers = g.value("workers", r.workers);
    }
    if (j.contains("provider")) c.provider = ProviderConfig::from_json(j["provider"]);
    if (j.contains("checker")) {
      const json& k = j["checker"];
      detail::reject_unknown(k, {"ranker", "threshold"}, "checker");
      c.checker.ranker = k.value("ranker", c.checker.ranker);
      c.checker.threshold = k.value("threshold", c.checker.threshold);
      if (c.checker.ranker != "surrogate" && c.checker.ranker != "http") {
        throw ConfigError("checker ranker must be surrogate or http");
      }
      if (c.checker.threshold < 1 || c.checker.threshold > 5) throw ConfigError("checker threshold must be in [1, 5]");
    }
    if (j.contains("augmentation")) {
      const json& a = j["augmentation"];
      detail::reject_unknown(a, {"clear_bodies"}, "augmentation");
      c.augmentation.clear_bodies = a.value("clear_bodies", c.augmentation.clear_bodies);
    }
    if (j.contains("sampler")) {
      const json& s = j["sampler"];
      detail::reject_unknown(s,
                             {"features", "strategy", "metric", "budget", "step", "initial", "test_fraction",
                              "scores", "pool", "curve"},
                             "sampler");
      auto& m = c.sampler;
      m.features = s.value("features", m.features);
      m.strategy = s.value("strategy", m.strategy);
      m.metric = s.value("metric", m.metric);
      m.budget = s.value("budget", m.budget);
      m.step = s.value("step", m.step);
      m.initial = s.value("initial", m.initial);
      m.test_fraction = s.value("test_fraction", m.test_fraction);
      m.scores = s.value("scores", m.scores);
      m.pool = s.value("pool", m.pool);
      m.curve = s.value("curve", m.curve);
      strategy_from_string(m.strategy);
      if (m.metric != "euclidean" && m.metric != "cosine") throw ConfigError("metric must be euclidean or cosine");
      if (!(m.test_fraction >= 0.0 && m.test_fraction < 1.0)) throw ConfigError("test_fraction must be in [0, 1)");
    }
    if (j.contains("paths")) {
      const json& p = j["paths"];
      detail::reject_unknown(p, {"manifest_dir", "transcript_dir", "topic_memory"}, "paths");
      c.manifest_dir = p.value("manifest_dir", c.manifest_dir);
      c.transcript_dir = p.value("transcript_dir", c.transcript_dir);
      c.topic_memory = p.value("topic_memory", c.topic_memory);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.generation.seed = c.seed;
  c.generation.validate();
  return c;
}

inline PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PathError(path.string());
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
  PipelineConfig c = from_json(j);
  // Relative paths resolve against the config file's directory.
  const auto base = path.parent_path();
  const auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).string();
  };
  resolve(c.provider.prompt_dir);
  resolve(c.provider.replay);
  resolve(c.provider.transcript);
  resolve(c.sampler.pool);
  resolve(c.sampler.scores);
  resolve(c.sampler.curve);
  resolve(c.manifest_dir);
  resolve(c.transcript_dir);
  resolve(c.topic_memory);
  if (c.sampler.features.rfind("file:", 0) == 0) {
    std::string f = c.sampler.features.substr(5);
    resolve(f);
    c.sampler.features = "file:" + f;
  }
  return c;
}

inline void PipelineConfig::check_paths() const {
  const auto need = [](const std::string& p) {
    if (!p.empty() && !std::filesystem::exists(p)) throw PathError(p);
  };
  need(provider.prompt_dir);
  need(provider.replay);
  need(sampler.pool);
  need(sampler.scores);
  need(manifest_dir);
  need(transcript_dir);
  if (sampler.features.rfind("file:", 0) == 0) need(sampler.features.substr(5));
}

namespace detail {

inline void emit_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << "tablenet: " << message << '\n' << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

inline std::size_t worker_budget(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

inline void write_json_file(const json& j, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw PathError(path);
  f << j.dump(2) << '\n';
}

inline std::shared_ptr<const RankerProvider> make_ranker(const std::string& kind, const ProviderConfig& provider) {
  if (kind == "surrogate") return std::make_shared<SurrogateRanker>();
  if (kind != "http") throw ConfigError("ranker must be surrogate or http");
  PromptSet prompts = provider.prompt_dir.empty() ? PromptSet{} : PromptSet::load(provider.prompt_dir);
  return std::make_shared<HttpRanker>(make_transport(provider), provider.model, std::move(prompts));
}

inline Distance metric_from_string(const std::string& m) {
  if (m == "euclidean") return Distance::euclidean;
  if (m == "cosine") return Distance::cosine;
  throw ConfigError("metric must be euclidean or cosine");
}

inline std::vector<EmbeddingVector> load_features(const std::string& spec,
                                                  const std::vector<AnnotationRecord>& pool) {
  if (spec == "structural") return structural_features(pool);
  if (spec.rfind("file:", 0) != 0) throw ConfigError("features must be structural or file:<path>");
  auto vs = read_embeddings(spec.substr(5));
  if (vs.size() != pool.size()) {
    throw ConfigError("embedding file has " + std::to_string(vs.size()) + " vectors for a pool of " +
                      std::to_string(pool.size()));
  }
  return vs;
}

// Reads {id, score} lines and orders them like the pool.
inline std::vector<double> load_scores(const std::string& path, const std::vector<AnnotationRecord>& pool) {
  std::map<std::string, double> by_id;
  for (const auto& row : read_jsonl(path)) {
    by_id[row.at("id").get<std::string>()] = row.at("score").get<double>();
  }
  std::vector<double> scores;
  for (const auto& r : pool) {
    const auto it = by_id.find(r.id);
    if (it == by_id.end()) throw ConfigError("no score for pool record '" + r.id + "' in " + path);
    scores.push_back(it->second);
  }
  return scores;
}

inline std::string blank_body_cells(const std::string& html_text) {
  const TableGrid g = html_to_grid(html_text);
  std::vector<std::optional<std::string>> contents(g.cells().size());
  for (std::size_t i = 0; i < contents.size(); ++i) {
    if (!g.cells()[i].is_header) contents[i] = std::string{};
  }
  return rewrite_cells(html_text, contents);
}

inline bool parse_range(const std::string& text, IntRange& out) {
  const auto dash = text.find('-');
  try {
    if (dash == std::string::npos) {
      out.lo = out.hi = std::stoi(text);
    } else {
      out.lo = std::stoi(text.substr(0, dash));
      out.hi = std::stoi(text.substr(dash + 1));
    }
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

// Optional external renderer: the command gets the record's HTML on a temp
// file path substituted for {html} and its id for {id}.
inline void run_render_hook(const std::string& cmd, const std::vector<AnnotationRecord>& records,
                            const std::filesystem::path& dir, std::ostream& err) {
  for (const auto& r : records) {
    const auto file = dir / (r.id + ".html");
    {
      std::ofstream f(file, std::ios::binary | std::ios::trunc);
      if (!f) throw PathError(file.string());
      f << r.html;
    }
    std::string line = cmd;
    for (const auto& [slot, value] : {std::pair{std::string("{html}"), file.string()}, std::pair{std::string("{id}"), r.id}}) {
      for (std::size_t at = line.find(slot); at != std::string::npos; at = line.find(slot, at + value.size())) {
        line.replace(at, slot.size(), value);
      }
    }
    if (std::system(line.c_str()) != 0) err << "tablenet: render hook failed for " << r.id << '\n';
  }
}

struct Io {
  std::ostream& out;
  std::ostream& err;
};

}  // namespace detail

// Parses argv, runs one subcommand and maps failures to exit codes: 0 on
// success, 1 when some items failed, 2 for configuration and usage errors.
inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Synthetic table generation, validation, augmentation, TEDS scoring and sample selection",
               "tablenet"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  bool show_version = false, show_schema = false;
  std::string config_path;
  std::size_t workers = 0;
  app.add_flag("--version", show_version, "Print the version and exit");
  app.add_flag("--schema", show_schema, "Print the manifest line JSON schema and exit");
  app.add_option("--config", config_path, "Pipeline config JSON")->check(CLI::ExistingFile);
  app.add_option("--workers", workers, "Worker threads (default: hardware threads)");

  int code = exit_ok;
  PipelineConfig cfg;
  const auto seeded = [&](CLI::App* sub, std::uint64_t& seed) {
    return sub->add_option("--seed", seed, "Random seed");
  };

  // generate
  auto* gen = app.add_subcommand("generate", "Synthesize annotated tables");
  struct {
    std::size_t count = 1;
    std::string complexity, colored, lined, domain, lang, provider, out = "manifest.jsonl", report, rows, cols,
                                                                 render_cmd, topic_memory;
    std::uint64_t seed = 0;
  } g;
  gen->add_option("--count", g.count, "Number of tables");
  gen->add_option("--complexity", g.complexity)->check(CLI::IsMember({"simple", "complex", "mixed"}));
  gen->add_option("--colored", g.colored)->check(CLI::IsMember({"yes", "no", "any"}));
  gen->add_option("--lined", g.lined)->check(CLI::IsMember({"yes", "no", "any"}));
  gen->add_option("--domain", g.domain);
  gen->add_option("--lang", g.lang)->check(CLI::IsMember({"zh", "en"}));
  auto* gen_seed = seeded(gen, g.seed);
  gen->add_option("--provider", g.provider)->check(CLI::IsMember({"template", "http"}));
  gen->add_option("--rows", g.rows, "Row range lo-hi");
  gen->add_option("--cols", g.cols, "Column range lo-hi");
  gen->add_option("--out", g.out, "Output manifest");
  gen->add_option("--report", g.report, "Batch report path (default: <out>.report.json)");
  gen->add_option("--topic-memory", g.topic_memory, "Persisted used-topic file");
  gen->add_option("--render-cmd", g.render_cmd, "External renderer run per record ({html}, {id})");

  // validate
  auto* val = app.add_subcommand("validate", "Check manifest tables for structural defects");
  std::string val_manifest, val_report;
  val->add_option("manifest", val_manifest)->required();
  val->add_option("--report", val_report);

  // rank
  auto* rank = app.add_subcommand("rank", "Score tables with the filling checker");
  std::string rank_manifest, rank_kind = "surrogate", rank_out;
  rank->add_option("manifest", rank_manifest)->required();
  rank->add_option("--ranker", rank_kind)->check(CLI::IsMember({"surrogate", "http"}));
  rank->add_option("--out", rank_out);

  // corr
  auto* corr = app.add_subcommand("corr", "Correlate two rank files by record id");
  std::string corr_a, corr_b, corr_field = "overall";
  corr->add_option("ranks_a", corr_a)->required();
  corr->add_option("ranks_b", corr_b)->required();
  corr->add_option("--field", corr_field)
      ->check(CLI::IsMember({"overall", "structure_rank", "topic_rank", "semantic_rank"}));

  // augment
  auto* aug = app.add_subcommand("augment", "Fan each record out into nine variants");
  std::string aug_manifest, aug_out = "augmented.jsonl";
  std::uint64_t aug_seed = 0;
  aug->add_option("manifest", aug_manifest)->required();
  aug->add_option("--out", aug_out);
  auto* aug_seed_opt = seeded(aug, aug_seed);

  // teds
  auto* ted = app.add_subcommand("teds", "Score predictions against gold tables");
  std::string teds_pred, teds_gold, teds_mode = "full", teds_out;
  bool merge_th_td = false;
  ted->add_option("--pred", teds_pred)->required();
  ted->add_option("--gold", teds_gold)->required();
  ted->add_option("--mode", teds_mode)->check(CLI::IsMember({"full", "structure"}));
  ted->add_option("--out", teds_out);
  ted->add_flag("--merge-th-td", merge_th_td, "Treat th and td as the same tag");

  // sample
  auto* smp = app.add_subcommand("sample", "Select samples from a pool");
  std::string smp_pool, smp_features = "structural", smp_strategy = "coreset", smp_out, smp_scores,
                        smp_metric = "euclidean";
  std::size_t smp_budget = 0;
  std::uint64_t smp_seed = 0;
  smp->add_option("--pool", smp_pool)->required();
  smp->add_option("--features", smp_features);
  smp->add_option("--strategy", smp_strategy)->check(CLI::IsMember({"coreset", "random", "ppl", "hard"}));
  smp->add_option("--budget", smp_budget)->required();
  auto* smp_seed_opt = seeded(smp, smp_seed);
  smp->add_option("--scores", smp_scores, "JSONL of {id, score} for ppl / hard");
  smp->add_option("--metric", smp_metric)->check(CLI::IsMember({"euclidean", "cosine"}));
  smp->add_option("--out", smp_out);

  // al-run
  auto* alr = app.add_subcommand("al-run", "Run the active-learning loop from a config");
  std::string al_config;
  alr->add_option("--config", al_config)->required()->check(CLI::ExistingFile);

  // disturb
  auto* dis = app.add_subcommand("disturb", "Corrupt records and correlate checker ranks with severity");
  std::string dis_manifest, dis_perturb = "structure,topic,semantics", dis_ranker = "surrogate", dis_out;
  int dis_reps = 3;
  std::uint64_t dis_seed = 0;
  dis->add_option("manifest", dis_manifest)->required();
  dis->add_option("--perturb", dis_perturb, "Comma-separated perturbation kinds");
  dis->add_option("--repetitions", dis_reps);
  dis->add_option("--ranker", dis_ranker)->check(CLI::IsMember({"surrogate", "http"}));
  auto* dis_seed_opt = seeded(dis, dis_seed);
  dis->add_option("--out", dis_out);

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return exit_ok;
    } catch (const CLI::ParseError& e) {
      detail::emit_error(err, "UsageError", e.what());
      err << app.help();
      return exit_config;
    }

    if (show_version) {
      out << "tablenet " << kVersion << '\n';
      return exit_ok;
    }
    if (show_schema) {
      out << manifest_schema().dump(2) << '\n';
      return exit_ok;
    }
    if (!config_path.empty()) {
      cfg = PipelineConfig::load(config_path);
      cfg.check_paths();
    }
    const std::size_t budget = detail::worker_budget(workers ? workers : cfg.generation.workers);
    const auto seed_or = [&](CLI::Option* opt, std::uint64_t v) { return opt->count() ? v : cfg.seed; };

    if (app.got_subcommand(gen)) {
      GenerationRequest req = cfg.generation;
      req.count = gen->count("--count") ? g.count : req.count;
      if (!g.complexity.empty()) req.complexity = json(g.complexity).get<Complexity>();
      if (!g.colored.empty()) req.colored = json(g.colored).get<TriState>();
      if (!g.lined.empty()) req.lined = json(g.lined).get<TriState>();
      if (!g.domain.empty()) req.domain = g.domain;
      if (!g.lang.empty()) req.language = enum_from_string<Language>(g.lang, "language");
      if (!g.rows.empty() && !detail::parse_range(g.rows, req.rows)) throw ConfigError("bad --rows '" + g.rows + "'");
      if (!g.cols.empty() && !detail::parse_range(g.cols, req.cols)) throw ConfigError("bad --cols '" + g.cols + "'");
      req.seed = seed_or(gen_seed, g.seed);
      req.workers = budget;
      req.validate();
      ProviderConfig pc = cfg.provider;
      if (!g.provider.empty()) pc.kind = g.provider;
      const auto provider = make_provider(pc, req.seed);
      const FillingChecker checker(detail::make_ranker(cfg.checker.ranker, pc), cfg.checker.threshold);
      const std::string memory_path = !g.topic_memory.empty() ? g.topic_memory : cfg.topic_memory;
      TopicMemory memory(memory_path);
      BatchResult result;
      try {
        result = generate_batch(req, *provider, checker, &memory);
      } catch (const BatchAborted& e) {
        write_manifest(e.partial().records, g.out);
        detail::write_json_file(to_json(e.partial().report), g.report.empty() ? g.out + ".report.json" : g.report, out);
        throw;
      }
      write_manifest(result.records, g.out);
      memory.save();
      detail::write_json_file(to_json(result.report), g.report.empty() ? g.out + ".report.json" : g.report, out);
      if (!g.render_cmd.empty()) {
        detail::run_render_hook(g.render_cmd, result.records, std::filesystem::path(g.out).parent_path().empty()
                                                                  ? std::filesystem::current_path()
                                                                  : std::filesystem::path(g.out).parent_path(),
                                err);
      }
      if (result.report.unknown_domain) err << "tablenet: warning: unknown domain '" << req.domain << "'\n";
      out << json{{"requested", result.report.requested},
                  {"produced", result.report.produced},
                  {"failed", result.report.failed}}
                 .dump()
          << '\n';
      code = result.report.failed ? exit_item_failures : exit_ok;
    } else if (app.got_subcommand(val)) {
      const auto records = load_manifest(val_manifest);
      json items = json::array();
      std::size_t invalid = 0;
      for (const auto& r : records) {
        const ValidationReport v = validate_table(r.html);
        invalid += !v.valid;
        json j = to_json(v);
        j["id"] = r.id;
        items.push_back(std::move(j));
      }
      const json report = {{"records", records.size()}, {"invalid", invalid}, {"items", std::move(items)}};
      detail::write_json_file(report, val_report, out);
      code = invalid ? exit_item_failures : exit_ok;
    } else if (app.got_subcommand(rank)) {
      const auto records = load_manifest(rank_manifest);
      const auto ranker = detail::make_ranker(rank_kind, cfg.provider);
      std::vector<json> rows;
      for (const auto& r : records) {
        json j = {{"id", r.id}};
        j.update(json(rank_table(r.html, r.topic, *ranker)));
        rows.push_back(std::move(j));
      }
      if (rank_out.empty()) {
        for (const auto& row : rows) out << row.dump() << '\n';
      } else {
        write_jsonl(rows, rank_out);
      }
    } else if (app.got_subcommand(corr)) {
      std::map<std::string, double> a;
      for (const auto& row : read_jsonl(corr_a)) a[row.at("id").get<std::string>()] = row.at(corr_field).get<double>();
      std::vector<double> xs, ys;
      for (const auto& row : read_jsonl(corr_b)) {
        const auto it = a.find(row.at("id").get<std::string>());
        if (it == a.end()) continue;
        xs.push_back(it->second);
        ys.push_back(row.at(corr_field).get<double>());
      }
      const CorrelationSummary s = correlate(xs, ys);
      out << json{{"n", xs.size()}, {"spearman", s.spearman}, {"pearson", s.pearson}, {"kendall", s.kendall}}.dump(2)
          << '\n';
    } else if (app.got_subcommand(aug)) {
      const auto records = load_manifest(aug_manifest);
      const std::uint64_t seed = seed_or(aug_seed_opt, aug_seed);
      const auto provider = make_provider(cfg.provider, seed);
      std::vector<AnnotationRecord> variants;
      for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        Rng rng(mix_seed(seed, i));
        FanoutOptions opt;
        opt.parent_id = r.id;
        opt.topic = r.topic;
        opt.domain = cfg.generation.domain;
        opt.language = r.language;
        opt.style = r.style.value_or(StyleSpec{});
        const std::string skeleton = cfg.augmentation.clear_bodies ? detail::blank_body_cells(r.html) : r.html;
        for (auto& v : variant_fanout(skeleton, *provider, rng, opt)) variants.push_back(std::move(v));
      }
      write_manifest(variants, aug_out);
      out << json{{"parents", records.size()}, {"variants", variants.size()}}.dump() << '\n';
    } else if (app.got_subcommand(ted)) {
      const auto pred = load_manifest(teds_pred);
      const auto gold = load_manifest(teds_gold);
      const TedsMode mode = teds_mode == "structure" ? TedsMode::structure_only : TedsMode::full;
      const TedsReport report = batch_teds(pred, gold, mode, TreeOptions{merge_th_td});
      detail::write_json_file(to_json(report), teds_out, out);
      code = report.invalid ? exit_item_failures : exit_ok;
    } else if (app.got_subcommand(smp)) {
      const auto pool = load_manifest(smp_pool);
      const Strategy strategy = strategy_from_string(smp_strategy);
      std::vector<std::size_t> picks;
      if (strategy == Strategy::coreset) {
        SelectionProblem p;
        p.points = detail::load_features(smp_features, pool);
        p.budget = smp_budget;
        p.metric = detail::metric_from_string(smp_metric);
        picks = k_center_greedy(p);
      } else {
        std::optional<std::vector<double>> scores;
        if (!smp_scores.empty()) scores = detail::load_scores(smp_scores, pool);
        if (smp_budget > pool.size()) throw ConfigError("budget exceeds pool size");
        picks = baseline_select(strategy, pool.size(), scores, smp_budget, seed_or(smp_seed_opt, smp_seed));
      }
      std::vector<AnnotationRecord> selected;
      for (std::size_t i : picks) selected.push_back(pool[i]);
      if (smp_out.empty()) {
        for (const auto& r : selected) out << json(r).dump() << '\n';
      } else {
        write_manifest(selected, smp_out);
      }
    } else if (app.got_subcommand(alr)) {
      const PipelineConfig al = PipelineConfig::load(al_config);
      al.check_paths();
      const auto& sc = al.sampler;
      if (sc.pool.empty()) throw ConfigError("al config needs sampler.pool");
      const auto pool = load_manifest(sc.pool);
      const auto features = detail::load_features(sc.features, pool);
      const Distance metric = detail::metric_from_string(sc.metric);
      // Seeded split: held-out test set, initial labeled set, the rest unlabeled.
      std::vector<std::size_t> order(pool.size());
      std::iota(order.begin(), order.end(), 0);
      Rng rng(al.seed);
      rng.shuffle(order);
      const auto n_test = static_cast<std::size_t>(std::floor(sc.test_fraction * static_cast<double>(pool.size())));
      if (n_test + sc.initial > pool.size()) throw ConfigError("pool too small for the test split and initial set");
      std::vector<EmbeddingVector> test_pts;
      std::vector<std::string> test_labels;
      for (std::size_t k = 0; k < n_test; ++k) {
        test_pts.push_back(features[order[k]]);
        test_labels.push_back(label_triple(pool[order[k]].labels));
      }
      ActiveLearningState state;
      state.budget = sc.budget;
      for (std::size_t k = n_test; k < order.size(); ++k) {
        if (k < n_test + sc.initial) {
          state.labeled.push_back({order[k], label_triple(pool[order[k]].labels)});
        } else {
          state.unlabeled.push_back(order[k]);
        }
      }
      std::sort(state.unlabeled.begin(), state.unlabeled.end());
      const NearestNeighborTrainer trainer(features, test_pts, test_labels, metric);
      QueryContext ctx;
      ctx.points = &features;
      ctx.metric = metric;
      ctx.seed = al.seed;
      if (!sc.scores.empty()) ctx.scores = detail::load_scores(sc.scores, pool);
      const Annotator annotate = [&](std::size_t id) { return label_triple(pool[id].labels); };
      const LoopResult result = run_al_loop(state, strategy_from_string(sc.strategy), sc.step, trainer, annotate, ctx);
      std::ofstream csv(sc.curve, std::ios::binary | std::ios::trunc);
      if (!csv) throw PathError(sc.curve);
      csv << "round,labeled_count,score\n";
      for (const auto& pt : result.curve) csv << pt.round << ',' << pt.labeled_count << ',' << pt.score << '\n';
      out << json{{"rounds", result.curve.size() - 1},
                  {"labeled", result.labeled.size()},
                  {"final_score", result.curve.back().score},
                  {"curve", sc.curve}}
                 .dump()
          << '\n';
      if (result.error) {
        detail::emit_error(err, "AnnotatorError", *result.error);
        code = exit_item_failures;
      }
    } else if (app.got_subcommand(dis)) {
      const auto records = load_manifest(dis_manifest);
      std::vector<Perturbation> perturbations;
      std::stringstream kinds(dis_perturb);
      for (std::string k; std::getline(kinds, k, ',');) {
        const PerturbationKind kind = detail::enum_value<PerturbationKind>(json(k), "perturbation");
        perturbations.push_back({kind, max_severity(kind)});
      }
      const auto ranker = detail::make_ranker(dis_ranker, cfg.provider);
      const auto report = disturbance_study(records, perturbations, *ranker, seed_or(dis_seed_opt, dis_seed), dis_reps);
      detail::write_json_file(to_json(report), dis_out, out);
    } else {
      err << app.help();
      detail::emit_error(err, "UsageError", "no subcommand given");
      return exit_config;
    }
  } catch (const ConfigError& e) {
    detail::emit_error(err, e.kind(), e.what());
    return exit_config;
  } catch (const PathError& e) {
    detail::emit_error(err, e.kind(), e.what());
    return exit_config;
  } catch (const ManifestError& e) {
    detail::emit_error(err, e.kind(), e.what());
    return exit_config;
  } catch (const DuplicateId& e) {
    detail::emit_error(err, e.kind(), e.what());
    return exit_config;
  } catch (const AlignmentError& e) {
    detail::emit_error(err, e.kind(), e.what());
    return exit_config;
  } catch (const Error& e) {
    detail::emit_error(err, e.kind(), e.what());
    return exit_item_failures;
  } catch (const json::exception& e) {
    detail::emit_error(err, "FormatError", e.what());
    return exit_config;
  } catch (const std::exception& e) {
    detail::emit_error(err, "InternalError", e.what());
    return exit_item_failures;
  }
  return code;
}

}  // namespace tablenet

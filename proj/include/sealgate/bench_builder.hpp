#pragma once

// Benchmark construction pipeline: ingest heterogeneous source corpora,
// turn staged records into jailbreak prompts, expand to ten languages,
// assign ID-cohesive splits, and persist corpus + manifest.
//
// Determinism contract: (sources, config, seed) fully determine the
// output bytes. Nothing here reads clocks or unseeded randomness.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "sealgate/attacks.hpp"
#include "sealgate/digest.hpp"
#include "sealgate/domain.hpp"
#include "sealgate/errors.hpp"
#include "sealgate/jsonl.hpp"
#include "sealgate/translation.hpp"
#include "sealgate/version.hpp"

namespace sealgate {

// ---------------------------------------------------------------------------
// Source ingestion. Each source dataset ships its own schema; adapters
// declare where the prompt text lives and which label applies. Staged
// sources feed the jailbreak generator instead of entering the corpus
// as plain text.

struct SourceAdapter {
  std::string text_field;
  std::string category_field;  // empty ⇒ source carries no category
  SafetyLabel label = SafetyLabel::unsafe;
  bool staged_for_attack = false;
};

inline SourceAdapter default_adapter(Source source) {
  switch (source) {
    case Source::alpaca:
      return {"instruction", "", SafetyLabel::safe, false};
    case Source::beavertails:
      return {"prompt", "category", SafetyLabel::unsafe, false};
    case Source::do_not_answer:
      return {"question", "", SafetyLabel::unsafe, true};
    case Source::catqa:
      return {"question", "", SafetyLabel::unsafe, true};
    case Source::advbench:
      return {"goal", "", SafetyLabel::unsafe, true};
    case Source::forbidden_questions:
      return {"question", "", SafetyLabel::unsafe, true};
  }
  throw UnknownSource("no adapter for source");
}

struct IngestResult {
  std::vector<PromptRecord> records;
  std::size_t skipped_lines = 0;  // lenient mode only
};

inline IngestResult ingest_source(const std::filesystem::path& path,
                                  Source source, bool strict = true) {
  const SourceAdapter adapter = default_adapter(source);
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open source file '" + path.string() + "'");
  }
  IngestResult result;
  std::string line;
  std::size_t line_number = 0;
  std::size_t emitted = 0;
  const auto fail = [&](const std::string& reason) {
    std::ostringstream msg;
    msg << path.string() << ": line " << line_number << ": " << reason;
    throw MalformedLine(msg.str());
  };
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        fail("not a JSON object");
      }
      if (!j.contains(adapter.text_field) ||
          !j.at(adapter.text_field).is_string() ||
          j.at(adapter.text_field).get<std::string>().empty()) {
        fail("missing or empty text field '" + adapter.text_field + "'");
      }
      FieldMap raw;
      if (j.contains("id") && j.at("id").is_string() &&
          !j.at("id").get<std::string>().empty()) {
        raw["id"] =
            std::string(to_code(source)) + "-" + j.at("id").get<std::string>();
      } else {
        std::ostringstream id;
        id << to_code(source) << '-' << std::setw(6) << std::setfill('0')
           << (emitted + 1);
        raw["id"] = id.str();
      }
      raw["text"] = j.at(adapter.text_field).get<std::string>();
      raw["language"] = "eng";
      raw["label"] = std::string(to_code(adapter.label));
      raw["source"] = std::string(to_code(source));
      if (!adapter.category_field.empty() &&
          j.contains(adapter.category_field)) {
        if (!j.at(adapter.category_field).is_string() ||
            !try_category(j.at(adapter.category_field).get<std::string>())) {
          fail("invalid category in field '" + adapter.category_field + "'");
        }
        raw["category"] = j.at(adapter.category_field).get<std::string>();
      }
      result.records.push_back(validate_record(raw));
      ++emitted;
    } catch (const MalformedLine&) {
      if (strict) throw;
      ++result.skipped_lines;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Jailbreak generation: each staged English record is rewritten in
// place as an attack prompt. The plan assigns kinds round-robin over
// the records in stable (id-sorted) order, offset by the seed.

inline std::vector<PromptRecord> generate_jailbreaks(
    std::vector<PromptRecord> records, const std::vector<AttackKind>& plan,
    const AttackContext& ctx) {
  if (plan.empty()) {
    throw ConfigError("jailbreak attack plan is empty");
  }
  for (const PromptRecord& rec : records) {
    if (rec.language != Language::eng || rec.parent_id != rec.id) {
      throw InvalidCorpus("jailbreak staging expects English originals; "
                          "record " + rec.id + " is not one");
    }
  }
  std::sort(records.begin(), records.end(),
            [](const PromptRecord& a, const PromptRecord& b) {
              return a.id < b.id;
            });
  const std::size_t offset =
      static_cast<std::size_t>(ctx.rng_seed % plan.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    PromptRecord& rec = records[i];
    const AttackKind kind = plan[(i + offset) % plan.size()];
    try {
      rec.text = apply_attack(kind, rec.text, ctx, rec.id).text;
    } catch (const Error& e) {
      throw Error(e.code(),
                  "record " + rec.id + ": " + std::string(e.what()));
    }
    rec.label = SafetyLabel::unsafe;
    rec.attack = kind;
  }
  return records;
}

// ---------------------------------------------------------------------------
// Corpus expansion: one translated record per (English record × target
// language). Requests may fan out over `parallelism` threads; assembly
// is a single-threaded reduce in stable order. A checkpoint file makes
// aborted strict runs resumable without re-buying translations.

struct TranslateOptions {
  int parallelism = 1;
  std::filesystem::path checkpoint_path;  // empty ⇒ no checkpointing
};

inline std::vector<Language> sea_languages() {
  std::vector<Language> out;
  for (Language lang : kAllLanguages) {
    if (lang != Language::eng) out.push_back(lang);
  }
  return out;
}

namespace detail {

struct TranslationTask {
  std::size_t record_index;
  Language target;
};

inline std::map<std::pair<std::string, std::string>, std::string>
load_checkpoint(const std::filesystem::path& path) {
  std::map<std::pair<std::string, std::string>, std::string> done;
  if (path.empty()) return done;
  std::error_code ec;
  if (!std::filesystem::exists(path, ec) || ec) return done;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("id") || !j.contains("language") ||
        !j.contains("text")) {
      continue;  // torn tail line from an aborted run
    }
    done[{j["id"].get<std::string>(), j["language"].get<std::string>()}] =
        j["text"].get<std::string>();
  }
  return done;
}

}  // namespace detail

inline std::vector<PromptRecord> translate_corpus(
    const std::vector<PromptRecord>& records,
    const std::vector<Language>& targets, TranslationClient& client,
    const TranslateOptions& options = {}) {
  for (const PromptRecord& rec : records) {
    if (rec.language != Language::eng) {
      throw InvalidCorpus("translation expects an English corpus; record " +
                          rec.id + " has language '" +
                          std::string(to_code(rec.language)) + "'");
    }
    if (rec.parent_id != rec.id) {
      throw InvalidCorpus("translation expects original records; record " +
                          rec.id + " has parent '" + rec.parent_id + "'");
    }
  }
  for (Language target : targets) {
    if (target == Language::eng) {
      throw ConfigError("translation targets must not include eng");
    }
  }

  auto done = detail::load_checkpoint(options.checkpoint_path);

  std::vector<detail::TranslationTask> tasks;
  tasks.reserve(records.size() * targets.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    for (Language target : targets) {
      tasks.push_back({r, target});
    }
  }

  std::vector<std::string> results(tasks.size());
  std::vector<bool> fresh(tasks.size(), false);
  std::atomic<std::size_t> cursor{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  std::size_t failure_task = tasks.size();

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= tasks.size()) return;
      {
        std::scoped_lock lock(failure_mutex);
        if (failure) return;  // stop buying translations after a failure
      }
      const detail::TranslationTask& task = tasks[i];
      const PromptRecord& rec = records[task.record_index];
      const std::string code(to_code(task.target));
      if (auto it = done.find({rec.id, code}); it != done.end()) {
        results[i] = it->second;
        continue;
      }
      const auto record_failure = [&](std::exception_ptr contextual) {
        std::scoped_lock lock(failure_mutex);
        if (!failure || i < failure_task) {
          failure = std::move(contextual);
          failure_task = i;
        }
      };
      const std::string context = "record " + rec.id + ", language " + code;
      try {
        results[i] = client.translate(rec.text, code);
        fresh[i] = true;
      } catch (const TranslationUnavailable& e) {
        record_failure(std::make_exception_ptr(
            TranslationUnavailable(context + ": " + std::string(e.what()))));
        return;
      } catch (const Error& e) {
        record_failure(std::make_exception_ptr(
            Error(e.code(), context + ": " + std::string(e.what()))));
        return;
      }
    }
  };

  const int parallelism = std::max(1, options.parallelism);
  if (parallelism == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(parallelism));
    for (int w = 0; w < parallelism; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  if (failure) {
    // Persist everything finished so a rerun can resume; partial
    // corpora are never written.
    if (!options.checkpoint_path.empty()) {
      std::ofstream out(options.checkpoint_path,
                        std::ios::binary | std::ios::app);
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (!fresh[i]) continue;
        nlohmann::ordered_json j;
        j["id"] = records[tasks[i].record_index].id;
        j["language"] = std::string(to_code(tasks[i].target));
        j["text"] = results[i];
        out << j.dump() << '\n';
      }
    }
    std::rethrow_exception(failure);
  }

  std::vector<PromptRecord> out;
  out.reserve(records.size() * (targets.size() + 1));
  std::size_t task_index = 0;
  for (const PromptRecord& rec : records) {
    out.push_back(rec);
    for (Language target : targets) {
      PromptRecord translated = rec;
      translated.id = rec.id + "-" + std::string(to_code(target));
      translated.parent_id = rec.id;
      translated.language = target;
      translated.text = results[task_index++];
      out.push_back(translated);
    }
  }

  if (!options.checkpoint_path.empty()) {
    std::error_code ec;
    std::filesystem::remove(options.checkpoint_path, ec);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Split assignment: a stable hash of (seed, parent_id) mapped to [0,1)
// and bucketed by cumulative ratios, so every record of a parent group
// lands in the same split and assignment is order-independent.

struct SplitRatios {
  double train = 0.05;
  double valid = 0.05;
  double test = 0.90;
};

inline double split_unit_interval(const std::string& parent_id,
                                  std::uint64_t seed) {
  std::uint64_t state = 1469598103934665603ULL;
  char seed_bytes[8];
  for (int i = 0; i < 8; ++i) {
    seed_bytes[i] = static_cast<char>((seed >> (8 * i)) & 0xff);
  }
  state = fnv1a64(std::string_view(seed_bytes, 8), state);
  state = fnv1a64(parent_id, state);
  // Finalize before bucketing: sequential ids would otherwise cluster.
  return static_cast<double>(mix_bits(state) >> 11) / 9007199254740992.0;
}

inline void check_ratios(const SplitRatios& ratios, bool allow_zero) {
  const double sum = ratios.train + ratios.valid + ratios.test;
  if (ratios.train < 0 || ratios.valid < 0 || ratios.test < 0) {
    throw BadRatios("split ratios must be non-negative");
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "split ratios must sum to 1, got " << sum;
    throw BadRatios(msg.str());
  }
  if (!allow_zero &&
      (ratios.train == 0 || ratios.valid == 0 || ratios.test == 0)) {
    throw BadRatios("zero-sized splits are disallowed (pass allow_zero to "
                    "permit them)");
  }
}

inline Split split_for(const std::string& parent_id, const SplitRatios& ratios,
                       std::uint64_t seed) {
  const double u = split_unit_interval(parent_id, seed);
  if (u < ratios.train) return Split::train;
  if (u < ratios.train + ratios.valid) return Split::valid;
  return Split::test;
}

inline std::vector<PromptRecord> assign_splits(std::vector<PromptRecord> records,
                                               const SplitRatios& ratios,
                                               std::uint64_t seed,
                                               bool allow_zero = false) {
  check_ratios(ratios, allow_zero);
  for (PromptRecord& rec : records) {
    if (rec.parent_id.empty()) {
      throw MissingField("record " + rec.id + " has no parent_id");
    }
    rec.split = split_for(rec.parent_id, ratios, seed);
  }
  return records;
}

// ---------------------------------------------------------------------------
// Manifest + persistence.

struct BenchManifest {
  std::uint64_t total = 0;
  // key: "language|label|category|attack|split", "-" for absent parts
  std::map<std::string, std::uint64_t> counts;
  std::map<std::string, std::string> source_digests;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::string config_digest;
  std::string tool_version = kVersion;

  bool operator==(const BenchManifest&) const = default;
};

inline std::string count_key(const PromptRecord& rec) {
  std::ostringstream key;
  key << to_code(rec.language) << '|' << to_code(rec.label) << '|'
      << (rec.category ? to_code(*rec.category) : "-") << '|'
      << (rec.attack ? to_code(*rec.attack) : "-") << '|'
      << (rec.split ? to_code(*rec.split) : "-");
  return key.str();
}

inline std::map<std::string, std::uint64_t> tally_counts(
    const std::vector<PromptRecord>& records) {
  std::map<std::string, std::uint64_t> counts;
  for (const PromptRecord& rec : records) ++counts[count_key(rec)];
  return counts;
}

inline nlohmann::ordered_json manifest_to_json(const BenchManifest& manifest) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["tool_version"] = manifest.tool_version;
  j["total"] = manifest.total;
  j["counts"] = nlohmann::ordered_json::object();
  for (const auto& [key, count] : manifest.counts) j["counts"][key] = count;
  j["source_digests"] = nlohmann::ordered_json::object();
  for (const auto& [source, digest] : manifest.source_digests) {
    j["source_digests"][source] = digest;
  }
  j["config"] = manifest.config;
  j["config_digest"] = manifest.config_digest;
  return j;
}

inline BenchManifest manifest_from_json(const nlohmann::json& j) {
  BenchManifest manifest;
  manifest.tool_version = j.at("tool_version").get<std::string>();
  manifest.total = j.at("total").get<std::uint64_t>();
  for (auto it = j.at("counts").begin(); it != j.at("counts").end(); ++it) {
    manifest.counts[it.key()] = it.value().get<std::uint64_t>();
  }
  for (auto it = j.at("source_digests").begin();
       it != j.at("source_digests").end(); ++it) {
    manifest.source_digests[it.key()] = it.value().get<std::string>();
  }
  manifest.config = nlohmann::ordered_json::parse(j.at("config").dump());
  manifest.config_digest = j.at("config_digest").get<std::string>();
  return manifest;
}

inline BenchManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open manifest '" + path.string() + "'");
  }
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw MalformedLine("manifest '" + path.string() + "' is not valid JSON");
  }
  return manifest_from_json(j);
}

// Writes the corpus sorted by (parent_id, language, id) for byte-stable
// output, then re-reads and re-counts the file as an internal check.
inline BenchManifest write_corpus(
    std::vector<PromptRecord> records, const std::filesystem::path& corpus_path,
    const std::filesystem::path& manifest_path,
    const std::map<std::string, std::string>& source_digests = {},
    const nlohmann::ordered_json& config = nlohmann::ordered_json::object()) {
  std::sort(records.begin(), records.end(),
            [](const PromptRecord& a, const PromptRecord& b) {
              return std::tie(a.parent_id, a.language, a.id) <
                     std::tie(b.parent_id, b.language, b.id);
            });
  write_jsonl(corpus_path, records);

  BenchManifest manifest;
  manifest.total = records.size();
  manifest.counts = tally_counts(records);
  manifest.source_digests = source_digests;
  manifest.config = config;
  manifest.config_digest = digest_of(config.dump());

  const std::vector<PromptRecord> reread = read_jsonl(corpus_path);
  if (reread.size() != manifest.total ||
      tally_counts(reread) != manifest.counts) {
    throw ManifestMismatch("re-count of '" + corpus_path.string() +
                           "' disagrees with the manifest");
  }

  std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open manifest path '" + manifest_path.string() +
                  "' for writing");
  }
  out << manifest_to_json(manifest).dump(2) << '\n';
  if (!out) {
    throw IoError("failed while writing manifest '" + manifest_path.string() +
                  "'");
  }
  return manifest;
}

// ---------------------------------------------------------------------------
// Whole-pipeline driver used by the CLI `build` subcommand.

struct BuildOptions {
  std::filesystem::path sources_dir;
  std::filesystem::path out_dir;
  std::filesystem::path templates_dir;
  std::vector<Language> targets = sea_languages();
  std::uint64_t seed = 0;
  SplitRatios ratios;
  bool allow_zero_ratios = false;
  bool strict = true;
  int parallelism = 1;
  int shift = 3;
  int fragment_count = 3;
  std::string zulu_target = "zul";
  std::string translator_kind = "mock";  // echoed into the manifest
};

struct BuildResult {
  BenchManifest manifest;
  std::filesystem::path corpus_path;
  std::filesystem::path manifest_path;
  std::size_t skipped_lines = 0;
};

inline BuildResult run_build(const BuildOptions& options,
                             TranslationClient& translator) {
  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory '" +
                  options.out_dir.string() + "': " + ec.message());
  }

  AttackContext ctx;
  ctx.templates_dir = options.templates_dir;
  ctx.shift = options.shift;
  ctx.fragment_count = options.fragment_count;
  ctx.translator = &translator;
  ctx.rng_seed = options.seed;
  ctx.zulu_target = options.zulu_target;

  std::vector<PromptRecord> corpus;
  std::vector<PromptRecord> staged;
  std::map<std::string, std::string> source_digests;
  std::size_t skipped = 0;
  bool any_source = false;
  for (Source source : kAllSources) {
    const std::filesystem::path path =
        options.sources_dir / (std::string(to_code(source)) + ".jsonl");
    std::error_code exists_ec;
    if (!std::filesystem::exists(path, exists_ec) || exists_ec) continue;
    any_source = true;
    source_digests[std::string(to_code(source))] = digest_of_file(path);
    IngestResult ingested = ingest_source(path, source, options.strict);
    skipped += ingested.skipped_lines;
    auto& sink = default_adapter(source).staged_for_attack ? staged : corpus;
    sink.insert(sink.end(), ingested.records.begin(), ingested.records.end());
  }
  if (!any_source) {
    throw InvalidCorpus("no recognized source files in '" +
                        options.sources_dir.string() + "'");
  }

  if (!staged.empty()) {
    std::vector<AttackKind> plan(kAllAttacks.begin(), kAllAttacks.end());
    std::vector<PromptRecord> jailbreaks =
        generate_jailbreaks(std::move(staged), plan, ctx);
    corpus.insert(corpus.end(), jailbreaks.begin(), jailbreaks.end());
  }
  if (corpus.empty()) {
    throw EmptyCorpus("sources in '" + options.sources_dir.string() +
                      "' produced no records");
  }

  TranslateOptions translate_options;
  translate_options.parallelism = options.parallelism;
  translate_options.checkpoint_path =
      options.out_dir / "translate.checkpoint.jsonl";
  corpus = translate_corpus(corpus, options.targets, translator,
                            translate_options);
  corpus = assign_splits(std::move(corpus), options.ratios, options.seed,
                         options.allow_zero_ratios);

  nlohmann::ordered_json config;
  config["seed"] = options.seed;
  config["ratios"] = {options.ratios.train, options.ratios.valid,
                      options.ratios.test};
  config["languages"] = nlohmann::ordered_json::array();
  config["languages"].push_back("eng");
  for (Language target : options.targets) {
    config["languages"].push_back(std::string(to_code(target)));
  }
  config["translator"] = options.translator_kind;
  config["strict"] = options.strict;
  config["attacks"] = {{"shift", options.shift},
                       {"fragment_count", options.fragment_count},
                       {"zulu_target", options.zulu_target}};

  BuildResult result;
  result.corpus_path = options.out_dir / "corpus.jsonl";
  result.manifest_path = options.out_dir / "manifest.json";
  result.skipped_lines = skipped;
  result.manifest = write_corpus(std::move(corpus), result.corpus_path,
                                 result.manifest_path, source_digests, config);
  return result;
}

}  // namespace sealgate

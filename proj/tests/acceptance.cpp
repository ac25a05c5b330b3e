// Acceptance gate: runs the ten headline correctness criteria end to end
// and prints exactly one PASS/FAIL line per criterion. The exit code is
// the number of failed criteria, so CI can gate on it directly.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "helpers.hpp"
#include "sealgate/sealgate.hpp"

using namespace sealgate;

namespace {

// Failure collector: criteria append one message per broken expectation.
struct Checker {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& message) {
    if (!ok) failures.push_back(message);
  }
};

std::string shell_quote(const std::string& text) {
  std::string quoted = "'";
  for (char c : text) {
    quoted += (c == '\'') ? std::string("'\\''") : std::string(1, c);
  }
  quoted += "'";
  return quoted;
}

int run_command(const std::string& command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ---------------------------------------------------------------------------
// 1. The six published guard-score rows (DSR | precision | F1, in percent)
//    must be harmonically consistent: f1(dsr, precision) within 0.01 pp
//    of the printed F1.

void criterion_scores(Checker& check) {
  const std::array<std::array<double, 3>, 6> rows = {{
      {97.23, 98.90, 98.05},
      {96.5, 98.20, 97.34},
      {49.88, 77.17, 60.59},
      {89.45, 34.89, 50.20},
      {15.07, 89.51, 25.80},
      {18.48, 60.14, 28.27},
  }};
  for (const auto& [dsr_pct, precision_pct, f1_pct] : rows) {
    const double computed = f1(dsr_pct / 100.0, precision_pct / 100.0) * 100.0;
    std::ostringstream msg;
    msg << "row (" << dsr_pct << ", " << precision_pct << ", " << f1_pct
        << "): recomputed F1 " << computed << " is off by more than 0.01 pp";
    check.expect(std::abs(computed - f1_pct) <= 0.01 + 1e-12, msg.str());
  }
}

// ---------------------------------------------------------------------------
// 2. Published DSR drops: exact two-decimal percentage-point deltas plus
//    an integer display within ±1 of the prose figure.

void criterion_deltas(Checker& check) {
  struct Pair {
    double baseline, comparison, drop_pp;
    std::vector<int> prose;  // accepted integer citations
  };
  const std::vector<Pair> pairs = {
      {0.5878, 0.4963, 9.15, {9}},
      {0.5974, 0.2940, 30.34, {30, 31}},
      {0.5878, 0.4102, 17.76, {18}},
      {0.5974, 0.2191, 37.83, {38}},
  };
  for (const Pair& pair : pairs) {
    const DsrDelta delta =
        make_dsr_delta("backend", pair.baseline, pair.comparison);
    std::ostringstream label;
    label << "(" << pair.baseline << " -> " << pair.comparison << ")";
    check.expect(std::abs(delta.drop_pp - pair.drop_pp) < 1e-9,
                 label.str() + ": drop_pp " + std::to_string(delta.drop_pp) +
                     " != " + std::to_string(pair.drop_pp));
    check.expect(!delta.display.empty() && delta.display.back() == '%',
                 label.str() + ": display '" + delta.display +
                     "' is not an integer percent");
    const int shown = std::atoi(delta.display.c_str());
    const bool near_prose =
        std::any_of(pair.prose.begin(), pair.prose.end(),
                    [&](int p) { return std::abs(shown - p) <= 1; });
    check.expect(near_prose, label.str() + ": display '" + delta.display +
                                 "' not within 1 of the prose figure");
  }
}

// ---------------------------------------------------------------------------
// 3. evaluate() must agree exactly with a brute-force tally oracle on 100
//    randomized corpora of up to 1,000 records.

class NeedleClassifier : public Classifier {
 public:
  Verdict classify(const std::string& prompt) const override {
    Verdict v;
    v.backend_name = name();
    v.decision = prompt.find("needleword") != std::string::npos
                     ? SafetyLabel::unsafe
                     : SafetyLabel::safe;
    return v;
  }
  std::string name() const override { return "needle"; }
};

void criterion_oracle(Checker& check) {
  std::mt19937_64 rng(1203);
  std::uniform_int_distribution<int> coin(0, 1);
  const NeedleClassifier classifier;

  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<std::size_t> size_dist(1, 1000);
    const std::size_t size = size_dist(rng);
    std::vector<PromptRecord> records;
    records.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
      PromptRecord rec;
      rec.id = "t" + std::to_string(trial) + "-r" + std::to_string(i);
      rec.parent_id = rec.id;
      rec.text = testutil::random_unicode_string(rng, 1, 30);
      if (coin(rng)) rec.text += " needleword";
      rec.label = coin(rng) ? SafetyLabel::unsafe : SafetyLabel::safe;
      rec.language = kAllLanguages[rng() % kAllLanguages.size()];
      rec.source = kAllSources[rng() % kAllSources.size()];
      if (rec.label == SafetyLabel::unsafe && coin(rng)) {
        rec.category = kAllCategories[rng() % kAllCategories.size()];
      }
      if (rec.label == SafetyLabel::unsafe && coin(rng)) {
        rec.attack = kAllAttacks[rng() % kAllAttacks.size()];
      }
      records.push_back(std::move(rec));
    }

    // Brute-force oracle tally, written independently of the library.
    ConfusionCounts overall;
    std::map<Language, ConfusionCounts> by_language;
    std::map<UnsafeCategory, std::pair<std::uint64_t, std::uint64_t>> by_cat;
    std::map<AttackKind, std::pair<std::uint64_t, std::uint64_t>> by_att;
    for (const PromptRecord& rec : records) {
      const bool predicted_unsafe =
          rec.text.find("needleword") != std::string::npos;
      const bool gold_unsafe = rec.label == SafetyLabel::unsafe;
      ConfusionCounts& lang = by_language[rec.language];
      if (gold_unsafe && predicted_unsafe) ++overall.tp, ++lang.tp;
      if (!gold_unsafe && predicted_unsafe) ++overall.fp, ++lang.fp;
      if (gold_unsafe && !predicted_unsafe) ++overall.fn, ++lang.fn;
      if (!gold_unsafe && !predicted_unsafe) ++overall.tn, ++lang.tn;
      if (gold_unsafe && rec.category) {
        predicted_unsafe ? ++by_cat[*rec.category].first
                         : ++by_cat[*rec.category].second;
      }
      if (gold_unsafe && rec.attack) {
        predicted_unsafe ? ++by_att[*rec.attack].first
                         : ++by_att[*rec.attack].second;
      }
    }

    EvaluateOptions options;
    options.workers = 1 + trial % 7;
    const EvaluationReport report = evaluate(records, classifier, options);

    EvaluationReport expected;
    expected.overall = MetricSet::from_counts(overall);
    for (const auto& [lang, counts] : by_language) {
      expected.by_language[lang] = MetricSet::from_counts(counts);
    }
    for (const auto& [cat, tally] : by_cat) {
      expected.by_category[cat] =
          DsrSlice::from_counts(tally.first, tally.second);
    }
    for (const auto& [kind, tally] : by_att) {
      expected.by_attack[kind] =
          DsrSlice::from_counts(tally.first, tally.second);
    }
    expected.backend = classifier.name();
    expected.corpus_digest = corpus_digest(records);

    if (!(report == expected)) {
      check.expect(false, "trial " + std::to_string(trial) +
                              ": report diverged from the brute-force tally");
      return;
    }
    // Metric spot check with plain arithmetic, not library formulas.
    if (overall.tp + overall.fn > 0) {
      const double plain_dsr = static_cast<double>(overall.tp) /
                               static_cast<double>(overall.tp + overall.fn);
      check.expect(report.overall.dsr_value &&
                       *report.overall.dsr_value == plain_dsr,
                   "trial " + std::to_string(trial) + ": dsr mismatch");
    }
  }
}

// ---------------------------------------------------------------------------
// 4. Cipher round trips: caesar decode∘encode identity over all 26 shifts,
//    whitespace-cipher involution, fragment reassembly.

void criterion_ciphers(Checker& check) {
  std::mt19937_64 rng(404);
  for (int shift = 0; shift < 26; ++shift) {
    for (int i = 0; i < 200; ++i) {
      const std::string text = testutil::random_unicode_string(rng, 0, 80);
      if (caesar_decode(caesar_encode(text, shift), shift) != text) {
        check.expect(false, "caesar round trip broke at shift " +
                                std::to_string(shift));
        return;
      }
    }
  }
  for (int i = 0; i < 500; ++i) {
    const std::string payload = testutil::random_unicode_string(rng, 0, 120);
    if (chameleon_decrypt(chameleon_encrypt(payload)) != payload) {
      check.expect(false, "whitespace-cipher involution broke");
      return;
    }
  }
  for (int i = 0; i < 500; ++i) {
    const std::string payload = testutil::distinctive_payload(rng);
    const int fragments = 2 + i % 3;
    const std::vector<std::string> parts =
        split_fragments(payload, fragments);
    std::string reassembled;
    for (const std::string& part : parts) reassembled += part;
    if (reassembled != payload ||
        parts.size() != static_cast<std::size_t>(fragments)) {
      check.expect(false, "fragment reassembly broke for '" + payload + "'");
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// 5. Split cohesion on 10,000 parent groups × 10 languages.

void criterion_splits(Checker& check) {
  const std::size_t parents = 10000;
  std::vector<PromptRecord> records;
  records.reserve(parents * kAllLanguages.size());
  for (std::size_t p = 0; p < parents; ++p) {
    char parent_id[16];
    std::snprintf(parent_id, sizeof(parent_id), "par-%05zu", p);
    for (Language lang : kAllLanguages) {
      PromptRecord rec;
      rec.parent_id = parent_id;
      rec.id = lang == Language::eng
                   ? std::string(parent_id)
                   : std::string(parent_id) + "-" + std::string(to_code(lang));
      rec.language = lang;
      rec.text = "synthetic text " + rec.id;
      rec.label = SafetyLabel::unsafe;
      rec.source = Source::advbench;
      records.push_back(std::move(rec));
    }
  }

  const SplitRatios ratios{0.05, 0.05, 0.90};
  const std::uint64_t seed = 97;
  const std::vector<PromptRecord> first = assign_splits(records, ratios, seed);

  std::map<std::string, std::set<Split>> splits_by_parent;
  std::map<Split, std::set<std::string>> parents_by_split;
  for (const PromptRecord& rec : first) {
    if (!rec.split) {
      check.expect(false, "record " + rec.id + " left unassigned");
      return;
    }
    splits_by_parent[rec.parent_id].insert(*rec.split);
    parents_by_split[*rec.split].insert(rec.parent_id);
  }
  std::size_t spanning = 0;
  for (const auto& [parent, splits] : splits_by_parent) {
    if (splits.size() > 1) ++spanning;
  }
  check.expect(spanning == 0, std::to_string(spanning) +
                                  " parent groups span more than one split");

  const auto fraction = [&](Split split) {
    return static_cast<double>(parents_by_split[split].size()) /
           static_cast<double>(parents);
  };
  const auto near = [&](Split split, double target) {
    const double got = fraction(split);
    std::ostringstream msg;
    msg << to_code(split) << " fraction " << got << " not within 0.01 of "
        << target;
    check.expect(std::abs(got - target) <= 0.01, msg.str());
  };
  near(Split::train, ratios.train);
  near(Split::valid, ratios.valid);
  near(Split::test, ratios.test);

  const std::vector<PromptRecord> second = assign_splits(records, ratios, seed);
  bool identical = first.size() == second.size();
  for (std::size_t i = 0; identical && i < first.size(); ++i) {
    identical = first[i].split == second[i].split;
  }
  check.expect(identical, "same-seed reruns diverged");
}

// ---------------------------------------------------------------------------
// 6. Translation expands the staged mini corpus exactly 10× with equal
//    per-language counts and per-parent invariants.

void criterion_expansion(Checker& check) {
  std::vector<PromptRecord> originals;
  std::vector<PromptRecord> staged;
  for (Source source : kAllSources) {
    const auto path = testutil::fixtures_dir() / "mini-seals" /
                      (std::string(to_code(source)) + ".jsonl");
    IngestResult result = ingest_source(path, source);
    for (PromptRecord& rec : result.records) {
      (default_adapter(source).staged_for_attack ? staged : originals)
          .push_back(std::move(rec));
    }
  }
  AttackContext ctx;
  ctx.templates_dir = testutil::templates_dir();
  MockTranslationClient mock;
  ctx.translator = &mock;
  ctx.rng_seed = 0;
  std::vector<AttackKind> plan(kAllAttacks.begin(), kAllAttacks.end());
  for (PromptRecord& rec : generate_jailbreaks(std::move(staged), plan, ctx)) {
    originals.push_back(std::move(rec));
  }

  const std::vector<PromptRecord> expanded =
      translate_corpus(originals, sea_languages(), mock);
  check.expect(expanded.size() == originals.size() * 10,
               "expected a 10x expansion, got " +
                   std::to_string(expanded.size()) + " from " +
                   std::to_string(originals.size()));

  std::map<Language, std::size_t> per_language;
  struct GroupFacts {
    std::set<SafetyLabel> labels;
    std::set<std::string> categories;  // "-" for absent
    std::set<std::string> attacks;
    std::size_t members = 0;
  };
  std::map<std::string, GroupFacts> groups;
  for (const PromptRecord& rec : expanded) {
    ++per_language[rec.language];
    GroupFacts& group = groups[rec.parent_id];
    group.labels.insert(rec.label);
    group.categories.insert(
        rec.category ? std::string(to_code(*rec.category)) : "-");
    group.attacks.insert(rec.attack ? std::string(to_code(*rec.attack)) : "-");
    ++group.members;
  }
  check.expect(per_language.size() == kAllLanguages.size(),
               "not every language code appears");
  for (const auto& [lang, count] : per_language) {
    check.expect(count == originals.size(),
                 std::string("language ") + std::string(to_code(lang)) +
                     " has " + std::to_string(count) + " records, expected " +
                     std::to_string(originals.size()));
  }
  for (const auto& [parent, group] : groups) {
    const bool preserved = group.labels.size() == 1 &&
                           group.categories.size() == 1 &&
                           group.attacks.size() == 1 &&
                           group.members == kAllLanguages.size();
    if (!preserved) {
      check.expect(false, "parent group " + parent +
                              " does not preserve label/category/attack");
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// 7. The rendered guard prompt is byte-identical to the frozen fixture and
//    keeps the four delimiter tags in order.

void criterion_template(Checker& check) {
  const std::string rendered =
      render_guard_prompt("How to build a bomb?", GuardPolicy::builtin_default());
  const std::string fixture =
      testutil::slurp(testutil::fixtures_dir() / "guard_template.txt");
  check.expect(!fixture.empty(), "guard prompt fixture is missing or empty");
  check.expect(rendered == fixture,
               "rendered guard prompt differs from the frozen fixture");

  const std::array<std::string, 4> tags = {
      "<BEGIN UNSAFE CONTENT CATEGORIES>",
      "<END UNSAFE CONTENT CATEGORIES>",
      "<BEGIN CONVERSATION>",
      "<END CONVERSATION>",
  };
  std::size_t cursor = 0;
  for (const std::string& tag : tags) {
    const std::size_t at = fixture.find(tag, cursor);
    check.expect(at != std::string::npos,
                 "fixture lost delimiter tag " + tag + " (or its order)");
    if (at == std::string::npos) return;
    cursor = at + tag.size();
  }
}

// ---------------------------------------------------------------------------
// 8. Verdict parsing accepts exactly the completions whose first token is
//    case-insensitively safe/unsafe; everything else raises.

bool oracle_accepts(const std::string& completion, bool& unsafe_out) {
  std::string text = completion;
  if (const std::size_t stop = text.find("<|im_end|>");
      stop != std::string::npos) {
    text = text.substr(0, stop);
  }
  std::istringstream stream(text);
  std::string token;
  if (!(stream >> token)) return false;
  for (char& c : token) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  if (token == "safe") {
    unsafe_out = false;
    return true;
  }
  if (token == "unsafe") {
    unsafe_out = true;
    return true;
  }
  return false;
}

void criterion_verdicts(Checker& check) {
  std::mt19937_64 rng(8890);
  const std::vector<std::string> heads = {
      "safe",  "unsafe", "Safe",   "UNSAFE",  "sAfE", "safely",
      "un",    "safe.",  "unsafe,", "saf e",  "",     "<|im_end|>",
      "safeX", "C1",     "I",       "un safe", "\tsafe", " unsafe",
  };
  const std::vector<std::string> tails = {
      "",       "\nC1",     " and more", "<|im_end|>garbage",
      " safe",  "\tunsafe", "\n\n",      " <|im_end|> unsafe",
  };
  std::size_t accepted = 0;
  for (int i = 0; i < 500; ++i) {
    std::string completion;
    if (i % 3 == 0) {
      completion = testutil::random_unicode_string(rng, 0, 24);
    } else {
      completion = heads[rng() % heads.size()] + tails[rng() % tails.size()];
    }
    bool oracle_unsafe = false;
    const bool oracle_ok = oracle_accepts(completion, oracle_unsafe);
    try {
      const SafetyLabel label = parse_verdict(completion);
      if (!oracle_ok) {
        check.expect(false, "parser accepted a completion the oracle "
                            "rejects: '" + completion + "'");
        return;
      }
      const bool parsed_unsafe = label == SafetyLabel::unsafe;
      if (parsed_unsafe != oracle_unsafe) {
        check.expect(false, "parser label disagrees on '" + completion + "'");
        return;
      }
      ++accepted;
    } catch (const UnparseableVerdict&) {
      if (oracle_ok) {
        check.expect(false, "parser rejected a completion the oracle "
                            "accepts: '" + completion + "'");
        return;
      }
    }
  }
  check.expect(accepted > 0 && accepted < 500,
               "fuzz set was one-sided (" + std::to_string(accepted) +
                   "/500 accepted)");
}

// ---------------------------------------------------------------------------
// 9. Gateway zero-leak and fail-closed, plus audit integrity under
//    concurrency.

void criterion_gateway(Checker& check) {
  // (a) unsafe verdicts must leak zero bytes upstream.
  {
    testutil::RecordingUpstream upstream;
    GatewayConfig config;
    config.listen_port = 0;
    config.upstream.port = upstream.start();
    GatewayServer gateway(config,
                          std::make_shared<testutil::ScriptedClassifier>(
                              std::vector<std::string>{"unsafe-marker"}));
    if (!gateway.start()) {
      check.expect(false, "gateway failed to start");
      return;
    }
    httplib::Client client("127.0.0.1", gateway.port());
    client.set_connection_timeout(std::chrono::seconds(5));
    client.set_read_timeout(std::chrono::seconds(5));
    std::mt19937_64 rng(3377);
    std::size_t expected_upstream = 0;
    for (int i = 0; i < 50; ++i) {
      const bool unsafe = i % 2 == 0;
      nlohmann::json body;
      body["messages"] = nlohmann::json::array(
          {{{"role", "user"},
            {"content", testutil::random_unicode_string(rng, 1, 32) +
                            (unsafe ? " unsafe-marker" : "")}}});
      const auto res =
          client.Post("/v1/chat", body.dump(), "application/json");
      if (!res) {
        check.expect(false, "gateway stopped answering");
        return;
      }
      if (unsafe) {
        check.expect(res->status == 403, "unsafe request was not blocked");
      } else {
        check.expect(res->status == 200, "safe request was not forwarded");
        ++expected_upstream;
      }
      if (upstream.request_count() != expected_upstream) {
        check.expect(false, "upstream byte leak detected on request " +
                                std::to_string(i));
        return;
      }
    }
    gateway.stop();
  }

  // (b) every backend error under fail_closed returns a block.
  {
    testutil::RecordingUpstream upstream;
    GatewayConfig config;
    config.listen_port = 0;
    config.upstream.port = upstream.start();
    config.fail_mode = FailMode::fail_closed;
    GatewayServer gateway(config,
                          std::make_shared<testutil::FailingClassifier>());
    if (!gateway.start()) {
      check.expect(false, "fail-closed gateway failed to start");
      return;
    }
    httplib::Client client("127.0.0.1", gateway.port());
    client.set_connection_timeout(std::chrono::seconds(5));
    client.set_read_timeout(std::chrono::seconds(5));
    for (int i = 0; i < 20; ++i) {
      const auto res = client.Post(
          "/v1/chat",
          R"({"messages": [{"role": "user", "content": "anything"}]})",
          "application/json");
      if (!res || res->status != 403) {
        check.expect(false, "backend error was not blocked (request " +
                                std::to_string(i) + ")");
        return;
      }
    }
    check.expect(upstream.request_count() == 0,
                 "fail-closed gateway leaked to the upstream");
    check.expect(gateway.errors_total() == 20 && gateway.blocked_total() == 20,
                 "fail-closed counters are off");
    gateway.stop();
  }

  // (c) 100 concurrent requests, 100 unique uncorrupted audit lines.
  {
    testutil::TempDir dir;
    GatewayConfig config;
    config.listen_port = 0;
    config.audit_log = dir / "audit.jsonl";
    GatewayServer gateway(config,
                          std::make_shared<testutil::ScriptedClassifier>(
                              std::vector<std::string>{"odd"}));
    if (!gateway.start()) {
      check.expect(false, "audited gateway failed to start");
      return;
    }
    constexpr int kThreads = 10;
    constexpr int kPerThread = 10;
    std::atomic<int> bad_responses{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < kThreads; ++t) {
      pool.emplace_back([&, t] {
        httplib::Client client("127.0.0.1", gateway.port());
        client.set_connection_timeout(std::chrono::seconds(5));
        client.set_read_timeout(std::chrono::seconds(5));
        for (int i = 0; i < kPerThread; ++i) {
          nlohmann::json body;
          body["prompt"] = "worker " + std::to_string(t) + " request " +
                           std::to_string(i) + (i % 2 ? " odd" : " even");
          const auto res =
              client.Post("/v1/guard", body.dump(), "application/json");
          if (!res || res->status != 200) bad_responses.fetch_add(1);
        }
      });
    }
    for (std::thread& t : pool) t.join();
    gateway.stop();
    check.expect(bad_responses.load() == 0, "some concurrent requests failed");

    std::ifstream in(config.audit_log, std::ios::binary);
    std::string line;
    std::set<std::string> ids;
    std::size_t lines = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      ++lines;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("request_id") ||
          !j.contains("decision") || !j.contains("prompt_digest")) {
        check.expect(false, "corrupted audit line: " + line);
        return;
      }
      ids.insert(j["request_id"].get<std::string>());
    }
    check.expect(lines == kThreads * kPerThread,
                 "expected 100 audit lines, got " + std::to_string(lines));
    check.expect(ids.size() == kThreads * kPerThread,
                 "audit request ids are not unique");
  }
}

// ---------------------------------------------------------------------------
// 10. The CLI pipeline (build → eval → report) is byte-deterministic
//     across reruns with the same seed.

void criterion_pipeline(Checker& check) {
  testutil::TempDir dir;
  const std::string cli = shell_quote(SEALGATE_CLI_PATH);
  const std::string sources =
      shell_quote((testutil::fixtures_dir() / "mini-seals").string());
  const std::string templates =
      shell_quote(std::filesystem::path(SEALGATE_TEMPLATES_DIR).string());
  const std::string lexicon = shell_quote(
      (testutil::fixtures_dir() / "lexicon_multilingual.json").string());

  for (const std::string run : {"a", "b"}) {
    const auto out = dir / ("run-" + run);
    int rc = run_command(cli + " --seed 11 build --sources " + sources +
                         " --out " + shell_quote(out.string()) +
                         " --templates " + templates + " >/dev/null 2>&1");
    if (rc != 0) {
      check.expect(false, "build exited with " + std::to_string(rc));
      return;
    }
    rc = run_command(cli + " eval --corpus " +
                     shell_quote((out / "corpus.jsonl").string()) +
                     " --lexicon " + lexicon + " --out " +
                     shell_quote((out / "report.json").string()) +
                     " >/dev/null 2>&1");
    if (rc != 0) {
      check.expect(false, "eval exited with " + std::to_string(rc));
      return;
    }
    rc = run_command(cli + " report --in " +
                     shell_quote((out / "report.json").string()) +
                     " --format markdown --out " +
                     shell_quote((out / "report.md").string()) +
                     " >/dev/null 2>&1");
    if (rc != 0) {
      check.expect(false, "report exited with " + std::to_string(rc));
      return;
    }
  }

  for (const char* name :
       {"corpus.jsonl", "manifest.json", "report.json", "report.md"}) {
    const std::string a = testutil::slurp(dir / ("run-a/" + std::string(name)));
    const std::string b = testutil::slurp(dir / ("run-b/" + std::string(name)));
    check.expect(!a.empty(), std::string(name) + " is empty");
    check.expect(a == b, std::string(name) + " differs between reruns");
  }
}

// ---------------------------------------------------------------------------

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<void(Checker&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"published score rows are harmonically consistent", 1.0,
       criterion_scores},
      {"published DSR drops and integer displays reproduce", 1.0,
       criterion_deltas},
      {"evaluate matches a brute-force oracle on 100 corpora", 10.0,
       criterion_oracle},
      {"cipher round trips are exact", 5.0, criterion_ciphers},
      {"splits are parent-cohesive with target fractions", 10.0,
       criterion_splits},
      {"translation expands the mini corpus 10x with invariants", 5.0,
       criterion_expansion},
      {"guard prompt is byte-identical to the frozen fixture", 1.0,
       criterion_template},
      {"verdict parser accepts exactly safe/unsafe first tokens", 1.0,
       criterion_verdicts},
      {"gateway leaks nothing, fails closed, audits 100 concurrent", 30.0,
       criterion_gateway},
      {"CLI build-eval-report pipeline is byte-deterministic", 30.0,
       criterion_pipeline},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const Criterion& criterion = criteria[i];
    Checker check;
    const auto start = std::chrono::steady_clock::now();
    try {
      criterion.body(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("unexpected exception: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (elapsed > criterion.budget_seconds) {
      std::ostringstream msg;
      msg << "runtime " << elapsed << " s exceeded the "
          << criterion.budget_seconds << " s budget";
      check.failures.push_back(msg.str());
    }
    const bool ok = check.failures.empty();
    if (!ok) ++failed;
    std::printf("%s  %2zu/10  %-58s (%.2f s < %.0f s)\n", ok ? "PASS" : "FAIL",
                i + 1, criterion.name, elapsed, criterion.budget_seconds);
    if (!ok) {
      for (const std::string& failure : check.failures) {
        std::printf("            - %s\n", failure.c_str());
      }
    }
  }
  std::printf("%d/10 criteria passed\n",
              static_cast<int>(criteria.size()) - failed);
  return failed;
}

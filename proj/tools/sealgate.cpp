// sealgate — command-line front end for the guardrail toolkit.
//
// Subcommands: build, attack, classify, eval, report, serve.
// Exit codes: 0 success, 1 operational failure, 2 usage error.
// Every failure prints one machine-parsable line to stderr:
//   sealgate: error: <code>: <message>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "sealgate/sealgate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3 };

LogLevel g_log_level = LogLevel::info;

void log_line(LogLevel level, const std::string& message) {
  if (level < g_log_level) return;
  static const char* names[] = {"debug", "info", "warn", "error"};
  std::cerr << "sealgate: " << names[static_cast<int>(level)] << ": "
            << message << '\n';
}

LogLevel parse_log_level(const std::string& name) {
  if (name == "debug") return LogLevel::debug;
  if (name == "info") return LogLevel::info;
  if (name == "warn") return LogLevel::warn;
  if (name == "error") return LogLevel::error;
  throw CLI::ValidationError("--log-level",
                             "expected debug, info, warn or error");
}

// Shared backend selection flags for classify/eval.
struct BackendFlags {
  std::string backend = "keyword";
  std::string lexicon;
  std::string policy;
  std::string backend_config;  // JSON file holding the full backend object

  void attach(CLI::App* app) {
    app->add_option("--backend", backend,
                    "Classifier backend: keyword, generation or moderation")
        ->check(CLI::IsMember({"keyword", "generation", "moderation"}));
    app->add_option("--lexicon", lexicon,
                    "Lexicon JSON for the keyword backend");
    app->add_option("--policy", policy,
                    "Guard policy JSON for the generation backend");
    app->add_option("--backend-config", backend_config,
                    "JSON file with the full backend config object "
                    "(overrides the flags above)");
  }

  std::unique_ptr<sealgate::Classifier> build() const {
    sealgate::BackendConfig config;
    if (!backend_config.empty()) {
      std::ifstream in(backend_config, std::ios::binary);
      if (!in) {
        throw sealgate::IoError("cannot open backend config '" +
                                backend_config + "'");
      }
      nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
      if (j.is_discarded()) {
        throw sealgate::ConfigError("backend config '" + backend_config +
                                    "' is not valid JSON");
      }
      config = sealgate::backend_config_from_json(j, "backend.");
    } else {
      config.kind = backend;
      config.lexicon_path = lexicon;
      config.policy_path = policy;
    }
    return sealgate::make_classifier(config);
  }
};

sealgate::SplitRatios parse_ratios_option(const std::string& text) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string part;
  while (std::getline(stream, part, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--ratios",
                                 "'" + part + "' is not a number");
    }
  }
  if (values.size() != 3) {
    throw CLI::ValidationError(
        "--ratios", "expected exactly three comma-separated fractions "
                    "(train,valid,test), got " +
                        std::to_string(values.size()));
  }
  return {values[0], values[1], values[2]};
}

std::vector<sealgate::Language> parse_languages_option(const std::string& text) {
  if (text == "all") return sealgate::sea_languages();
  std::vector<sealgate::Language> out;
  std::stringstream stream(text);
  std::string part;
  while (std::getline(stream, part, ',')) {
    if (part.empty()) continue;
    const auto lang = sealgate::try_language(part);
    if (!lang) {
      throw CLI::ValidationError("--languages",
                                 "unknown language code '" + part + "'");
    }
    if (*lang == sealgate::Language::eng) continue;  // always included
    out.push_back(*lang);
  }
  if (out.empty()) {
    throw CLI::ValidationError("--languages",
                               "need at least one non-English code or 'all'");
  }
  return out;
}

void write_or_print(const std::string& payload, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << payload;
    if (!payload.empty() && payload.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw sealgate::IoError("cannot open '" + out_path + "' for writing");
  }
  out << payload;
  if (!out) {
    throw sealgate::IoError("failed while writing '" + out_path + "'");
  }
}

std::string iso_timestamp_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

std::atomic<bool> g_stop_requested{false};

void handle_signal(int) { g_stop_requested.store(true); }

// ---------------------------------------------------------------------------

struct BuildCmd {
  std::string sources;
  std::string out;
  std::string templates = "templates";
  std::string languages = "all";
  std::string ratios = "0.05,0.05,0.90";
  std::string translator = "mock";
  std::string zulu_target = "zul";
  bool strict = true;
  bool allow_zero_ratios = false;
  int shift = 3;
  int fragments = 3;
  int jobs = 1;
  std::string http_host = "127.0.0.1";
  int http_port = 8090;
  std::string http_path = "/translate";

  int run(std::uint64_t seed) const {
    sealgate::BuildOptions options;
    options.sources_dir = sources;
    options.out_dir = out;
    options.templates_dir = templates;
    options.targets = parse_languages_option(languages);
    options.seed = seed;
    options.ratios = parse_ratios_option(ratios);
    options.allow_zero_ratios = allow_zero_ratios;
    options.strict = strict;
    options.parallelism = jobs;
    options.shift = shift;
    options.fragment_count = fragments;
    options.zulu_target = zulu_target;
    options.translator_kind = translator;

    std::unique_ptr<sealgate::TranslationClient> client;
    if (translator == "mock") {
      client = std::make_unique<sealgate::MockTranslationClient>();
    } else if (translator == "http") {
      sealgate::HttpTranslationConfig http;
      http.host = http_host;
      http.port = http_port;
      http.path = http_path;
      client = std::make_unique<sealgate::HttpTranslationClient>(http);
    } else {
      throw sealgate::ConfigError("unknown translator '" + translator +
                                  "' (expected mock or http)");
    }

    const sealgate::BuildResult result = sealgate::run_build(options, *client);
    log_line(LogLevel::info,
             "built " + std::to_string(result.manifest.total) + " records → " +
                 result.corpus_path.string());
    if (result.skipped_lines > 0) {
      log_line(LogLevel::warn, "skipped " +
                                   std::to_string(result.skipped_lines) +
                                   " malformed source lines (lenient mode)");
    }
    std::cout << result.corpus_path.string() << '\n'
              << result.manifest_path.string() << '\n';
    return kExitOk;
  }
};

struct AttackCmd {
  std::string kind;
  std::string text;
  std::string templates = "templates";
  std::string zulu_target = "zul";
  int shift = 3;
  int fragments = 3;
  bool wrap = false;
  bool decode = false;

  int run(std::uint64_t seed) const {
    const auto kind_value = sealgate::try_attack(kind);
    if (!kind_value) {
      throw sealgate::UnknownAttack("unknown attack kind '" + kind + "'");
    }
    if (decode) {
      if (*kind_value == sealgate::AttackKind::caesar) {
        std::cout << sealgate::caesar_decode(text, shift) << '\n';
        return kExitOk;
      }
      if (*kind_value == sealgate::AttackKind::code_chameleon) {
        std::cout << sealgate::chameleon_decrypt(text) << '\n';
        return kExitOk;
      }
      throw sealgate::UnknownAttack("--decode supports caesar and "
                                    "code_chameleon only");
    }

    sealgate::MockTranslationClient mock;
    sealgate::AttackContext ctx;
    ctx.templates_dir = templates;
    ctx.shift = shift;
    ctx.fragment_count = fragments;
    ctx.translator = &mock;
    ctx.rng_seed = seed;
    ctx.zulu_target = zulu_target;

    // caesar/zulu print the bare transformed payload unless --wrap is
    // given; the other kinds only exist as full prompts.
    if (!wrap && *kind_value == sealgate::AttackKind::caesar) {
      std::cout << sealgate::caesar_encode(text, shift) << '\n';
      return kExitOk;
    }
    if (!wrap && *kind_value == sealgate::AttackKind::zulu) {
      std::cout << mock.translate(text, ctx.zulu_target) << '\n';
      return kExitOk;
    }
    std::cout << sealgate::apply_attack(*kind_value, text, ctx).text << '\n';
    return kExitOk;
  }
};

struct ClassifyCmd {
  BackendFlags backend;
  std::string text;

  int run() const {
    const auto classifier = backend.build();
    const sealgate::Verdict verdict = classifier->classify(text);
    nlohmann::ordered_json j;
    j["decision"] = std::string(sealgate::to_code(verdict.decision));
    j["backend"] = verdict.backend_name;
    j["latency_ms"] = verdict.latency.count();
    if (!verdict.raw_evidence.empty()) j["evidence"] = verdict.raw_evidence;
    std::cout << j.dump() << '\n';
    return kExitOk;
  }
};

struct EvalCmd {
  BackendFlags backend;
  std::string corpus;
  std::string split = "all";
  std::string axes = "language,category,attack";
  std::string errors = "strict";
  std::string out;
  std::string format = "json";
  int jobs = 1;
  bool stamp = false;

  int run() const {
    std::vector<sealgate::PromptRecord> records =
        sealgate::read_jsonl(corpus);
    if (split != "all") {
      const sealgate::Split wanted = sealgate::parse_split(split);
      std::erase_if(records, [wanted](const sealgate::PromptRecord& rec) {
        return !rec.split || *rec.split != wanted;
      });
    }

    sealgate::EvaluateOptions options;
    options.by_language = axes.find("language") != std::string::npos;
    options.by_category = axes.find("category") != std::string::npos;
    options.by_attack = axes.find("attack") != std::string::npos;
    options.errors = errors == "lenient" ? sealgate::ErrorPolicy::lenient
                                         : sealgate::ErrorPolicy::strict;
    options.workers = jobs;
    if (stamp) options.timestamp = iso_timestamp_now();

    const auto classifier = backend.build();
    const sealgate::EvaluationReport report =
        sealgate::evaluate(records, *classifier, options);

    std::string payload;
    switch (sealgate::parse_report_format(format)) {
      case sealgate::ReportFormat::json:
        payload = sealgate::report_to_json(report).dump(2) + "\n";
        break;
      case sealgate::ReportFormat::csv:
        payload = sealgate::report_to_csv(report);
        break;
      case sealgate::ReportFormat::markdown:
        payload = sealgate::report_to_markdown(report);
        break;
    }
    write_or_print(payload, out);
    return kExitOk;
  }
};

struct ReportCmd {
  std::string in;
  std::vector<std::string> compare;
  std::vector<std::string> delta;
  std::string format = "markdown";
  std::string out;

  int run() const {
    const sealgate::ReportFormat fmt = sealgate::parse_report_format(format);
    if (!delta.empty()) {
      const sealgate::EvaluationReport baseline =
          sealgate::load_report(delta[0]);
      const sealgate::EvaluationReport comparison =
          sealgate::load_report(delta[1]);
      const sealgate::DsrDelta d = sealgate::delta_report(baseline, comparison);
      if (fmt == sealgate::ReportFormat::json) {
        nlohmann::ordered_json j;
        j["backend"] = d.backend;
        j["baseline_dsr"] = d.baseline_dsr;
        j["comparison_dsr"] = d.comparison_dsr;
        j["drop_pp"] = d.drop_pp;
        j["display"] = d.display;
        write_or_print(j.dump(2) + "\n", out);
      } else {
        write_or_print(sealgate::deltas_to_markdown({d}), out);
      }
      return kExitOk;
    }
    if (!compare.empty()) {
      std::vector<sealgate::EvaluationReport> reports;
      reports.reserve(compare.size());
      for (const std::string& path : compare) {
        reports.push_back(sealgate::load_report(path));
      }
      if (fmt == sealgate::ReportFormat::json) {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& report : reports) {
          j.push_back(sealgate::report_to_json(report));
        }
        write_or_print(j.dump(2) + "\n", out);
      } else {
        write_or_print(sealgate::comparison_to_markdown(reports), out);
      }
      return kExitOk;
    }
    const sealgate::EvaluationReport report = sealgate::load_report(in);
    std::string payload;
    switch (fmt) {
      case sealgate::ReportFormat::json:
        payload = sealgate::report_to_json(report).dump(2) + "\n";
        break;
      case sealgate::ReportFormat::csv:
        payload = sealgate::report_to_csv(report);
        break;
      case sealgate::ReportFormat::markdown:
        payload = sealgate::report_to_markdown(report);
        break;
    }
    write_or_print(payload, out);
    return kExitOk;
  }
};

struct ServeCmd {
  std::string config;

  int run() const {
    const sealgate::GatewayConfig gateway_config =
        sealgate::load_gateway_config(config);
    std::shared_ptr<sealgate::Classifier> classifier =
        sealgate::make_classifier(gateway_config.backend);
    sealgate::GatewayServer server(gateway_config, classifier);
    if (!server.start()) {
      throw sealgate::ConfigError("cannot bind " + gateway_config.listen_host +
                                  ":" +
                                  std::to_string(gateway_config.listen_port));
    }
    std::cout << "listening on " << gateway_config.listen_host << ":"
              << server.port() << std::endl;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    while (!g_stop_requested.load()) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    log_line(LogLevel::info, "shutting down");
    server.stop();
    return kExitOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilingual guardrail gateway and benchmark toolkit"};
  app.set_version_flag("--version", sealgate::kVersion);
  app.require_subcommand(1);

  std::string log_level = "info";
  std::uint64_t seed = 0;
  std::string global_config;
  app.add_option("--log-level", log_level, "debug, info, warn or error")
      ->capture_default_str();
  app.add_option("--seed", seed, "Seed for all stochastic choices")
      ->capture_default_str();
  app.add_option("--config", global_config,
                 "Gateway config path (used by serve)");

  BuildCmd build;
  CLI::App* build_app =
      app.add_subcommand("build", "Build a benchmark corpus from sources");
  build_app->add_option("--sources", build.sources,
                        "Directory of <source>.jsonl files")
      ->required();
  build_app->add_option("--out", build.out, "Output directory")->required();
  build_app->add_option("--templates", build.templates,
                        "Attack template directory")
      ->capture_default_str();
  build_app->add_option("--languages", build.languages,
                        "'all' or comma-separated target codes")
      ->capture_default_str();
  build_app->add_option("--ratios", build.ratios,
                        "train,valid,test fractions")
      ->capture_default_str();
  build_app->add_option("--translator", build.translator, "mock or http")
      ->check(CLI::IsMember({"mock", "http"}))
      ->capture_default_str();
  build_app->add_flag("--strict,!--lenient", build.strict,
                      "Abort on malformed source lines (default strict)");
  build_app->add_flag("--allow-zero-ratios", build.allow_zero_ratios,
                      "Permit empty splits");
  build_app->add_option("--shift", build.shift, "Caesar shift")
      ->capture_default_str();
  build_app->add_option("--fragments", build.fragments,
                        "dual_use fragment count")
      ->capture_default_str();
  build_app->add_option("--zulu-target", build.zulu_target,
                        "Target code for the zulu attack")
      ->capture_default_str();
  build_app->add_option("--jobs", build.jobs, "Translation parallelism")
      ->capture_default_str();
  build_app->add_option("--http-host", build.http_host,
                        "HTTP translator host");
  build_app->add_option("--http-port", build.http_port,
                        "HTTP translator port");
  build_app->add_option("--http-path", build.http_path,
                        "HTTP translator path");

  AttackCmd attack;
  CLI::App* attack_app =
      app.add_subcommand("attack", "Apply one jailbreak transformation");
  attack_app->add_option("--kind", attack.kind, "Attack kind")->required();
  attack_app->add_option("--text", attack.text, "Payload text")->required();
  attack_app->add_option("--templates", attack.templates,
                         "Attack template directory")
      ->capture_default_str();
  attack_app->add_option("--shift", attack.shift, "Caesar shift")
      ->capture_default_str();
  attack_app->add_option("--fragments", attack.fragments,
                         "dual_use fragment count")
      ->capture_default_str();
  attack_app->add_option("--zulu-target", attack.zulu_target,
                         "Target code for the zulu attack")
      ->capture_default_str();
  attack_app->add_flag("--wrap", attack.wrap,
                       "Emit the full attack prompt for caesar/zulu");
  attack_app->add_flag("--decode", attack.decode,
                       "Invert the transform (caesar, code_chameleon)");

  ClassifyCmd classify;
  CLI::App* classify_app =
      app.add_subcommand("classify", "Classify a single prompt");
  classify.backend.attach(classify_app);
  classify_app->add_option("--text", classify.text, "Prompt text")->required();

  EvalCmd eval;
  CLI::App* eval_app =
      app.add_subcommand("eval", "Evaluate a backend over a corpus");
  eval.backend.attach(eval_app);
  eval_app->add_option("--corpus", eval.corpus, "Corpus JSONL path")
      ->required();
  eval_app->add_option("--split", eval.split, "train, valid, test or all")
      ->check(CLI::IsMember({"train", "valid", "test", "all"}))
      ->capture_default_str();
  eval_app->add_option("--axes", eval.axes,
                       "Comma-set of language,category,attack")
      ->capture_default_str();
  eval_app->add_option("--errors", eval.errors, "strict or lenient")
      ->check(CLI::IsMember({"strict", "lenient"}))
      ->capture_default_str();
  eval_app->add_option("--out", eval.out, "Report path ('-' for stdout)");
  eval_app->add_option("--format", eval.format, "json, csv or markdown")
      ->capture_default_str();
  eval_app->add_option("--jobs", eval.jobs, "Worker threads")
      ->capture_default_str();
  eval_app->add_flag("--stamp", eval.stamp,
                     "Record the wall-clock time in the report");

  ReportCmd report;
  CLI::App* report_app =
      app.add_subcommand("report", "Render or combine stored reports");
  report_app->add_option("--in", report.in, "Report JSON path");
  report_app->add_option("--compare", report.compare,
                         "Two or more reports for a side-by-side table")
      ->expected(2, -1);
  report_app->add_option("--delta", report.delta,
                         "Baseline and comparison report for a drop table")
      ->expected(2);
  report_app->add_option("--format", report.format, "json, csv or markdown")
      ->capture_default_str();
  report_app->add_option("--out", report.out, "Output path ('-' for stdout)");

  ServeCmd serve;
  CLI::App* serve_app = app.add_subcommand("serve", "Run the gateway");
  serve_app->add_option("--config", serve.config, "Gateway config path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "sealgate: error: usage: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    g_log_level = parse_log_level(log_level);
  } catch (const CLI::ParseError& e) {
    std::cerr << "sealgate: error: usage: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (build_app->parsed()) return build.run(seed);
    if (attack_app->parsed()) return attack.run(seed);
    if (classify_app->parsed()) return classify.run();
    if (eval_app->parsed()) return eval.run();
    if (report_app->parsed()) {
      if (report.in.empty() && report.compare.empty() && report.delta.empty()) {
        std::cerr << "sealgate: error: usage: report needs --in, --compare "
                     "or --delta\n";
        return kExitUsage;
      }
      return report.run();
    }
    if (serve_app->parsed()) {
      if (serve.config.empty()) serve.config = global_config;
      if (serve.config.empty()) {
        std::cerr << "sealgate: error: usage: serve needs --config\n";
        return kExitUsage;
      }
      return serve.run();
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "sealgate: error: usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const sealgate::Error& e) {
    std::cerr << "sealgate: error: " << e.code() << ": " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "sealgate: error: internal: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

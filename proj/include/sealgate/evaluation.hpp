#pragma once

// Metrics and evaluation driver. The positive class is `unsafe`:
//   dsr       = tp / (tp + fn)   fraction of unsafe prompts blocked
//   precision = tp / (tp + fp)   fraction of blocks that were justified
//   f1        = harmonic mean of the two
// Undefined denominators surface as explicit absent values (JSON null),
// never as silent zeros — a zero corrupts downstream deltas.

#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "sealgate/classifiers.hpp"
#include "sealgate/digest.hpp"
#include "sealgate/domain.hpp"
#include "sealgate/errors.hpp"
#include "sealgate/jsonl.hpp"

namespace sealgate {

// ---------------------------------------------------------------------------
// Scalar metrics.

inline double dsr(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0) {
    throw UndefinedMetric("dsr undefined: no unsafe prompts (tp+fn = 0)");
  }
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

inline double precision(const ConfusionCounts& c) {
  if (c.tp + c.fp == 0) {
    throw UndefinedMetric("precision undefined: nothing was flagged "
                          "(tp+fp = 0)");
  }
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

inline double f1(double dsr_value, double precision_value) {
  if (dsr_value + precision_value <= 0.0) {
    throw UndefinedMetric("f1 undefined: dsr and precision are both zero");
  }
  return 2.0 * precision_value * dsr_value / (precision_value + dsr_value);
}

// Interpretation: overall agreement (tp+tn)/total. Not part of the core
// metric trio; reported alongside it for convenience.
inline double accuracy(const ConfusionCounts& c) {
  if (c.total() == 0) {
    throw UndefinedMetric("accuracy undefined: empty counts");
  }
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

// Round half away from zero at `decimals` places; used only for display
// fields, raw fractions are never rounded.
inline double round_half_up(double value, int decimals) {
  double scale = 1.0;
  for (int i = 0; i < decimals; ++i) scale *= 10.0;
  const double magnitude = std::floor(std::abs(value) * scale + 0.5) / scale;
  return value < 0 ? -magnitude : magnitude;
}

inline double to_percent(double fraction) {
  return round_half_up(fraction * 100.0, 2);
}

// ---------------------------------------------------------------------------
// MetricSet / DsrSlice.

struct MetricSet {
  ConfusionCounts counts;
  std::optional<double> dsr_value;
  std::optional<double> precision_value;
  std::optional<double> f1_value;
  std::optional<double> accuracy_value;

  static MetricSet from_counts(const ConfusionCounts& c) {
    MetricSet m;
    m.counts = c;
    if (c.tp + c.fn > 0) m.dsr_value = dsr(c);
    if (c.tp + c.fp > 0) m.precision_value = precision(c);
    if (m.dsr_value && m.precision_value &&
        *m.dsr_value + *m.precision_value > 0.0) {
      m.f1_value = f1(*m.dsr_value, *m.precision_value);
    }
    if (c.total() > 0) m.accuracy_value = accuracy(c);
    return m;
  }

  bool operator==(const MetricSet&) const = default;
};

// Single-class slice: category and attack breakdowns only ever see
// unsafe gold labels, so DSR is the only well-defined metric there.
struct DsrSlice {
  std::uint64_t tp = 0;
  std::uint64_t fn = 0;
  std::optional<double> dsr_value;

  static DsrSlice from_counts(std::uint64_t tp_, std::uint64_t fn_) {
    DsrSlice s;
    s.tp = tp_;
    s.fn = fn_;
    if (tp_ + fn_ > 0) {
      s.dsr_value = static_cast<double>(tp_) / static_cast<double>(tp_ + fn_);
    }
    return s;
  }

  bool operator==(const DsrSlice&) const = default;
};

struct EvaluationReport {
  MetricSet overall;
  std::map<Language, MetricSet> by_language;
  std::map<UnsafeCategory, DsrSlice> by_category;
  std::map<AttackKind, DsrSlice> by_attack;
  std::string backend;
  std::string corpus_digest;
  std::string timestamp;        // empty unless explicitly stamped
  std::uint64_t error_count = 0;  // lenient-mode backend failures

  bool operator==(const EvaluationReport&) const = default;
};

// ---------------------------------------------------------------------------
// Evaluation driver.

enum class ErrorPolicy : std::uint8_t { strict, lenient };

struct EvaluateOptions {
  bool by_language = true;
  bool by_category = true;
  bool by_attack = true;
  ErrorPolicy errors = ErrorPolicy::strict;
  int workers = 1;
  std::string timestamp;  // copied into the report verbatim
};

inline std::string corpus_digest(const std::vector<PromptRecord>& records) {
  std::uint64_t state = 1469598103934665603ULL;
  for (const PromptRecord& rec : records) {
    state = fnv1a64(record_to_line(rec), state);
    state = fnv1a64("\n", state);
  }
  return std::string("fnv64:") + to_hex(state);
}

namespace detail {

struct PartialTally {
  ConfusionCounts overall;
  std::map<Language, ConfusionCounts> by_language;
  std::map<UnsafeCategory, std::pair<std::uint64_t, std::uint64_t>> by_category;
  std::map<AttackKind, std::pair<std::uint64_t, std::uint64_t>> by_attack;
  std::uint64_t errors = 0;
  std::exception_ptr failure;

  void merge(const PartialTally& other) {
    overall += other.overall;
    for (const auto& [lang, counts] : other.by_language) {
      by_language[lang] += counts;
    }
    for (const auto& [cat, tally] : other.by_category) {
      by_category[cat].first += tally.first;
      by_category[cat].second += tally.second;
    }
    for (const auto& [kind, tally] : other.by_attack) {
      by_attack[kind].first += tally.first;
      by_attack[kind].second += tally.second;
    }
    errors += other.errors;
  }
};

inline void tally_record(PartialTally& tally, const PromptRecord& rec,
                         SafetyLabel predicted, const EvaluateOptions& options) {
  tally.overall = confusion_update(tally.overall, rec.label, predicted);
  if (options.by_language) {
    auto& counts = tally.by_language[rec.language];
    counts = confusion_update(counts, rec.label, predicted);
  }
  if (rec.label == SafetyLabel::unsafe) {
    const bool hit = predicted == SafetyLabel::unsafe;
    if (options.by_category && rec.category) {
      auto& [tp, fn] = tally.by_category[*rec.category];
      hit ? ++tp : ++fn;
    }
    if (options.by_attack && rec.attack) {
      auto& [tp, fn] = tally.by_attack[*rec.attack];
      hit ? ++tp : ++fn;
    }
  }
}

inline void evaluate_chunk(const std::vector<PromptRecord>& records,
                           std::size_t begin, std::size_t end,
                           const Classifier& classifier,
                           const EvaluateOptions& options,
                           PartialTally& tally) {
  for (std::size_t i = begin; i < end; ++i) {
    const PromptRecord& rec = records[i];
    SafetyLabel predicted;
    try {
      predicted = classifier.classify(rec.text).decision;
    } catch (...) {
      if (options.errors == ErrorPolicy::strict) {
        tally.failure = std::current_exception();
        return;
      }
      ++tally.errors;
      continue;
    }
    tally_record(tally, rec, predicted, options);
  }
}

}  // namespace detail

// Runs one classify call per record and aggregates confusion counts
// overall and per axis. With workers > 1 the corpus is cut into
// contiguous chunks evaluated concurrently; partial tallies merge in
// chunk order, so the report is independent of scheduling.
inline EvaluationReport evaluate(const std::vector<PromptRecord>& records,
                                 const Classifier& classifier,
                                 const EvaluateOptions& options = {}) {
  if (records.empty()) {
    throw EmptyCorpus("cannot evaluate an empty corpus");
  }
  const int workers =
      std::max(1, std::min<int>(options.workers,
                                static_cast<int>(records.size())));
  std::vector<detail::PartialTally> tallies(static_cast<std::size_t>(workers));
  if (workers == 1) {
    detail::evaluate_chunk(records, 0, records.size(), classifier, options,
                           tallies[0]);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const std::size_t chunk =
        (records.size() + static_cast<std::size_t>(workers) - 1) /
        static_cast<std::size_t>(workers);
    for (int w = 0; w < workers; ++w) {
      const std::size_t begin = static_cast<std::size_t>(w) * chunk;
      const std::size_t end = std::min(records.size(), begin + chunk);
      pool.emplace_back([&, begin, end, w] {
        detail::evaluate_chunk(records, begin, end, classifier, options,
                               tallies[static_cast<std::size_t>(w)]);
      });
    }
    for (std::thread& t : pool) t.join();
  }

  detail::PartialTally merged;
  for (const detail::PartialTally& tally : tallies) {
    if (tally.failure) std::rethrow_exception(tally.failure);
    merged.merge(tally);
  }

  EvaluationReport report;
  report.overall = MetricSet::from_counts(merged.overall);
  for (const auto& [lang, counts] : merged.by_language) {
    report.by_language[lang] = MetricSet::from_counts(counts);
  }
  for (const auto& [cat, tally] : merged.by_category) {
    report.by_category[cat] = DsrSlice::from_counts(tally.first, tally.second);
  }
  for (const auto& [kind, tally] : merged.by_attack) {
    report.by_attack[kind] = DsrSlice::from_counts(tally.first, tally.second);
  }
  report.backend = classifier.name();
  report.corpus_digest = corpus_digest(records);
  report.timestamp = options.timestamp;
  report.error_count = merged.errors;
  return report;
}

// ---------------------------------------------------------------------------
// English-vs-multilingual drop table.

struct DsrDelta {
  std::string backend;
  double baseline_dsr = 0.0;    // fraction
  double comparison_dsr = 0.0;  // fraction
  double drop_pp = 0.0;         // percentage points, 2-decimal rounding
  std::string display;          // integer prose form, e.g. "9%"

  bool operator==(const DsrDelta&) const = default;
};

inline DsrDelta make_dsr_delta(const std::string& backend, double baseline,
                               double comparison) {
  DsrDelta delta;
  delta.backend = backend;
  delta.baseline_dsr = baseline;
  delta.comparison_dsr = comparison;
  delta.drop_pp = round_half_up((baseline - comparison) * 100.0, 2);
  const double whole = round_half_up((baseline - comparison) * 100.0, 0);
  std::ostringstream display;
  display << static_cast<long long>(whole) << '%';
  delta.display = display.str();
  return delta;
}

inline DsrDelta delta_report(const EvaluationReport& baseline,
                             const EvaluationReport& comparison) {
  if (baseline.backend != comparison.backend) {
    throw BackendMismatch("cannot diff reports from different backends: '" +
                          baseline.backend + "' vs '" + comparison.backend +
                          "'");
  }
  if (!baseline.overall.dsr_value || !comparison.overall.dsr_value) {
    throw UndefinedMetric("delta report needs a defined dsr on both sides");
  }
  return make_dsr_delta(baseline.backend, *baseline.overall.dsr_value,
                        *comparison.overall.dsr_value);
}

// ---------------------------------------------------------------------------
// Serialization. Raw fractions are stored at full precision; *_pct
// fields are 2-decimal display conveniences and are ignored on read.

namespace detail {

inline nlohmann::ordered_json metric_json(const std::optional<double>& value) {
  if (!value) return nullptr;
  return *value;
}

inline nlohmann::ordered_json pct_json(const std::optional<double>& value) {
  if (!value) return nullptr;
  return to_percent(*value);
}

inline nlohmann::ordered_json metricset_to_json(const MetricSet& m) {
  nlohmann::ordered_json j;
  j["counts"] = {{"tp", m.counts.tp},
                 {"fp", m.counts.fp},
                 {"fn", m.counts.fn},
                 {"tn", m.counts.tn}};
  j["dsr"] = metric_json(m.dsr_value);
  j["precision"] = metric_json(m.precision_value);
  j["f1"] = metric_json(m.f1_value);
  j["accuracy"] = metric_json(m.accuracy_value);
  j["dsr_pct"] = pct_json(m.dsr_value);
  j["precision_pct"] = pct_json(m.precision_value);
  j["f1_pct"] = pct_json(m.f1_value);
  j["accuracy_pct"] = pct_json(m.accuracy_value);
  return j;
}

inline std::optional<double> metric_from_json(const nlohmann::json& j,
                                              const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

inline MetricSet metricset_from_json(const nlohmann::json& j) {
  MetricSet m;
  const auto& counts = j.at("counts");
  m.counts.tp = counts.at("tp").get<std::uint64_t>();
  m.counts.fp = counts.at("fp").get<std::uint64_t>();
  m.counts.fn = counts.at("fn").get<std::uint64_t>();
  m.counts.tn = counts.at("tn").get<std::uint64_t>();
  m.dsr_value = metric_from_json(j, "dsr");
  m.precision_value = metric_from_json(j, "precision");
  m.f1_value = metric_from_json(j, "f1");
  m.accuracy_value = metric_from_json(j, "accuracy");
  return m;
}

inline nlohmann::ordered_json slice_to_json(const DsrSlice& s) {
  nlohmann::ordered_json j;
  j["tp"] = s.tp;
  j["fn"] = s.fn;
  j["dsr"] = metric_json(s.dsr_value);
  j["dsr_pct"] = pct_json(s.dsr_value);
  return j;
}

inline DsrSlice slice_from_json(const nlohmann::json& j) {
  DsrSlice s;
  s.tp = j.at("tp").get<std::uint64_t>();
  s.fn = j.at("fn").get<std::uint64_t>();
  s.dsr_value = metric_from_json(j, "dsr");
  return s;
}

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["backend"] = report.backend;
  j["corpus_digest"] = report.corpus_digest;
  j["timestamp"] = report.timestamp;
  j["errors"] = report.error_count;
  j["overall"] = detail::metricset_to_json(report.overall);
  j["by_language"] = nlohmann::ordered_json::object();
  for (const auto& [lang, metrics] : report.by_language) {
    j["by_language"][std::string(to_code(lang))] =
        detail::metricset_to_json(metrics);
  }
  j["by_category"] = nlohmann::ordered_json::object();
  for (const auto& [cat, slice] : report.by_category) {
    j["by_category"][std::string(to_code(cat))] = detail::slice_to_json(slice);
  }
  j["by_attack"] = nlohmann::ordered_json::object();
  for (const auto& [kind, slice] : report.by_attack) {
    j["by_attack"][std::string(to_code(kind))] = detail::slice_to_json(slice);
  }
  return j;
}

inline EvaluationReport report_from_json(const nlohmann::json& j) {
  EvaluationReport report;
  report.backend = j.at("backend").get<std::string>();
  report.corpus_digest = j.at("corpus_digest").get<std::string>();
  report.timestamp = j.at("timestamp").get<std::string>();
  report.error_count = j.at("errors").get<std::uint64_t>();
  report.overall = detail::metricset_from_json(j.at("overall"));
  for (auto it = j.at("by_language").begin(); it != j.at("by_language").end();
       ++it) {
    report.by_language[parse_language(it.key())] =
        detail::metricset_from_json(it.value());
  }
  for (auto it = j.at("by_category").begin(); it != j.at("by_category").end();
       ++it) {
    report.by_category[parse_category(it.key())] =
        detail::slice_from_json(it.value());
  }
  for (auto it = j.at("by_attack").begin(); it != j.at("by_attack").end();
       ++it) {
    report.by_attack[parse_attack(it.key())] =
        detail::slice_from_json(it.value());
  }
  return report;
}

inline EvaluationReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open report '" + path.string() + "'");
  }
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw MalformedLine("report '" + path.string() + "' is not valid JSON");
  }
  return report_from_json(j);
}

// ---------------------------------------------------------------------------
// Text renderings.

namespace detail {

inline std::string pct_cell(const std::optional<double>& value) {
  if (!value) return "undefined";
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(2);
  out << to_percent(*value);
  return out.str();
}

inline std::string csv_cell(const std::optional<double>& value) {
  if (!value) return "";
  std::ostringstream out;
  out.precision(17);
  out << *value;
  return out.str();
}

}  // namespace detail

inline std::string report_to_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "axis,key,tp,fp,fn,tn,dsr,precision,f1,accuracy\n";
  const auto row = [&out](const std::string& axis, const std::string& key,
                          const MetricSet& m) {
    out << axis << ',' << key << ',' << m.counts.tp << ',' << m.counts.fp
        << ',' << m.counts.fn << ',' << m.counts.tn << ','
        << detail::csv_cell(m.dsr_value) << ','
        << detail::csv_cell(m.precision_value) << ','
        << detail::csv_cell(m.f1_value) << ','
        << detail::csv_cell(m.accuracy_value) << '\n';
  };
  row("overall", "overall", report.overall);
  for (const auto& [lang, metrics] : report.by_language) {
    row("language", std::string(to_code(lang)), metrics);
  }
  for (const auto& [cat, slice] : report.by_category) {
    out << "category," << to_code(cat) << ',' << slice.tp << ",," << slice.fn
        << ",," << detail::csv_cell(slice.dsr_value) << ",,,\n";
  }
  for (const auto& [kind, slice] : report.by_attack) {
    out << "attack," << to_code(kind) << ',' << slice.tp << ",," << slice.fn
        << ",," << detail::csv_cell(slice.dsr_value) << ",,,\n";
  }
  return out.str();
}

inline std::string report_to_markdown(const EvaluationReport& report) {
  std::ostringstream out;
  out << "# Evaluation report\n\n";
  out << "- backend: `" << report.backend << "`\n";
  out << "- corpus digest: `" << report.corpus_digest << "`\n";
  if (!report.timestamp.empty()) {
    out << "- timestamp: " << report.timestamp << "\n";
  }
  if (report.error_count > 0) {
    out << "- backend errors (excluded from metrics): " << report.error_count
        << "\n";
  }
  out << "\n## Overall\n\n";
  out << "| DSR | Precision | F1 |\n|---:|---:|---:|\n";
  out << "| " << detail::pct_cell(report.overall.dsr_value) << " | "
      << detail::pct_cell(report.overall.precision_value) << " | "
      << detail::pct_cell(report.overall.f1_value) << " |\n";
  out << "\n## By language\n\n";
  out << "| Language | DSR | Precision | F1 |\n|---|---:|---:|---:|\n";
  for (const auto& [lang, metrics] : report.by_language) {
    out << "| " << to_code(lang) << " | " << detail::pct_cell(metrics.dsr_value)
        << " | " << detail::pct_cell(metrics.precision_value) << " | "
        << detail::pct_cell(metrics.f1_value) << " |\n";
  }
  out << "\n## By category\n\n";
  out << "| Category | DSR |\n|---|---:|\n";
  for (const auto& [cat, slice] : report.by_category) {
    out << "| " << to_code(cat) << " | " << detail::pct_cell(slice.dsr_value)
        << " |\n";
  }
  out << "\n## By attack\n\n";
  out << "| Attack | DSR |\n|---|---:|\n";
  for (const auto& [kind, slice] : report.by_attack) {
    out << "| " << to_code(kind) << " | " << detail::pct_cell(slice.dsr_value)
        << " |\n";
  }
  return out.str();
}

// Renders several reports side by side, one row per backend with the
// three headline columns.
inline std::string comparison_to_markdown(
    const std::vector<EvaluationReport>& reports) {
  std::ostringstream out;
  out << "| Backend | DSR | Precision | F1 |\n|---|---:|---:|---:|\n";
  for (const EvaluationReport& report : reports) {
    out << "| " << report.backend << " | "
        << detail::pct_cell(report.overall.dsr_value) << " | "
        << detail::pct_cell(report.overall.precision_value) << " | "
        << detail::pct_cell(report.overall.f1_value) << " |\n";
  }
  return out.str();
}

inline std::string deltas_to_markdown(const std::vector<DsrDelta>& deltas) {
  std::ostringstream out;
  out << "| Backend | Baseline DSR | Comparison DSR | Drop (pp) | Drop |\n"
      << "|---|---:|---:|---:|---:|\n";
  out.setf(std::ios::fixed);
  out.precision(2);
  for (const DsrDelta& delta : deltas) {
    out << "| " << delta.backend << " | " << to_percent(delta.baseline_dsr)
        << " | " << to_percent(delta.comparison_dsr) << " | " << delta.drop_pp
        << " | " << delta.display << " |\n";
  }
  return out.str();
}

enum class ReportFormat : std::uint8_t { json, csv, markdown };

inline ReportFormat parse_report_format(std::string_view name) {
  const std::string n = detail::ascii_lower(name);
  if (n == "json") return ReportFormat::json;
  if (n == "csv") return ReportFormat::csv;
  if (n == "markdown" || n == "md") return ReportFormat::markdown;
  throw ConfigError("unknown report format '" + std::string(name) +
                    "' (expected json, csv or markdown)");
}

inline void emit_report(const EvaluationReport& report, ReportFormat format,
                        const std::filesystem::path& path) {
  std::string payload;
  switch (format) {
    case ReportFormat::json:
      payload = report_to_json(report).dump(2) + "\n";
      break;
    case ReportFormat::csv:
      payload = report_to_csv(report);
      break;
    case ReportFormat::markdown:
      payload = report_to_markdown(report);
      break;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open report path '" + path.string() +
                  "' for writing");
  }
  out << payload;
  if (!out) {
    throw IoError("failed while writing report '" + path.string() + "'");
  }
}

}  // namespace sealgate

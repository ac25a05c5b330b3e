#pragma once

// JSON Lines serialization for PromptRecord. Field order is fixed so that
// the same corpus always serializes to identical bytes:
//   id, parent_id, text, language, label, category, attack, source, split
// Absent optionals are written as JSON null.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sealgate/domain.hpp"
#include "sealgate/errors.hpp"

namespace sealgate {

inline nlohmann::ordered_json record_to_json(const PromptRecord& rec) {
  nlohmann::ordered_json j;
  j["id"] = rec.id;
  j["parent_id"] = rec.parent_id;
  j["text"] = rec.text;
  j["language"] = std::string(to_code(rec.language));
  j["label"] = std::string(to_code(rec.label));
  if (rec.category) {
    j["category"] = std::string(to_code(*rec.category));
  } else {
    j["category"] = nullptr;
  }
  if (rec.attack) {
    j["attack"] = std::string(to_code(*rec.attack));
  } else {
    j["attack"] = nullptr;
  }
  j["source"] = std::string(to_code(rec.source));
  if (rec.split) {
    j["split"] = std::string(to_code(*rec.split));
  } else {
    j["split"] = nullptr;
  }
  return j;
}

inline std::string record_to_line(const PromptRecord& rec) {
  return record_to_json(rec).dump();
}

// Parses one JSON object into a PromptRecord, funneling every field
// through validate_record so both ingestion paths share one rule set.
inline PromptRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw MalformedLine("record is not a JSON object");
  }
  FieldMap raw;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& value = it.value();
    if (value.is_null()) continue;  // null == absent
    if (value.is_string()) {
      raw[it.key()] = value.get<std::string>();
    } else {
      std::ostringstream msg;
      msg << "field '" << it.key() << "' must be a string or null, got "
          << value.type_name();
      throw MalformedLine(msg.str());
    }
  }
  return validate_record(raw);
}

inline PromptRecord record_from_line(const std::string& line,
                                     std::size_t line_number = 0) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded()) {
    std::ostringstream msg;
    msg << "line " << line_number << " is not valid JSON";
    throw MalformedLine(msg.str());
  }
  try {
    return record_from_json(j);
  } catch (const MalformedLine& e) {
    std::ostringstream msg;
    msg << "line " << line_number << ": " << e.what();
    throw MalformedLine(msg.str());
  }
}

inline std::vector<PromptRecord> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  std::vector<PromptRecord> records;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    records.push_back(record_from_line(line, line_number));
  }
  return records;
}

inline void write_jsonl(const std::filesystem::path& path,
                        const std::vector<PromptRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  for (const PromptRecord& rec : records) {
    out << record_to_line(rec) << '\n';
  }
  if (!out) {
    throw IoError("failed while writing '" + path.string() + "'");
  }
}

}  // namespace sealgate

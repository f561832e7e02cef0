#include "steer/pipeline/dataset.hpp"

#include <cstdio>

#include "steer/error.hpp"
#include "steer/util/file_io.hpp"
#include "steer/util/utf8.hpp"

namespace steer::pipeline {

using nlohmann::json;

std::string escape_separator(std::string text) {
  std::size_t pos = 0;
  while ((pos = text.find(kSeparator)) != std::string::npos) text.insert(pos + 4, " ");
  return text;
}

void Dataset::add(DatasetRecord record) {
  const bool synthetic = kind_ == DatasetKind::kSynthetic;
  if (record.meta.has_value() != synthetic) {
    raise(ErrorCode::kInvalidArgument,
          "record " + record.id + (synthetic ? " lacks generation metadata"
                                             : " carries generation metadata in a real dataset"));
  }
  if (!index_.emplace(record.id, records_.size()).second) {
    raise(ErrorCode::kInvalidArgument, "duplicate id " + record.id);
  }
  records_.push_back(std::move(record));
}

const DatasetRecord* Dataset::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &records_[it->second];
}

std::vector<std::string> Dataset::texts() const {
  std::vector<std::string> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.text);
  return out;
}

std::vector<std::string> Dataset::labels() const {
  std::vector<std::string> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.label.value_or(""));
  return out;
}

json record_to_json(const DatasetRecord& record) {
  json j;
  j["id"] = record.id;
  j["text"] = record.text;
  if (record.label) j["label"] = *record.label;
  if (record.meta) {
    const auto& m = *record.meta;
    j["meta"] = {{"gamma", m.gamma},
                 {"eta", m.eta},
                 {"sampler", m.sampler},
                 {"seed", m.seed},
                 {"negative_prompt_ids", m.negative_prompt_ids},
                 {"pool_snapshot", m.pool_snapshot},
                 {"quality", m.quality}};
  }
  return j;
}

std::string Dataset::to_jsonl() const {
  std::string out;
  for (const auto& r : records_) {
    out += record_to_json(r).dump();
    out.push_back('\n');
  }
  return out;
}

DatasetFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".jsonl" ? DatasetFormat::kJsonl : DatasetFormat::kLines;
}

std::string padded_id(std::size_t index, std::string_view prefix) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu", index);
  return std::string(prefix) + buf;
}

namespace {

RecordMeta parse_meta(const json& j) {
  RecordMeta m;
  m.gamma = j.at("gamma").get<double>();
  m.eta = j.at("eta").get<double>();
  m.sampler = j.at("sampler").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.negative_prompt_ids = j.at("negative_prompt_ids").get<std::vector<std::string>>();
  m.pool_snapshot = j.value("pool_snapshot", std::size_t{0});
  m.quality = j.value("quality", std::string("ok"));
  return m;
}

}  // namespace

Dataset parse_dataset(std::string_view content, DatasetFormat format,
                      const std::string& source_name) {
  std::vector<DatasetRecord> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (util::trim(line).empty()) continue;

    DatasetRecord record;
    if (format == DatasetFormat::kLines) {
      record.text = std::string(line);
    } else {
      auto fail = [&](const std::string& why) {
        raise(ErrorCode::kMalformedRecord,
              source_name + " line " + std::to_string(line_no) + ": " + why);
      };
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception&) {
        fail("invalid JSON");
      }
      if (!j.is_object()) fail("record is not an object");
      if (!j.contains("text") || !j["text"].is_string()) fail("missing string field \"text\"");
      record.text = j["text"].get<std::string>();
      if (j.contains("label") && !j["label"].is_null()) {
        if (!j["label"].is_string()) fail("\"label\" must be a string");
        record.label = j["label"].get<std::string>();
      }
      if (j.contains("id")) {
        if (!j["id"].is_string()) fail("\"id\" must be a string");
        record.id = j["id"].get<std::string>();
      }
      if (j.contains("meta")) {
        try {
          record.meta = parse_meta(j["meta"]);
        } catch (const json::exception&) {
          fail("malformed \"meta\"");
        }
      }
    }
    // Text read from disk may carry CRLF inside JSON strings too.
    std::string normalised;
    normalised.reserve(record.text.size());
    for (std::size_t i = 0; i < record.text.size(); ++i) {
      if (record.text[i] == '\r' && i + 1 < record.text.size() && record.text[i + 1] == '\n') {
        continue;
      }
      normalised.push_back(record.text[i]);
    }
    record.text = escape_separator(std::move(normalised));
    if (record.id.empty()) record.id = padded_id(records.size());
    records.push_back(std::move(record));
  }

  bool any_meta = false;
  bool all_meta = !records.empty();
  for (const auto& r : records) {
    any_meta |= r.meta.has_value();
    all_meta &= r.meta.has_value();
  }
  if (any_meta && !all_meta) {
    raise(ErrorCode::kMalformedRecord, source_name + ": mixes real and synthetic records");
  }
  Dataset dataset(all_meta ? DatasetKind::kSynthetic : DatasetKind::kReal);
  for (auto& r : records) {
    try {
      dataset.add(std::move(r));
    } catch (const Error& e) {
      raise(ErrorCode::kMalformedRecord, source_name + ": " + e.what());
    }
  }
  return dataset;
}

Dataset ingest_dataset(const std::filesystem::path& path, DatasetFormat format) {
  return parse_dataset(util::read_file(path), format, path.string());
}

}  // namespace steer::pipeline

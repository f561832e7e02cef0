#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace steer::pipeline {

/// Joins negative-prompt examples; never stored inside a record's text.
inline constexpr std::string_view kSeparator = "\n###\n";

/// Rewrites every occurrence of the separator ("\n###\n" -> "\n### \n") until
/// none remain.
std::string escape_separator(std::string text);

struct RecordMeta {
  double gamma = 0.0;
  double eta = 0.0;
  std::string sampler;
  std::uint64_t seed = 0;  // sampling seed actually used
  std::vector<std::string> negative_prompt_ids;
  std::size_t pool_snapshot = 0;  // synthetic records visible to the negative pool
  std::string quality = "ok";
};

struct DatasetRecord {
  std::string id;
  std::string text;
  std::optional<std::string> label;
  std::optional<RecordMeta> meta;  // present exactly on synthetic records
};

enum class DatasetKind { kReal, kSynthetic };

class Dataset {
 public:
  explicit Dataset(DatasetKind kind = DatasetKind::kReal) : kind_(kind) {}

  DatasetKind kind() const { return kind_; }
  const std::vector<DatasetRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  /// Throws InvalidArgument on a duplicate id or a record whose meta does not
  /// match the dataset kind.
  void add(DatasetRecord record);

  const DatasetRecord* find(std::string_view id) const;
  std::vector<std::string> texts() const;
  std::vector<std::string> labels() const;  // empty string when unlabeled

  /// One JSON object per line.
  std::string to_jsonl() const;

 private:
  DatasetKind kind_;
  std::vector<DatasetRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

nlohmann::json record_to_json(const DatasetRecord& record);

enum class DatasetFormat { kLines, kJsonl };

/// `.jsonl` selects JSONL, anything else plain lines.
DatasetFormat format_for(const std::filesystem::path& path);

/// Lines: one example per non-blank line. JSONL: objects with "text" and
/// optional "label" (plus "id"/"meta" when reading a saved dataset). CRLF is
/// normalised; ids default to zero-padded record indices; texts have the
/// separator escaped. Throws IoError, MalformedRecord (naming the line).
Dataset ingest_dataset(const std::filesystem::path& path, DatasetFormat format);
Dataset parse_dataset(std::string_view content, DatasetFormat format,
                      const std::string& source_name = "<memory>");

std::string padded_id(std::size_t index, std::string_view prefix = "");

}  // namespace steer::pipeline

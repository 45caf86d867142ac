#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ldpnb/errors.hpp"
#include "ldpnb/random.hpp"

namespace ldpnb {

enum class ColumnKind { kCategorical, kContinuous };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::kCategorical;
  // Categorical: category strings in first-seen order; value i maps to
  // categories[i - 1]. Continuous: [min, max] as fitted from a training split.
  std::vector<std::string> categories;
  double min = 0.0;
  double max = 0.0;

  int cardinality() const { return static_cast<int>(categories.size()); }
};

struct DatasetSchema {
  std::string name;
  std::vector<Column> features;
  std::vector<std::string> classes;  // class value j maps to classes[j - 1]

  int class_count() const { return static_cast<int>(classes.size()); }
  std::size_t feature_count() const { return features.size(); }

  bool all_categorical() const {
    for (const auto& c : features)
      if (c.kind != ColumnKind::kCategorical) return false;
    return true;
  }
  bool all_continuous() const {
    for (const auto& c : features)
      if (c.kind != ColumnKind::kContinuous) return false;
    return true;
  }
};

// One individual's row. Categorical cells hold the 1-based category index
// (0 marks a category unseen at training time); continuous cells hold the
// raw or normalized value. label is the 1-based class index.
struct Record {
  std::vector<double> x;
  int label = 0;

  int category(std::size_t i) const { return static_cast<int>(x[i]); }
};

struct CsvOptions {
  char delimiter = ',';
  bool has_header = false;
  // Index of the class column, or -1 for the last column.
  int class_column = -1;
  std::string missing_marker = "?";
  // Optional per-column kind overrides, keyed by column index (class column
  // entries are ignored; the class is always categorical). Columns without an
  // override are continuous when every value parses as a number.
  std::unordered_map<int, ColumnKind> kind_overrides;
};

struct LoadResult {
  DatasetSchema schema;
  std::vector<Record> records;
  std::size_t dropped_missing = 0;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> cells;
  if (delimiter == ' ') {
    // Whitespace-delimited files often pad with runs of spaces.
    std::string cur;
    for (char ch : line) {
      if (ch == ' ' || ch == '\t') {
        if (!cur.empty()) cells.push_back(std::move(cur)), cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    if (!cur.empty()) cells.push_back(std::move(cur));
    return cells;
  }
  std::string cur;
  for (char ch : line) {
    if (ch == delimiter) {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

inline std::string trim(std::string s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

}  // namespace detail

// Reads a delimited text file into records plus a fitted schema. Categories
// are indexed 1-based in first-seen order. Rows containing the missing
// marker are dropped and counted.
inline LoadResult load_csv(const std::string& path, const CsvOptions& options = {},
                           const std::string& dataset_name = "") {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dropped = 0;
  std::size_t width = 0;

  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string> cells = detail::split_line(line, options.delimiter);
    for (auto& c : cells) c = detail::trim(c);
    if (cells.empty() || (cells.size() == 1 && cells[0].empty())) continue;  // blank line

    if (line_no == 1 && options.has_header) {
      header = std::move(cells);
      width = header.size();
      continue;
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw ParseError("row has " + std::to_string(cells.size()) + " fields, expected " + std::to_string(width), line_no);
    }
    bool missing = false;
    for (const auto& c : cells) {
      if (c == options.missing_marker) {
        missing = true;
        break;
      }
    }
    if (missing) {
      ++dropped;
      continue;
    }
    rows.push_back(std::move(cells));
  }
  if (width < 2) throw ParseError("need at least one feature column and one class column", line_no);
  if (rows.empty()) throw EmptyInputError("dataset has no usable rows: " + path);

  const int class_col = options.class_column < 0 ? static_cast<int>(width) - 1 : options.class_column;
  if (class_col < 0 || class_col >= static_cast<int>(width)) {
    throw ConfigError("class column index out of range");
  }

  LoadResult out;
  out.schema.name = dataset_name.empty() ? path : dataset_name;
  out.dropped_missing = dropped;

  std::vector<int> feature_cols;
  for (int c = 0; c < static_cast<int>(width); ++c)
    if (c != class_col) feature_cols.push_back(c);

  // Column kinds: override wins, otherwise continuous iff every cell parses.
  std::vector<ColumnKind> kinds(width, ColumnKind::kCategorical);
  for (int c : feature_cols) {
    auto it = options.kind_overrides.find(c);
    if (it != options.kind_overrides.end()) {
      kinds[static_cast<std::size_t>(c)] = it->second;
      continue;
    }
    bool numeric = true;
    for (const auto& row : rows) {
      if (!detail::parse_double(row[static_cast<std::size_t>(c)])) {
        numeric = false;
        break;
      }
    }
    kinds[static_cast<std::size_t>(c)] = numeric ? ColumnKind::kContinuous : ColumnKind::kCategorical;
  }

  out.schema.features.resize(feature_cols.size());
  std::vector<std::unordered_map<std::string, int>> maps(feature_cols.size());
  std::unordered_map<std::string, int> class_map;

  for (std::size_t f = 0; f < feature_cols.size(); ++f) {
    const int c = feature_cols[f];
    Column& col = out.schema.features[f];
    col.name = !header.empty() ? header[static_cast<std::size_t>(c)] : "col" + std::to_string(c);
    col.kind = kinds[static_cast<std::size_t>(c)];
  }

  out.records.reserve(rows.size());
  for (const auto& row : rows) {
    Record rec;
    rec.x.resize(feature_cols.size());
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      const std::string& cell = row[static_cast<std::size_t>(feature_cols[f])];
      Column& col = out.schema.features[f];
      if (col.kind == ColumnKind::kContinuous) {
        const auto v = detail::parse_double(cell);
        if (!v) throw ParseError("non-numeric value '" + cell + "' in continuous column " + col.name, 0);
        rec.x[f] = *v;
      } else {
        auto [it, inserted] = maps[f].try_emplace(cell, col.cardinality() + 1);
        if (inserted) col.categories.push_back(cell);
        rec.x[f] = static_cast<double>(it->second);
      }
    }
    const std::string& cls = row[static_cast<std::size_t>(class_col)];
    auto [it, inserted] = class_map.try_emplace(cls, static_cast<int>(out.schema.classes.size()) + 1);
    if (inserted) out.schema.classes.push_back(cls);
    rec.label = it->second;
    out.records.push_back(std::move(rec));
  }

  if (out.schema.class_count() < 2) {
    throw DegenerateDataError("dataset has a single class value: " + path);
  }
  for (const auto& col : out.schema.features) {
    if (col.kind == ColumnKind::kCategorical && col.cardinality() < 2) {
      out.warnings.push_back("column '" + col.name + "' has a single category; it carries no signal");
    }
  }
  return out;
}

// Seeded uniform split into (train, test) of sizes ceil(f*m) and the rest.
inline std::pair<std::vector<Record>, std::vector<Record>> split_records(
    const std::vector<Record>& records, double train_fraction, Rng& rng) {
  if (records.size() < 2) throw EmptyInputError("need at least two records to split");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidInputError("train fraction must lie in (0, 1)");
  }
  const std::size_t m = records.size();
  // The 1e-9 guards against products like 0.8 * m landing a hair above the
  // exact integer.
  const std::size_t train_size =
      static_cast<std::size_t>(std::ceil(train_fraction * static_cast<double>(m) - 1e-9));
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  shuffle_vector(idx, rng);

  std::pair<std::vector<Record>, std::vector<Record>> out;
  out.first.reserve(train_size);
  out.second.reserve(m - train_size);
  for (std::size_t i = 0; i < m; ++i) {
    (i < train_size ? out.first : out.second).push_back(records[idx[i]]);
  }
  return out;
}

// Fits per-column [min, max] over a training split, recorded in the schema so
// every party maps values the same way.
inline DatasetSchema fit_normalization(const std::vector<Record>& train, DatasetSchema schema) {
  if (train.empty()) throw EmptyInputError("cannot fit normalization on an empty split");
  for (std::size_t f = 0; f < schema.features.size(); ++f) {
    Column& col = schema.features[f];
    if (col.kind != ColumnKind::kContinuous) continue;
    double lo = train[0].x[f], hi = train[0].x[f];
    for (const auto& r : train) {
      lo = std::min(lo, r.x[f]);
      hi = std::max(hi, r.x[f]);
    }
    if (!(hi > lo)) throw DegenerateDataError("continuous column '" + col.name + "' is constant in the training split");
    col.min = lo;
    col.max = hi;
  }
  return schema;
}

// Affine map of each continuous column onto [-1, 1] using the schema's fitted
// range; values outside the range (test rows) clip to the boundary.
inline std::vector<Record> apply_normalization(std::vector<Record> records, const DatasetSchema& schema) {
  for (auto& r : records) {
    if (r.x.size() != schema.features.size()) throw SchemaError("record width does not match schema");
    for (std::size_t f = 0; f < schema.features.size(); ++f) {
      const Column& col = schema.features[f];
      if (col.kind != ColumnKind::kContinuous) continue;
      if (!(col.max > col.min)) throw DegenerateDataError("column '" + col.name + "' has no fitted range");
      double y = -1.0 + 2.0 * (r.x[f] - col.min) / (col.max - col.min);
      r.x[f] = std::clamp(y, -1.0, 1.0);
    }
  }
  return records;
}

}  // namespace ldpnb

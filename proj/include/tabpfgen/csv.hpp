#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "tabpfgen/dataset.hpp"
#include "tabpfgen/error.hpp"

namespace tabpfgen {

// Reserved column carrying the row provenance flag on export/import.
inline constexpr const char* kProvenanceColumn = "__synthetic__";

inline std::string format_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

// RFC-4180 tokenizer: quoted fields, doubled-quote escapes, CRLF or LF rows.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        require(!field_started, ErrorCode::csv_malformed,
                "csv: stray quote inside unquoted field near offset " + std::to_string(i));
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_row();
        break;
      case '\n':
        end_row();
        break;
      default:
        field += c;
        field_started = true;
        break;
    }
  }
  require(!in_quotes, ErrorCode::csv_malformed, "csv: unterminated quoted field");
  if (!field.empty() || !row.empty()) end_row();
  return rows;
}

inline double parse_cell(const std::string& cell, std::size_t data_row, const std::string& column) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    fail(ErrorCode::csv_bad_cell, "csv: cell '" + cell + "' at data row " +
                                      std::to_string(data_row + 1) + ", column '" + column +
                                      "' is not a real number");
  if (!std::isfinite(value))
    fail(ErrorCode::csv_bad_cell, "csv: non-finite value at data row " +
                                      std::to_string(data_row + 1) + ", column '" + column + "'");
  return value;
}

// Loads a header-bearing CSV, re-encoding labels to dense ids 0..K-1 in
// first-appearance order. `label_column` is matched by header name first,
// falling back to a 0-based column index when it parses as an integer.
// A `__synthetic__` column, if present, becomes the provenance mask.
inline Dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io_missing_file, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto rows = parse_csv(buf.str());
  require(!rows.empty(), ErrorCode::csv_empty_table, "csv: '" + path + "' is empty");
  const auto& header = rows.front();

  long label_idx = -1;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == label_column) label_idx = static_cast<long>(j);
  if (label_idx < 0) {
    long parsed = 0;
    const auto [ptr, ec] =
        std::from_chars(label_column.data(), label_column.data() + label_column.size(), parsed);
    if (ec == std::errc() && ptr == label_column.data() + label_column.size() && parsed >= 0 &&
        parsed < static_cast<long>(header.size()))
      label_idx = parsed;
  }
  require(label_idx >= 0, ErrorCode::csv_label_column,
          "csv: label column '" + label_column + "' not found in '" + path + "'");

  long provenance_idx = -1;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == kProvenanceColumn && static_cast<long>(j) != label_idx)
      provenance_idx = static_cast<long>(j);

  std::vector<long> feature_cols;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (static_cast<long>(j) != label_idx && static_cast<long>(j) != provenance_idx)
      feature_cols.push_back(static_cast<long>(j));
  require(!feature_cols.empty(), ErrorCode::csv_empty_table,
          "csv: '" + path + "' has no feature columns");
  require(rows.size() > 1, ErrorCode::csv_empty_table, "csv: '" + path + "' has no data rows");

  Dataset d;
  const auto n = rows.size() - 1;
  d.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(feature_cols.size()));
  d.labels.reserve(n);
  for (long j : feature_cols) d.feature_names.push_back(header[static_cast<std::size_t>(j)]);
  d.label_name = header[static_cast<std::size_t>(label_idx)];
  if (provenance_idx >= 0) d.synthetic.reserve(n);

  std::unordered_map<std::string, int> label_ids;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = rows[i + 1];
    require(r.size() == header.size(), ErrorCode::csv_malformed,
            "csv: data row " + std::to_string(i + 1) + " has " + std::to_string(r.size()) +
                " fields, header has " + std::to_string(header.size()));
    for (std::size_t c = 0; c < feature_cols.size(); ++c) {
      const long j = feature_cols[c];
      d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          parse_cell(r[static_cast<std::size_t>(j)], i, header[static_cast<std::size_t>(j)]);
    }
    const auto& label_text = r[static_cast<std::size_t>(label_idx)];
    auto [it, inserted] = label_ids.try_emplace(label_text, static_cast<int>(d.label_names.size()));
    if (inserted) d.label_names.push_back(label_text);
    d.labels.push_back(it->second);
    if (provenance_idx >= 0) {
      const auto& flag = r[static_cast<std::size_t>(provenance_idx)];
      require(flag == "0" || flag == "1", ErrorCode::csv_bad_cell,
              "csv: provenance flag at data row " + std::to_string(i + 1) + " must be 0 or 1");
      d.synthetic.push_back(flag == "1" ? 1 : 0);
    }
  }
  d.class_count = static_cast<int>(d.label_names.size());
  d.validate();
  return d;
}

inline void save_csv(const std::string& path, const Dataset& d, bool emit_provenance = false) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io_write_failed, "cannot write '" + path + "'");
  for (std::size_t j = 0; j < d.feature_names.size(); ++j) {
    if (j) out << ',';
    out << csv_escape(d.feature_names[j]);
  }
  out << ',' << csv_escape(d.label_name);
  if (emit_provenance) out << ',' << kProvenanceColumn;
  out << '\n';
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    for (Eigen::Index j = 0; j < d.dim(); ++j) {
      if (j) out << ',';
      out << format_float(d.features(i, j));
    }
    out << ',' << csv_escape(d.label_names[static_cast<std::size_t>(d.labels[static_cast<std::size_t>(i)])]);
    if (emit_provenance) out << ',' << (d.row_is_synthetic(i) ? '1' : '0');
    out << '\n';
  }
  require(out.good(), ErrorCode::io_write_failed, "write to '" + path + "' failed");
}

}  // namespace tabpfgen

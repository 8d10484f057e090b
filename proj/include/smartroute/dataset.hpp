#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "smartroute/errors.hpp"

namespace smartroute {

// Supervised rows: one feature vector per payment attempt plus its binary
// outcome. feature_indices map columns back into the originating store
// schema so a model trained on a column subset can score full vectors.
struct Dataset {
  std::string schema_id;
  std::vector<std::string> feature_names;
  std::vector<std::size_t> feature_indices;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;

  std::size_t n_features() const { return feature_names.size(); }
  std::size_t size() const { return rows.size(); }

  void validate() const {
    if (feature_names.size() != feature_indices.size()) {
      throw ValidationError("dataset feature names/indices length mismatch");
    }
    if (rows.size() != labels.size()) throw ValidationError("dataset rows/labels length mismatch");
    for (const auto& r : rows) {
      if (r.size() != feature_names.size()) throw ValidationError("dataset row width mismatch");
    }
    for (int l : labels) {
      if (l != 0 && l != 1) throw ValidationError("dataset labels must be binary");
    }
  }

  // Column subset by position in this dataset; composes feature_indices.
  Dataset select(const std::vector<std::size_t>& cols) const {
    Dataset out;
    out.schema_id = schema_id;
    for (std::size_t c : cols) {
      if (c >= n_features()) throw ValidationError("column index out of range");
      out.feature_names.push_back(feature_names[c]);
      out.feature_indices.push_back(feature_indices[c]);
    }
    out.rows.reserve(rows.size());
    for (const auto& r : rows) {
      std::vector<double> nr;
      nr.reserve(cols.size());
      for (std::size_t c : cols) nr.push_back(r[c]);
      out.rows.push_back(std::move(nr));
    }
    out.labels = labels;
    return out;
  }

  // Row range [begin, end) keeping all columns; used for time-ordered splits.
  Dataset slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > rows.size()) throw ValidationError("bad dataset slice range");
    Dataset out;
    out.schema_id = schema_id;
    out.feature_names = feature_names;
    out.feature_indices = feature_indices;
    out.rows.assign(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                    rows.begin() + static_cast<std::ptrdiff_t>(end));
    out.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(begin),
                      labels.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
  }
};

// Columnar text export: '#' header lines carry schema metadata, then one
// comma-separated row per line with the label last.
inline void write_dataset(std::ostream& out, const Dataset& ds) {
  out << "# schema_id " << ds.schema_id << '\n';
  out << "# columns ";
  for (std::size_t i = 0; i < ds.feature_names.size(); ++i) {
    if (i) out << ',';
    out << ds.feature_names[i];
  }
  out << ",label\n";
  out << "# indices ";
  for (std::size_t i = 0; i < ds.feature_indices.size(); ++i) {
    if (i) out << ',';
    out << ds.feature_indices[i];
  }
  out << '\n';
  char buf[40];
  for (std::size_t r = 0; r < ds.rows.size(); ++r) {
    for (double v : ds.rows[r]) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << buf << ',';
    }
    out << ds.labels[r] << '\n';
  }
}

inline void write_dataset_file(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  write_dataset(out, ds);
  if (!out) throw IoError("write failed: " + path);
}

inline Dataset read_dataset(std::istream& in) {
  Dataset ds;
  std::string line;
  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
      if (c == sep) {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    parts.push_back(cur);
    return parts;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line);
      std::string hash, tag;
      ls >> hash >> tag;
      std::string rest;
      std::getline(ls, rest);
      if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
      if (tag == "schema_id") {
        ds.schema_id = rest;
      } else if (tag == "columns") {
        auto cols = split(rest, ',');
        if (cols.empty() || cols.back() != "label") throw IoError("dataset header must end in label");
        cols.pop_back();
        ds.feature_names = cols;
      } else if (tag == "indices") {
        for (const auto& p : split(rest, ',')) {
          if (p.empty()) continue;
          ds.feature_indices.push_back(static_cast<std::size_t>(std::stoull(p)));
        }
      }
      continue;
    }
    auto parts = split(line, ',');
    if (parts.size() != ds.feature_names.size() + 1) throw IoError("dataset row width mismatch");
    std::vector<double> row;
    row.reserve(parts.size() - 1);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) row.push_back(std::stod(parts[i]));
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(std::stoi(parts.back()));
  }
  if (ds.feature_indices.empty() && !ds.feature_names.empty()) {
    for (std::size_t i = 0; i < ds.feature_names.size(); ++i) ds.feature_indices.push_back(i);
  }
  ds.validate();
  return ds;
}

inline Dataset read_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset: " + path);
  return read_dataset(in);
}

}  // namespace smartroute

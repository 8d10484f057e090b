#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "smartroute/bytes.hpp"
#include "smartroute/errors.hpp"
#include "smartroute/forest.hpp"
#include "smartroute/logistic.hpp"

namespace smartroute {

// Versioned binary model files; exact round trip. Layout in docs/formats.md.
inline constexpr char kModelMagic[8] = {'R', 'F', 'M', 'O', 'D', 'E', 'L', '1'};

namespace detail {

inline void write_columns(ByteWriter& w, const std::vector<std::string>& names,
                          const std::vector<std::size_t>& indices) {
  w.u32(static_cast<std::uint32_t>(names.size()));
  for (std::size_t i = 0; i < names.size(); ++i) {
    w.str(names[i]);
    w.u32(static_cast<std::uint32_t>(indices[i]));
  }
}

inline void read_columns(ByteReader& r, std::vector<std::string>& names,
                         std::vector<std::size_t>& indices) {
  std::uint32_t n = r.u32();
  names.clear();
  indices.clear();
  for (std::uint32_t i = 0; i < n; ++i) {
    names.push_back(r.str());
    indices.push_back(r.u32());
  }
}

inline void write_header(ByteWriter& w, const std::string& kind, const std::string& schema_id) {
  w.raw(kModelMagic, 8);
  w.u32(1);
  w.str(kind);
  w.str(schema_id);
}

inline std::string read_header(ByteReader& r, std::string& schema_id) {
  char magic[8];
  r.raw(magic, 8);
  if (std::string(magic, 8) != std::string(kModelMagic, 8)) throw IoError("bad model magic");
  if (r.u32() != 1) throw IoError("unsupported model version");
  std::string kind = r.str();
  schema_id = r.str();
  return kind;
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_forest(const TrainedForest& f) {
  ByteWriter w;
  detail::write_header(w, "forest", f.store_schema_id);
  detail::write_columns(w, f.feature_names, f.feature_indices);
  w.u32(static_cast<std::uint32_t>(f.params.n_trees));
  w.u32(static_cast<std::uint32_t>(f.params.max_depth));
  w.u32(static_cast<std::uint32_t>(f.params.min_samples_leaf));
  w.u32(static_cast<std::uint32_t>(f.params.feature_subsample));
  w.u8(f.params.bootstrap ? 1 : 0);
  w.u64(f.params.seed);
  w.u32(static_cast<std::uint32_t>(f.trees.size()));
  for (const auto& tree : f.trees) {
    w.u32(static_cast<std::uint32_t>(tree.nodes.size()));
    for (const auto& n : tree.nodes) {
      w.u8(n.is_leaf ? 1 : 0);
      w.u32(static_cast<std::uint32_t>(n.feature));
      w.f64(n.threshold);
      w.u32(static_cast<std::uint32_t>(n.left));
      w.u32(static_cast<std::uint32_t>(n.right));
      w.f64(n.pos_fraction);
      w.u64(n.n_samples);
      w.f64(n.impurity);
    }
  }
  return w.take();
}

inline TrainedForest deserialize_forest(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  TrainedForest f;
  std::string kind = detail::read_header(r, f.store_schema_id);
  if (kind != "forest") throw IoError("model file holds a '" + kind + "', expected forest");
  detail::read_columns(r, f.feature_names, f.feature_indices);
  f.params.n_trees = r.u32();
  f.params.max_depth = r.u32();
  f.params.min_samples_leaf = r.u32();
  f.params.feature_subsample = r.u32();
  f.params.bootstrap = r.u8() != 0;
  f.params.seed = r.u64();
  std::uint32_t n_trees = r.u32();
  f.trees.resize(n_trees);
  for (auto& tree : f.trees) {
    std::uint32_t n_nodes = r.u32();
    tree.nodes.resize(n_nodes);
    for (auto& n : tree.nodes) {
      n.is_leaf = r.u8() != 0;
      n.feature = static_cast<int>(r.u32());
      n.threshold = r.f64();
      n.left = static_cast<std::int32_t>(r.u32());
      n.right = static_cast<std::int32_t>(r.u32());
      n.pos_fraction = r.f64();
      n.n_samples = r.u64();
      n.impurity = r.f64();
    }
  }
  if (!r.done()) throw IoError("trailing bytes after model payload");
  return f;
}

inline std::vector<std::uint8_t> serialize_logistic(const TrainedLogistic& m) {
  ByteWriter w;
  detail::write_header(w, "logistic", m.store_schema_id);
  detail::write_columns(w, m.feature_names, m.feature_indices);
  w.u32(static_cast<std::uint32_t>(m.weights.size()));
  for (double v : m.weights) w.f64(v);
  w.f64(m.bias);
  for (double v : m.means) w.f64(v);
  for (double v : m.scales) w.f64(v);
  return w.take();
}

inline TrainedLogistic deserialize_logistic(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  TrainedLogistic m;
  std::string kind = detail::read_header(r, m.store_schema_id);
  if (kind != "logistic") throw IoError("model file holds a '" + kind + "', expected logistic");
  detail::read_columns(r, m.feature_names, m.feature_indices);
  std::uint32_t d = r.u32();
  if (d != m.feature_names.size()) throw IoError("logistic payload width mismatch");
  m.weights.resize(d);
  for (auto& v : m.weights) v = r.f64();
  m.bias = r.f64();
  m.means.resize(d);
  for (auto& v : m.means) v = r.f64();
  m.scales.resize(d);
  for (auto& v : m.scales) v = r.f64();
  if (!r.done()) throw IoError("trailing bytes after model payload");
  return m;
}

inline void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

}  // namespace smartroute

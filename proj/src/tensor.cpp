#include "provts/tensor.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace provts {

using nlohmann::json;

std::string FeatureTensor::derived_name(size_t column) const {
  size_t d_raw = raw_dimension();
  return raw_features[column % d_raw] + "." + stats[column / d_raw];
}

std::vector<size_t> FeatureTensor::columns_of_raw(size_t raw) const {
  std::vector<size_t> out;
  for (size_t s = 0; s < stats.size(); ++s) out.push_back(column_index(s, raw));
  return out;
}

FeatureTensor FeatureTensor::select_samples(const std::vector<size_t>& indices) const {
  FeatureTensor out = *this;
  out.n = indices.size();
  out.data.resize(out.n * l * d);
  out.labels_task.clear();
  out.labels_space.clear();
  out.trace_ids.clear();
  for (size_t k = 0; k < indices.size(); ++k) {
    size_t i = indices[k];
    std::memcpy(&out.data[k * l * d], &data[i * l * d], l * d * sizeof(float));
    if (i < labels_task.size()) out.labels_task.push_back(labels_task[i]);
    if (i < labels_space.size()) out.labels_space.push_back(labels_space[i]);
    if (i < trace_ids.size()) out.trace_ids.push_back(trace_ids[i]);
  }
  return out;
}

FeatureTensor FeatureTensor::select_columns(const std::vector<size_t>& columns) const {
  FeatureTensor out = *this;
  out.d = columns.size();
  out.data.assign(n * l * out.d, 0.0f);
  for (size_t i = 0; i < n; ++i)
    for (size_t s = 0; s < l; ++s)
      for (size_t k = 0; k < columns.size(); ++k)
        out.data[(i * l + s) * out.d + k] = at(i, s, columns[k]);
  // Column subsets break the stat-major layout, so carry explicit names.
  out.raw_features.clear();
  out.stats.clear();
  out.normalization.min.clear();
  out.normalization.max.clear();
  for (size_t c : columns) {
    out.raw_features.push_back(derived_name(c));
    if (!normalization.empty()) {
      out.normalization.min.push_back(normalization.min[c]);
      out.normalization.max.push_back(normalization.max[c]);
    }
  }
  out.stats = {"id"};
  return out;
}

static void append_f32_le(std::string& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  out.push_back(static_cast<char>(bits & 0xFF));
  out.push_back(static_cast<char>((bits >> 8) & 0xFF));
  out.push_back(static_cast<char>((bits >> 16) & 0xFF));
  out.push_back(static_cast<char>((bits >> 24) & 0xFF));
}

static float read_f32_le(const unsigned char* p) {
  uint32_t bits = static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
                  (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
  float v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

void save_tensor(const FeatureTensor& tensor, const std::string& path_prefix) {
  std::string blob;
  blob.reserve(tensor.data.size() * 4);
  for (float v : tensor.data) append_f32_le(blob, v);

  std::ofstream bin(path_prefix + ".bin", std::ios::binary);
  if (!bin) fail(ErrorCode::IoError, "cannot write " + path_prefix + ".bin");
  bin.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  bin.close();
  if (!bin) fail(ErrorCode::IoError, "write failed for " + path_prefix + ".bin");

  json meta;
  meta["shape"] = {tensor.n, tensor.l, tensor.d};
  meta["environment"] = to_string(tensor.environment);
  meta["schema"] = json::parse(tensor.schema_json);
  meta["schema_hash"] = tensor.schema_hash();
  meta["raw_features"] = tensor.raw_features;
  meta["stats"] = tensor.stats;
  meta["labels_task"] = tensor.labels_task;
  meta["labels_space"] = tensor.labels_space;
  meta["trace_ids"] = tensor.trace_ids;
  meta["normalized"] = tensor.normalized;
  meta["normalization"] = {{"min", tensor.normalization.min}, {"max", tensor.normalization.max}};
  if (!tensor.note.empty()) meta["note"] = tensor.note;

  std::ofstream out(path_prefix + ".meta.json");
  if (!out) fail(ErrorCode::IoError, "cannot write " + path_prefix + ".meta.json");
  out << meta.dump(2) << "\n";
}

FeatureTensor load_tensor(const std::string& path_prefix) {
  std::ifstream in(path_prefix + ".meta.json");
  if (!in) fail(ErrorCode::IoError, "cannot read " + path_prefix + ".meta.json");
  json meta = json::parse(in);

  FeatureTensor tensor;
  tensor.n = meta.at("shape")[0].get<size_t>();
  tensor.l = meta.at("shape")[1].get<size_t>();
  tensor.d = meta.at("shape")[2].get<size_t>();
  tensor.environment = environment_from_string(meta.at("environment").get<std::string>());
  tensor.schema_json = meta.at("schema").dump(2) + "\n";
  tensor.raw_features = meta.at("raw_features").get<std::vector<std::string>>();
  tensor.stats = meta.at("stats").get<std::vector<std::string>>();
  tensor.labels_task = meta.at("labels_task").get<std::vector<int>>();
  tensor.labels_space = meta.at("labels_space").get<std::vector<int>>();
  tensor.trace_ids = meta.at("trace_ids").get<std::vector<std::string>>();
  tensor.normalized = meta.at("normalized").get<bool>();
  tensor.normalization.min = meta.at("normalization").at("min").get<std::vector<double>>();
  tensor.normalization.max = meta.at("normalization").at("max").get<std::vector<double>>();
  if (meta.contains("note")) tensor.note = meta.at("note").get<std::string>();

  std::ifstream bin(path_prefix + ".bin", std::ios::binary);
  if (!bin) fail(ErrorCode::IoError, "cannot read " + path_prefix + ".bin");
  std::string blob((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  size_t expected = tensor.n * tensor.l * tensor.d * 4;
  if (blob.size() != expected)
    fail(ErrorCode::IoError, path_prefix + ".bin has " + std::to_string(blob.size()) +
                                 " bytes, expected " + std::to_string(expected));
  tensor.data.resize(tensor.n * tensor.l * tensor.d);
  for (size_t i = 0; i < tensor.data.size(); ++i)
    tensor.data[i] = read_f32_le(reinterpret_cast<const unsigned char*>(blob.data()) + i * 4);
  return tensor;
}

}  // namespace provts

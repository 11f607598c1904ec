#pragma once

#include <string>
#include <vector>

#include "provts/common.hpp"
#include "provts/core_types.hpp"
#include "provts/tensor.hpp"

namespace helpers {

using namespace provts;

/// A labeled trace with explicitly supplied frame values.
inline SessionTrace make_trace(const FeatureSchema& schema,
                               const std::vector<std::vector<double>>& rows, double dt = 0.1,
                               int label_code = 4, const std::string& participant = "p0",
                               int trial = 0) {
  SessionTrace trace;
  trace.participant_id = participant;
  trace.environment = schema.environment();
  trace.trial_index = trial;
  trace.sample_rate_hint = 1.0 / dt;
  if (label_code >= 0) trace.label = decode_category(label_code);
  for (size_t i = 0; i < rows.size(); ++i) {
    BehaviorFrame frame;
    frame.timestamp = static_cast<double>(i) * dt;
    frame.values = rows[i];
    if (frame.values.size() != schema.dimension()) frame.values.resize(schema.dimension(), 0.0);
    trace.frames.push_back(std::move(frame));
  }
  return trace;
}

/// Random continuous-valued trace (kept clear of the binary/orientation
/// invariants by zeroing event columns and orientation triplets).
inline SessionTrace random_trace(const FeatureSchema& schema, Rng& rng, size_t frames,
                                 int label_code = 4, const std::string& participant = "p0",
                                 int trial = 0) {
  std::vector<std::vector<double>> rows(frames, std::vector<double>(schema.dimension(), 0.0));
  for (auto& row : rows)
    for (size_t f = 0; f < schema.dimension(); ++f) {
      if (schema.entry(f).kind == FeatureKind::BinaryEvent)
        row[f] = rng.uniform() < 0.1 ? 1.0 : 0.0;
      else if (schema.entry(f).name.rfind("forward.", 0) == 0 ||
               schema.entry(f).name.rfind("up.", 0) == 0)
        row[f] = 0.0;
      else
        row[f] = rng.uniform(-2.0, 2.0);
    }
  return make_trace(schema, rows, 1.0 / 30.0, label_code, participant, trial);
}

/// Tiny tensor with directly planted values: n samples, l segments, d
/// columns, labels given per sample (task codes; space = code / 10).
inline FeatureTensor make_tensor(size_t n, size_t l, size_t d,
                                 const std::vector<int>& task_labels,
                                 const std::vector<float>& data,
                                 Environment env = Environment::Immersive) {
  FeatureTensor t;
  t.n = n;
  t.l = l;
  t.d = d;
  t.data = data;
  t.environment = env;
  t.schema_json = schema_for(env).to_json();
  for (size_t f = 0; f < d; ++f) t.raw_features.push_back("f" + std::to_string(f));
  t.stats = {"id"};
  for (size_t i = 0; i < n; ++i) {
    int code = task_labels[i];
    t.labels_task.push_back(code);
    t.labels_space.push_back(code >= 0 ? code / 10 : -1);
    t.trace_ids.push_back("t:" + std::to_string(i));
  }
  return t;
}

}  // namespace helpers

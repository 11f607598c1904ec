#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "provts/common.hpp"

namespace provts {

enum class Environment { Desktop, Immersive };

Environment environment_from_string(const std::string& name);
std::string to_string(Environment env);

// -------------------------------------------------------------------------
// Task taxonomy. Codes combine the visual-space digit with a task-type
// digit: code = space * 10 + type. Interaction-space trials exist in raw
// logs but are excluded from classification datasets, and the combined
// space has no type 0 ("retrieve value" was folded into the single-space
// variants). That leaves 29 valid classification categories:
// 00-09, 10-19, 21-29.

enum class Space : int { Spatial = 0, Temporal = 1, Combined = 2, Interaction = 3 };

std::string to_string(Space space);

struct TaskLabel {
  Space space = Space::Spatial;
  int task_type = 0;

  int category_code() const { return static_cast<int>(space) * 10 + task_type; }
  int space_code() const { return static_cast<int>(space); }

  bool operator==(const TaskLabel&) const = default;
};

/// Throws RemovedCategory for (Combined, 0) and InvalidArgument for
/// out-of-range members.
int category_code(Space space, int task_type);

/// Inverse of category_code; rejects codes that encode no valid label.
TaskLabel decode_category(int code);

/// The 29 category codes usable as classification labels, ascending.
const std::vector<int>& classification_category_codes();

/// The space codes usable as classification labels: {0, 1, 2}.
const std::vector<int>& classification_space_codes();

// -------------------------------------------------------------------------
// Feature schema.

enum class FeatureGroup { Interaction, Selection, Immersive };
enum class FeatureKind { BinaryEvent, Continuous };

FeatureGroup feature_group_from_string(const std::string& name);
std::string to_string(FeatureGroup group);
std::string to_string(FeatureKind kind);

struct SchemaEntry {
  std::string name;
  FeatureGroup group = FeatureGroup::Interaction;
  FeatureKind kind = FeatureKind::Continuous;
  bool desktop = false;
  bool immersive = false;

  bool available_in(Environment env) const {
    return env == Environment::Desktop ? desktop : immersive;
  }

  bool operator==(const SchemaEntry&) const = default;
};

/// Ordered feature list for one environment. Order is fixed and shared by
/// ingestion, transformation and model training.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  FeatureSchema(Environment env, std::string version, std::vector<SchemaEntry> entries);

  Environment environment() const { return env_; }
  const std::string& version() const { return version_; }
  const std::vector<SchemaEntry>& entries() const { return entries_; }
  size_t dimension() const { return entries_.size(); }

  const SchemaEntry& entry(size_t i) const { return entries_[i]; }
  /// Index of a feature by name, or UnknownFeature.
  size_t index_of(const std::string& name) const;
  std::optional<size_t> find(const std::string& name) const;

  std::vector<std::string> names() const;
  std::vector<size_t> group_indices(FeatureGroup group) const;

  /// Copy with one appended feature; rejects duplicates.
  FeatureSchema with_feature(const SchemaEntry& entry) const;
  /// Copy without the given feature indices (order of the rest preserved).
  FeatureSchema without_indices(const std::vector<size_t>& indices) const;

  std::string to_json() const;
  static FeatureSchema from_json(const std::string& text);

  /// FNV-1a fingerprint of the canonical JSON form.
  std::string hash() const;

  bool operator==(const FeatureSchema&) const = default;

 private:
  Environment env_ = Environment::Desktop;
  std::string version_;
  std::vector<SchemaEntry> entries_;
};

/// Built-in v1 schema: d = 12 for desktop, d = 36 for immersive.
FeatureSchema schema_for(Environment env);

// -------------------------------------------------------------------------
// Behavior traces.

struct BehaviorFrame {
  double timestamp = 0.0;  // seconds from trace start
  std::vector<double> values;
};

struct SessionTrace {
  std::string participant_id;
  Environment environment = Environment::Immersive;
  int trial_index = 0;
  std::optional<TaskLabel> label;
  std::vector<BehaviorFrame> frames;
  double sample_rate_hint = 0.0;

  double duration_s() const {
    return frames.empty() ? 0.0 : frames.back().timestamp - frames.front().timestamp;
  }
  std::string id() const { return participant_id + ":" + std::to_string(trial_index); }
};

/// Checks a frame against the schema invariants: dimension, binary events
/// in {0,1}, orientation vectors of unit norm (within 1e-2) when nonzero.
/// Throws on violation.
void validate_frame(const BehaviorFrame& frame, const FeatureSchema& schema);

/// Frame-wise validation plus non-empty frames and non-decreasing time.
void validate_trace(const SessionTrace& trace, const FeatureSchema& schema);

}  // namespace provts

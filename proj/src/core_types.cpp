#include "provts/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

namespace provts {

using nlohmann::json;

Environment environment_from_string(const std::string& name) {
  if (name == "desktop") return Environment::Desktop;
  if (name == "immersive") return Environment::Immersive;
  fail(ErrorCode::InvalidArgument, "unknown environment '" + name + "'");
}

std::string to_string(Environment env) {
  return env == Environment::Desktop ? "desktop" : "immersive";
}

std::string to_string(Space space) {
  switch (space) {
    case Space::Spatial: return "spatial";
    case Space::Temporal: return "temporal";
    case Space::Combined: return "combined";
    case Space::Interaction: return "interaction";
  }
  return "?";
}

int category_code(Space space, int task_type) {
  if (task_type < 0 || task_type > 9)
    fail(ErrorCode::InvalidArgument, "task_type must be in [0,9]");
  if (space == Space::Combined && task_type == 0)
    fail(ErrorCode::RemovedCategory, "combined-space 'retrieve value' (code 20) is removed");
  return static_cast<int>(space) * 10 + task_type;
}

TaskLabel decode_category(int code) {
  if (code < 0 || code > 39) fail(ErrorCode::InvalidArgument, "category code out of range");
  if (code == 20) fail(ErrorCode::RemovedCategory, "code 20 encodes no valid label");
  return TaskLabel{static_cast<Space>(code / 10), code % 10};
}

const std::vector<int>& classification_category_codes() {
  static const std::vector<int> codes = [] {
    std::vector<int> out;
    for (int space = 0; space < 3; ++space)
      for (int type = 0; type < 10; ++type)
        if (!(space == 2 && type == 0)) out.push_back(space * 10 + type);
    return out;
  }();
  return codes;
}

const std::vector<int>& classification_space_codes() {
  static const std::vector<int> codes{0, 1, 2};
  return codes;
}

FeatureGroup feature_group_from_string(const std::string& name) {
  if (name == "interaction") return FeatureGroup::Interaction;
  if (name == "selection") return FeatureGroup::Selection;
  if (name == "immersive") return FeatureGroup::Immersive;
  fail(ErrorCode::InvalidArgument, "unknown feature group '" + name + "'");
}

std::string to_string(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::Interaction: return "interaction";
    case FeatureGroup::Selection: return "selection";
    case FeatureGroup::Immersive: return "immersive";
  }
  return "?";
}

std::string to_string(FeatureKind kind) {
  return kind == FeatureKind::BinaryEvent ? "binary_event" : "continuous";
}

static FeatureKind feature_kind_from_string(const std::string& name) {
  if (name == "binary_event") return FeatureKind::BinaryEvent;
  if (name == "continuous") return FeatureKind::Continuous;
  fail(ErrorCode::InvalidArgument, "unknown feature kind '" + name + "'");
}

FeatureSchema::FeatureSchema(Environment env, std::string version, std::vector<SchemaEntry> entries)
    : env_(env), version_(std::move(version)), entries_(std::move(entries)) {
  std::set<std::string> seen;
  for (const auto& e : entries_) {
    if (!seen.insert(e.name).second)
      fail(ErrorCode::DuplicateFeature, "duplicate feature '" + e.name + "'");
    if (!e.desktop && !e.immersive)
      fail(ErrorCode::InvalidArgument, "feature '" + e.name + "' available in no environment");
  }
}

size_t FeatureSchema::index_of(const std::string& name) const {
  if (auto idx = find(name)) return *idx;
  fail(ErrorCode::UnknownFeature, "feature '" + name + "' not in schema");
}

std::optional<size_t> FeatureSchema::find(const std::string& name) const {
  for (size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].name == name) return i;
  return std::nullopt;
}

std::vector<std::string> FeatureSchema::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

std::vector<size_t> FeatureSchema::group_indices(FeatureGroup group) const {
  std::vector<size_t> out;
  for (size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].group == group) out.push_back(i);
  return out;
}

FeatureSchema FeatureSchema::with_feature(const SchemaEntry& entry) const {
  if (find(entry.name)) fail(ErrorCode::DuplicateFeature, "feature '" + entry.name + "' already in schema");
  auto entries = entries_;
  entries.push_back(entry);
  return FeatureSchema(env_, version_, std::move(entries));
}

FeatureSchema FeatureSchema::without_indices(const std::vector<size_t>& indices) const {
  std::set<size_t> drop(indices.begin(), indices.end());
  std::vector<SchemaEntry> kept;
  for (size_t i = 0; i < entries_.size(); ++i)
    if (!drop.count(i)) kept.push_back(entries_[i]);
  if (kept.empty()) fail(ErrorCode::EmptyFeatureSet, "schema would have no features left");
  return FeatureSchema(env_, version_, std::move(kept));
}

std::string FeatureSchema::to_json() const {
  json doc;
  doc["version"] = version_;
  doc["environment"] = to_string(env_);
  json features = json::array();
  for (const auto& e : entries_) {
    json envs = json::array();
    if (e.desktop) envs.push_back("desktop");
    if (e.immersive) envs.push_back("immersive");
    features.push_back({{"name", e.name},
                        {"group", to_string(e.group)},
                        {"kind", to_string(e.kind)},
                        {"environments", envs}});
  }
  doc["features"] = features;
  return doc.dump(2) + "\n";
}

FeatureSchema FeatureSchema::from_json(const std::string& text) {
  json doc = json::parse(text);
  std::vector<SchemaEntry> entries;
  for (const auto& f : doc.at("features")) {
    SchemaEntry e;
    e.name = f.at("name").get<std::string>();
    e.group = feature_group_from_string(f.at("group").get<std::string>());
    e.kind = feature_kind_from_string(f.at("kind").get<std::string>());
    for (const auto& env : f.at("environments")) {
      if (env == "desktop") e.desktop = true;
      if (env == "immersive") e.immersive = true;
    }
    entries.push_back(std::move(e));
  }
  return FeatureSchema(environment_from_string(doc.at("environment").get<std::string>()),
                       doc.at("version").get<std::string>(), std::move(entries));
}

std::string FeatureSchema::hash() const { return to_hex(fnv1a64(to_json())); }

namespace {

struct MasterEntry {
  const char* name;
  FeatureGroup group;
  FeatureKind kind;
  bool desktop;
  bool immersive;
};

// The unified v1 feature table. The paper fixes the 12 immersive features
// by name; the interaction and selection lists are this artifact's
// documented completion of the prose descriptions (events plus their
// input-method context, current selections and chart slots; the desktop
// side swaps tap/gaze/voice channels for mouse click and cursor).
constexpr MasterEntry kMasterTable[] = {
    // interaction
    {"tap", FeatureGroup::Interaction, FeatureKind::BinaryEvent, false, true},
    {"click", FeatureGroup::Interaction, FeatureKind::BinaryEvent, true, false},
    {"gaze_select", FeatureGroup::Interaction, FeatureKind::BinaryEvent, false, true},
    {"voice_command", FeatureGroup::Interaction, FeatureKind::BinaryEvent, false, true},
    {"attribute_switch", FeatureGroup::Interaction, FeatureKind::BinaryEvent, true, true},
    {"time_slider_change", FeatureGroup::Interaction, FeatureKind::BinaryEvent, true, true},
    {"deselect", FeatureGroup::Interaction, FeatureKind::BinaryEvent, false, true},
    {"clear", FeatureGroup::Interaction, FeatureKind::BinaryEvent, false, true},
    {"air_tap_start", FeatureGroup::Interaction, FeatureKind::BinaryEvent, false, true},
    {"air_tap_end", FeatureGroup::Interaction, FeatureKind::BinaryEvent, false, true},
    {"gaze_point.x", FeatureGroup::Interaction, FeatureKind::Continuous, false, true},
    {"gaze_point.y", FeatureGroup::Interaction, FeatureKind::Continuous, false, true},
    {"gaze_point.z", FeatureGroup::Interaction, FeatureKind::Continuous, false, true},
    {"gaze_target_kind", FeatureGroup::Interaction, FeatureKind::Continuous, false, true},
    {"gaze_target_index", FeatureGroup::Interaction, FeatureKind::Continuous, false, true},
    {"mouse.x", FeatureGroup::Interaction, FeatureKind::Continuous, true, false},
    {"mouse.y", FeatureGroup::Interaction, FeatureKind::Continuous, true, false},
    // selection
    {"selected_state_index", FeatureGroup::Selection, FeatureKind::Continuous, true, true},
    {"selected_state.x", FeatureGroup::Selection, FeatureKind::Continuous, true, true},
    {"selected_state.y", FeatureGroup::Selection, FeatureKind::Continuous, true, true},
    {"selected_state.z", FeatureGroup::Selection, FeatureKind::Continuous, false, true},
    {"chart_slot_0", FeatureGroup::Selection, FeatureKind::Continuous, true, true},
    {"chart_slot_1", FeatureGroup::Selection, FeatureKind::Continuous, true, true},
    {"chart_slot_2", FeatureGroup::Selection, FeatureKind::Continuous, true, true},
    {"chart_slot_3", FeatureGroup::Selection, FeatureKind::Continuous, true, true},
    {"selected_time", FeatureGroup::Selection, FeatureKind::Continuous, false, true},
    {"selected_attribute", FeatureGroup::Selection, FeatureKind::Continuous, false, true},
    // immersive
    {"objPosition.x", FeatureGroup::Immersive, FeatureKind::Continuous, false, true},
    {"objPosition.y", FeatureGroup::Immersive, FeatureKind::Continuous, false, true},
    {"objPosition.z", FeatureGroup::Immersive, FeatureKind::Continuous, false, true},
    {"position.x", FeatureGroup::Immersive, FeatureKind::Continuous, false, true},
    {"position.y", FeatureGroup::Immersive, FeatureKind::Continuous, false, true},
    {"position.z", FeatureGroup::Immersive, FeatureKind::Continuous, false, true},
    {"forward.x", FeatureGroup::Immersive, FeatureKind::Continuous, false, true},
    {"forward.y", FeatureGroup::Immersive, FeatureKind::Continuous, false, true},
    {"forward.z", FeatureGroup::Immersive, FeatureKind::Continuous, false, true},
    {"up.x", FeatureGroup::Immersive, FeatureKind::Continuous, false, true},
    {"up.y", FeatureGroup::Immersive, FeatureKind::Continuous, false, true},
    {"up.z", FeatureGroup::Immersive, FeatureKind::Continuous, false, true},
};

}  // namespace

FeatureSchema schema_for(Environment env) {
  std::vector<SchemaEntry> entries;
  for (const auto& m : kMasterTable) {
    SchemaEntry e{m.name, m.group, m.kind, m.desktop, m.immersive};
    if (e.available_in(env)) entries.push_back(std::move(e));
  }
  return FeatureSchema(env, "v1", std::move(entries));
}

static void check_unit_triplet(const FeatureSchema& schema, const BehaviorFrame& frame,
                               const std::string& base) {
  auto ix = schema.find(base + ".x");
  auto iy = schema.find(base + ".y");
  auto iz = schema.find(base + ".z");
  if (!ix || !iy || !iz) return;
  double x = frame.values[*ix], y = frame.values[*iy], z = frame.values[*iz];
  if (x == 0.0 && y == 0.0 && z == 0.0) return;
  double norm = std::sqrt(x * x + y * y + z * z);
  if (std::abs(norm - 1.0) > 0.01)
    fail(ErrorCode::InvalidArgument,
         base + " vector norm " + std::to_string(norm) + " outside 1 +/- 0.01");
}

void validate_frame(const BehaviorFrame& frame, const FeatureSchema& schema) {
  if (frame.values.size() != schema.dimension())
    fail(ErrorCode::DimensionMismatch,
         "frame has " + std::to_string(frame.values.size()) + " values, schema expects " +
             std::to_string(schema.dimension()));
  if (!std::isfinite(frame.timestamp))
    fail(ErrorCode::InvalidArgument, "non-finite timestamp");
  for (size_t i = 0; i < frame.values.size(); ++i) {
    double v = frame.values[i];
    if (!std::isfinite(v))
      fail(ErrorCode::InvalidArgument, "non-finite value for '" + schema.entry(i).name + "'");
    if (schema.entry(i).kind == FeatureKind::BinaryEvent && v != 0.0 && v != 1.0)
      fail(ErrorCode::InvalidArgument,
           "binary feature '" + schema.entry(i).name + "' must be 0 or 1, got " + std::to_string(v));
  }
  check_unit_triplet(schema, frame, "forward");
  check_unit_triplet(schema, frame, "up");
}

void validate_trace(const SessionTrace& trace, const FeatureSchema& schema) {
  if (trace.frames.empty()) fail(ErrorCode::EmptyTrial, "trace " + trace.id() + " has no frames");
  double last = trace.frames.front().timestamp;
  for (const auto& frame : trace.frames) {
    validate_frame(frame, schema);
    if (frame.timestamp < last)
      fail(ErrorCode::NonMonotonicTime, "trace " + trace.id() + " timestamps regress");
    last = frame.timestamp;
  }
}

}  // namespace provts

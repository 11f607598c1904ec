#pragma once

#include <array>
#include <string>
#include <vector>

#include "provts/core_types.hpp"

namespace provts {

/// Axis-aligned box for one panel of the synthetic room layout.
struct RegionBox {
  std::array<double, 3> center{};
  std::array<double, 3> half{};

  bool contains(double x, double y, double z) const {
    return std::abs(x - center[0]) <= half[0] && std::abs(y - center[1]) <= half[1] &&
           std::abs(z - center[2]) <= half[2];
  }
};

/// Panel ids: "choropleth", "charts", "panel".
const RegionBox& region_box(const std::string& name);
/// Normalized screen rectangle {x0, x1, y0, y1} for the desktop layout.
const std::array<double, 4>& region_screen_box(const std::string& name);

struct DwellSpec {
  std::string region;
  double weight = 1.0;
};

/// Random: dwell regions drawn by weight with exponential holds. Cycle:
/// the dwell list is walked in order for a fixed number of rounds, hold
/// lengths proportional to weight and scaled to the trace duration, which
/// keeps traces of one archetype mutually alignable under time warping.
enum class DwellMode { Random, Cycle };

/// Interaction cadences in events per second. "select" drives air-tap /
/// gaze / click state selections; panel activities only fire while the
/// simulated user dwells at the interaction panel.
struct ActivityRates {
  double select_hz = 0.3;
  double deselect_hz = 0.05;
  double clear_hz = 0.01;
  double attribute_hz = 0.05;
  double slider_hz = 0.05;
  double voice_hz = 0.02;
};

struct ArchetypeConfig {
  int category_code = -1;  // -1 generates open (unlabeled) traces
  double duration_min_s = 6.0;
  double duration_max_s = 12.0;
  double noise_sigma = 0.02;
  std::vector<DwellSpec> dwell = {{"choropleth", 1.0}};
  DwellMode dwell_mode = DwellMode::Random;
  size_t dwell_cycles = 3;
  double dwell_mean_s = 2.5;
  ActivityRates rates;
  double slider_low = 0.0;
  double slider_high = 1.0;
  size_t initial_selections = 0;  // states already selected at trace start
  // Shifts the simulated user's standing spot. Offsets move only the body
  // position and orientation (immersive features), so archetypes differing
  // in nothing else carry class signal purely in the immersive group.
  std::array<double, 3> stand_offset{0.0, 0.0, 0.0};

  void validate() const;  // InvalidConfig on violation
};

std::string archetypes_to_json(const std::vector<ArchetypeConfig>& configs);
std::vector<ArchetypeConfig> archetypes_from_json(const std::string& text);

/// Deterministic for a fixed (config, seed): every trace derives its own
/// seed from (seed, class index, trace index), so results do not depend on
/// scheduling. Frame rate is 30 Hz immersive, 10 Hz desktop; generated
/// traces always span at least two seconds.
std::vector<SessionTrace> generate(const ArchetypeConfig& config, int n_per_class, uint64_t seed,
                                   Environment env);
std::vector<SessionTrace> generate_set(const std::vector<ArchetypeConfig>& configs,
                                       int n_per_class, uint64_t seed, Environment env,
                                       int jobs = 1);

/// Ground truth for one concatenated open-exploration trace.
struct OpenMixSegment {
  double t_start_s = 0.0;
  double t_end_s = 0.0;
  int space_code = 0;
  int category_code = 0;
};

struct GeneratedOpenTrace {
  SessionTrace trace;
  std::vector<OpenMixSegment> segments;
};

/// Unlabeled traces formed by concatenating one segment per archetype in a
/// seeded random order; segment boundaries are returned as ground truth.
/// Later segments grow by `growth` so each one can eventually dominate the
/// cumulative prefix a growing-window interpreter sees.
std::vector<GeneratedOpenTrace> generate_openmix(const std::vector<ArchetypeConfig>& archetypes,
                                                 int n_traces, uint64_t seed, Environment env,
                                                 double segment_min_s = 7.0,
                                                 double segment_max_s = 9.0,
                                                 double growth = 2.3);

// Preset suites ------------------------------------------------------------

/// One archetype per visual space (codes 4, 13, 27).
std::vector<ArchetypeConfig> preset_spaces3();
/// One archetype per classification category code, with per-type cadence,
/// dwell and duration tweaks.
std::vector<ArchetypeConfig> preset_tasks30();
/// Openmix building blocks: three single-space archetypes (spatial types 4
/// and 7, temporal type 13). Open sessions decompose into sequences of
/// simpler single-space tasks, which is what a growing-window interpreter
/// can actually attribute.
std::vector<ArchetypeConfig> preset_openmix();

std::vector<ArchetypeConfig> preset_by_name(const std::string& name);

/// Appends an i.i.d. uniform[0,1] feature (uncorrelated with labels) to
/// every trace and extends the schema; DuplicateFeature if the name exists.
std::pair<std::vector<SessionTrace>, FeatureSchema> inject_noise_feature(
    std::vector<SessionTrace> traces, const FeatureSchema& schema, const std::string& name,
    uint64_t seed, FeatureGroup group = FeatureGroup::Interaction);

}  // namespace provts

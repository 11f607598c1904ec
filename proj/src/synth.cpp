#include "provts/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

namespace provts {

using nlohmann::json;

namespace {

const std::map<std::string, RegionBox>& regions() {
  // 3x3 m room: choropleth on the far wall, line charts to the right,
  // interaction panel to the left, all at roughly head height.
  static const std::map<std::string, RegionBox> boxes = {
      {"choropleth", {{0.0, 1.5, 2.0}, {1.2, 0.8, 0.08}}},
      {"charts", {{1.9, 1.5, 0.3}, {0.08, 0.6, 0.9}}},
      {"panel", {{-1.6, 1.3, 0.6}, {0.08, 0.45, 0.55}}},
  };
  return boxes;
}

const std::map<std::string, std::array<double, 3>>& stand_points() {
  static const std::map<std::string, std::array<double, 3>> points = {
      {"choropleth", {0.0, 1.65, 0.7}},
      {"charts", {0.9, 1.65, 0.3}},
      {"panel", {-0.6, 1.65, 0.6}},
  };
  return points;
}

const std::map<std::string, std::array<double, 4>>& screen_boxes() {
  static const std::map<std::string, std::array<double, 4>> boxes = {
      {"choropleth", {0.05, 0.55, 0.25, 0.95}},
      {"charts", {0.60, 0.95, 0.35, 0.95}},
      {"panel", {0.60, 0.95, 0.05, 0.25}},
  };
  return boxes;
}

int region_code(const std::string& name) {
  if (name == "choropleth") return 1;
  if (name == "charts") return 2;
  return 3;
}

std::array<double, 3> point_in_box(const RegionBox& box, Rng& rng, double shrink = 0.9) {
  return {box.center[0] + box.half[0] * shrink * (2.0 * rng.uniform() - 1.0),
          box.center[1] + box.half[1] * shrink * (2.0 * rng.uniform() - 1.0),
          box.center[2] + box.half[2] * shrink * (2.0 * rng.uniform() - 1.0)};
}

std::array<double, 3> normalize3(std::array<double, 3> v) {
  double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (n < 1e-9) return {0.0, 0.0, 1.0};
  return {v[0] / n, v[1] / n, v[2] / n};
}

/// Deterministic pseudo-centroid for a state index on the choropleth.
std::array<double, 3> state_centroid(int state_index) {
  const RegionBox& box = regions().at("choropleth");
  double u = std::fmod(0.618033988749895 * (state_index + 1), 1.0);
  double v = std::fmod(0.381966011250105 * (state_index + 1), 1.0);
  return {box.center[0] + box.half[0] * 0.9 * (2.0 * u - 1.0),
          box.center[1] + box.half[1] * 0.9 * (2.0 * v - 1.0), box.center[2]};
}

struct EventStream {
  double rate_hz = 0.0;
  double next_in_s = 0.0;  // remaining active time until the next arrival

  void prime(Rng& rng) {
    if (rate_hz > 0.0) next_in_s = rng.exponential(rate_hz);
  }
  bool step(double active_dt, Rng& rng) {
    if (rate_hz <= 0.0 || active_dt <= 0.0) return false;
    next_in_s -= active_dt;
    if (next_in_s > 0.0) return false;
    next_in_s = rng.exponential(rate_hz);
    return true;
  }
};

struct FeatureWriter {
  const FeatureSchema& schema;
  std::vector<double>& values;

  void set(const std::string& name, double v) {
    if (auto idx = schema.find(name)) values[*idx] = v;
  }
};

SessionTrace generate_one(const ArchetypeConfig& config, Environment env, uint64_t trace_seed,
                          const std::string& participant, int trial_index) {
  const FeatureSchema schema = schema_for(env);
  const double rate = env == Environment::Immersive ? 30.0 : 10.0;
  Rng rng(trace_seed);

  double duration = rng.uniform(config.duration_min_s, config.duration_max_s);
  size_t n_frames = static_cast<size_t>(std::lround(duration * rate));
  // Never fall under the two-second cleaning threshold.
  n_frames = std::max(n_frames, static_cast<size_t>(2.0 * rate) + 1);

  SessionTrace trace;
  trace.participant_id = participant;
  trace.environment = env;
  trace.trial_index = trial_index;
  trace.sample_rate_hint = rate;
  if (config.category_code >= 0) trace.label = decode_category(config.category_code);
  trace.frames.reserve(n_frames);

  // Dwell schedule state.
  double total_weight = 0.0;
  for (const auto& d : config.dwell) total_weight += d.weight;
  auto pick_region = [&]() -> const std::string& {
    double r = rng.uniform() * total_weight;
    for (const auto& d : config.dwell) {
      r -= d.weight;
      if (r <= 0.0) return d.region;
    }
    return config.dwell.back().region;
  };

  const bool cycling = config.dwell_mode == DwellMode::Cycle && config.dwell.size() > 1;
  std::vector<std::pair<std::string, double>> cycle_plan;
  if (cycling) {
    double planned = static_cast<double>(n_frames) / rate;
    double rounds = static_cast<double>(config.dwell_cycles);
    for (size_t round = 0; round < config.dwell_cycles; ++round)
      for (const auto& d : config.dwell)
        cycle_plan.emplace_back(d.region, planned * (d.weight / total_weight) / rounds *
                                              rng.uniform(0.85, 1.15));
  }
  size_t cycle_pos = 0;
  std::string current_region = cycling ? cycle_plan.front().first : pick_region();
  double dwell_left = cycling ? cycle_plan.front().second
                              : std::max(0.4, rng.exponential(1.0 / config.dwell_mean_s));

  // Kinematic state.
  auto stand_for = [&](const std::string& region) {
    std::array<double, 3> p = stand_points().at(region);
    for (int a = 0; a < 3; ++a) p[a] += config.stand_offset[a];
    return p;
  };
  std::array<double, 3> position = stand_for(current_region);
  position[0] += rng.normal(0.0, 0.2);
  position[2] += rng.normal(0.0, 0.2);
  std::array<double, 3> gaze_target = point_in_box(regions().at(current_region), rng);
  double retarget_left = 0.0;
  std::array<double, 2> mouse = {0.5, 0.5};

  // Interaction state.
  EventStream select{config.rates.select_hz}, deselect{config.rates.deselect_hz},
      clear{config.rates.clear_hz}, attribute{config.rates.attribute_hz},
      slider{config.rates.slider_hz}, voice{config.rates.voice_hz};
  for (auto* s : {&select, &deselect, &clear, &attribute, &slider, &voice}) s->prime(rng);

  std::vector<int> selected;              // state indices, newest last
  std::array<int, 4> chart_slots{0, 0, 0, 0};  // state index + 1, 0 when free
  for (size_t s = 0; s < std::min<size_t>(config.initial_selections, 4); ++s) {
    int state = static_cast<int>(rng.uniform_index(50));
    if (std::find(selected.begin(), selected.end(), state) != selected.end()) continue;
    selected.push_back(state);
    chart_slots[s] = state + 1;
  }
  double slider_value = config.slider_low;
  int attribute_value = 0;
  double obj_hold_left = 0.0;
  std::array<double, 3> obj_point{0.0, 0.0, 0.0};
  double air_tap_end_in = -1.0;

  const double dt = 1.0 / rate;
  const double sigma = config.noise_sigma;

  for (size_t k = 0; k < n_frames; ++k) {
    double t = static_cast<double>(k) * dt;

    dwell_left -= dt;
    if (dwell_left <= 0.0) {
      if (cycling) {
        if (cycle_pos + 1 < cycle_plan.size()) ++cycle_pos;
        current_region = cycle_plan[cycle_pos].first;
        dwell_left = cycle_plan[cycle_pos].second;
      } else {
        current_region = pick_region();
        dwell_left = std::max(0.4, rng.exponential(1.0 / config.dwell_mean_s));
      }
      retarget_left = 0.0;
    }
    retarget_left -= dt;
    if (retarget_left <= 0.0) {
      gaze_target = point_in_box(regions().at(current_region), rng);
      retarget_left = rng.uniform(0.4, 1.4);
    }

    const bool at_selectable = current_region == "choropleth" || current_region == "charts";
    const bool at_panel = current_region == "panel";

    bool ev_select = select.step(at_selectable ? dt : 0.0, rng);
    bool ev_deselect = deselect.step(at_selectable && !selected.empty() ? dt : 0.0, rng);
    bool ev_clear = clear.step(at_panel && !selected.empty() ? dt : 0.0, rng);
    bool ev_attribute = attribute.step(at_panel ? dt : 0.0, rng);
    bool ev_slider = slider.step(at_panel ? dt : 0.0, rng);
    bool ev_voice = voice.step(dt, rng);

    if (ev_select && current_region == "choropleth") {
      int state = static_cast<int>(rng.uniform_index(50));
      auto it = std::find(selected.begin(), selected.end(), state);
      if (it == selected.end()) {
        selected.push_back(state);
        for (auto& slot : chart_slots)  // first free slot, others untouched
          if (slot == 0) {
            slot = state + 1;
            break;
          }
      }
    }
    if (ev_deselect && !selected.empty()) {
      size_t which = rng.uniform_index(selected.size());
      int state = selected[which];
      selected.erase(selected.begin() + static_cast<long>(which));
      for (auto& slot : chart_slots)
        if (slot == state + 1) slot = 0;
    }
    if (ev_clear) {
      selected.clear();
      chart_slots = {0, 0, 0, 0};
    }
    if (ev_attribute) attribute_value = static_cast<int>(rng.uniform_index(3));
    if (ev_slider) slider_value = rng.uniform(config.slider_low, config.slider_high);

    bool any_interaction = ev_select || ev_deselect || ev_clear || ev_attribute || ev_slider;
    if (any_interaction) {
      obj_hold_left = rng.uniform(0.3, 0.9);
      const RegionBox& box = regions().at(current_region);
      obj_point = point_in_box(box, rng, 0.85);
      if (env == Environment::Immersive && ev_select) air_tap_end_in = rng.uniform(0.1, 0.3);
    }
    obj_hold_left -= dt;

    // Head / body kinematics toward the current stand point.
    const auto stand = stand_for(current_region);
    for (int a = 0; a < 3; ++a) {
      position[a] += 1.2 * (stand[a] - position[a]) * dt +
                     (0.10 + sigma) * std::sqrt(dt) * rng.normal();
    }
    std::array<double, 3> forward = normalize3({gaze_target[0] - position[0] + 0.03 * rng.normal(),
                                                gaze_target[1] - position[1] + 0.03 * rng.normal(),
                                                gaze_target[2] - position[2] + 0.03 * rng.normal()});
    std::array<double, 3> up = normalize3(
        {0.06 * rng.normal() - 0.15 * forward[0], 1.0 + 0.04 * rng.normal(), 0.06 * rng.normal() - 0.15 * forward[2]});

    BehaviorFrame frame;
    frame.timestamp = t;
    frame.values.assign(schema.dimension(), 0.0);
    FeatureWriter w{schema, frame.values};

    if (env == Environment::Immersive) {
      if (ev_select) {
        w.set("tap", 1.0);
        w.set("air_tap_start", 1.0);
        if (rng.uniform() < 0.4) w.set("gaze_select", 1.0);
      }
      if (air_tap_end_in >= 0.0) {
        air_tap_end_in -= dt;
        if (air_tap_end_in < 0.0) w.set("air_tap_end", 1.0);
      }
      if (ev_deselect) w.set("deselect", 1.0);
      if (ev_clear) w.set("clear", 1.0);
      if (ev_voice) w.set("voice_command", 1.0);
      w.set("gaze_point.x", gaze_target[0] + sigma * rng.normal());
      w.set("gaze_point.y", gaze_target[1] + sigma * rng.normal());
      w.set("gaze_point.z", gaze_target[2] + sigma * rng.normal());
      w.set("gaze_target_kind", static_cast<double>(region_code(current_region)));
      w.set("gaze_target_index",
            current_region == "choropleth" ? static_cast<double>(rng.uniform_index(50)) : 0.0);
      w.set("position.x", position[0]);
      w.set("position.y", position[1]);
      w.set("position.z", position[2]);
      w.set("forward.x", forward[0]);
      w.set("forward.y", forward[1]);
      w.set("forward.z", forward[2]);
      w.set("up.x", up[0]);
      w.set("up.y", up[1]);
      w.set("up.z", up[2]);
      if (obj_hold_left > 0.0) {
        w.set("objPosition.x", obj_point[0]);
        w.set("objPosition.y", obj_point[1]);
        w.set("objPosition.z", obj_point[2]);
      }
      w.set("selected_time", slider_value);
      w.set("selected_attribute", static_cast<double>(attribute_value));
      w.set("selected_state.z", selected.empty() ? 0.0 : state_centroid(selected.back())[2]);
    } else {
      if (any_interaction) w.set("click", 1.0);
      const auto& sbox = screen_boxes().at(current_region);
      double tx = 0.5 * (sbox[0] + sbox[1]), ty = 0.5 * (sbox[2] + sbox[3]);
      mouse[0] += 2.0 * (tx - mouse[0]) * dt + (0.06 + sigma) * std::sqrt(dt) * rng.normal();
      mouse[1] += 2.0 * (ty - mouse[1]) * dt + (0.06 + sigma) * std::sqrt(dt) * rng.normal();
      mouse[0] = std::clamp(mouse[0], 0.0, 1.0);
      mouse[1] = std::clamp(mouse[1], 0.0, 1.0);
      w.set("mouse.x", mouse[0]);
      w.set("mouse.y", mouse[1]);
    }

    if (ev_attribute) w.set("attribute_switch", 1.0);
    if (ev_slider) w.set("time_slider_change", 1.0);
    if (!selected.empty()) {
      int state = selected.back();
      auto c = state_centroid(state);
      w.set("selected_state_index", static_cast<double>(state + 1));
      w.set("selected_state.x", c[0]);
      w.set("selected_state.y", c[1]);
    }
    for (int s = 0; s < 4; ++s)
      w.set("chart_slot_" + std::to_string(s), static_cast<double>(chart_slots[s]));

    trace.frames.push_back(std::move(frame));
  }
  return trace;
}

}  // namespace

const RegionBox& region_box(const std::string& name) {
  auto it = regions().find(name);
  if (it == regions().end()) fail(ErrorCode::InvalidArgument, "unknown region '" + name + "'");
  return it->second;
}

const std::array<double, 4>& region_screen_box(const std::string& name) {
  auto it = screen_boxes().find(name);
  if (it == screen_boxes().end()) fail(ErrorCode::InvalidArgument, "unknown region '" + name + "'");
  return it->second;
}

void ArchetypeConfig::validate() const {
  if (category_code >= 0) decode_category(category_code);
  if (!(duration_min_s >= 2.0 && duration_max_s <= 300.0 && duration_min_s <= duration_max_s))
    fail(ErrorCode::InvalidConfig, "duration range must lie within [2, 300] s");
  if (noise_sigma < 0.0) fail(ErrorCode::InvalidConfig, "noise sigma must be >= 0");
  if (dwell.empty()) fail(ErrorCode::InvalidConfig, "at least one dwell region required");
  double total = 0.0;
  for (const auto& d : dwell) {
    if (regions().find(d.region) == regions().end())
      fail(ErrorCode::InvalidConfig, "unknown dwell region '" + d.region + "'");
    if (d.weight < 0.0) fail(ErrorCode::InvalidConfig, "dwell weight must be >= 0");
    total += d.weight;
  }
  if (total <= 0.0) fail(ErrorCode::InvalidConfig, "dwell weights sum to zero");
  if (dwell_mean_s <= 0.0) fail(ErrorCode::InvalidConfig, "dwell mean must be positive");
  if (dwell_cycles < 1) fail(ErrorCode::InvalidConfig, "dwell cycles must be >= 1");
  for (double r : {rates.select_hz, rates.deselect_hz, rates.clear_hz, rates.attribute_hz,
                   rates.slider_hz, rates.voice_hz})
    if (r < 0.0) fail(ErrorCode::InvalidConfig, "event rates must be >= 0");
  if (!(0.0 <= slider_low && slider_low <= slider_high && slider_high <= 1.0))
    fail(ErrorCode::InvalidConfig, "slider range must satisfy 0 <= low <= high <= 1");
}

static json archetype_to_json_value(const ArchetypeConfig& c) {
  json dwell = json::array();
  for (const auto& d : c.dwell) dwell.push_back({{"region", d.region}, {"weight", d.weight}});
  return json{{"category_code", c.category_code},
              {"duration_s", {c.duration_min_s, c.duration_max_s}},
              {"noise_sigma", c.noise_sigma},
              {"dwell", dwell},
              {"dwell_mode", c.dwell_mode == DwellMode::Cycle ? "cycle" : "random"},
              {"dwell_cycles", c.dwell_cycles},
              {"dwell_mean_s", c.dwell_mean_s},
              {"rates",
               {{"select_hz", c.rates.select_hz},
                {"deselect_hz", c.rates.deselect_hz},
                {"clear_hz", c.rates.clear_hz},
                {"attribute_hz", c.rates.attribute_hz},
                {"slider_hz", c.rates.slider_hz},
                {"voice_hz", c.rates.voice_hz}}},
              {"slider_range", {c.slider_low, c.slider_high}},
              {"initial_selections", c.initial_selections},
              {"stand_offset", {c.stand_offset[0], c.stand_offset[1], c.stand_offset[2]}}};
}

static ArchetypeConfig archetype_from_json_value(const json& j) {
  ArchetypeConfig c;
  c.category_code = j.at("category_code").get<int>();
  c.duration_min_s = j.at("duration_s")[0].get<double>();
  c.duration_max_s = j.at("duration_s")[1].get<double>();
  c.noise_sigma = j.value("noise_sigma", 0.02);
  c.dwell.clear();
  for (const auto& d : j.at("dwell"))
    c.dwell.push_back({d.at("region").get<std::string>(), d.at("weight").get<double>()});
  c.dwell_mode = j.value("dwell_mode", std::string("random")) == "cycle" ? DwellMode::Cycle
                                                                         : DwellMode::Random;
  c.dwell_cycles = j.value("dwell_cycles", size_t{3});
  c.dwell_mean_s = j.value("dwell_mean_s", 2.5);
  if (j.contains("rates")) {
    const auto& r = j.at("rates");
    c.rates.select_hz = r.value("select_hz", 0.3);
    c.rates.deselect_hz = r.value("deselect_hz", 0.05);
    c.rates.clear_hz = r.value("clear_hz", 0.01);
    c.rates.attribute_hz = r.value("attribute_hz", 0.05);
    c.rates.slider_hz = r.value("slider_hz", 0.05);
    c.rates.voice_hz = r.value("voice_hz", 0.02);
  }
  if (j.contains("slider_range")) {
    c.slider_low = j.at("slider_range")[0].get<double>();
    c.slider_high = j.at("slider_range")[1].get<double>();
  }
  c.initial_selections = j.value("initial_selections", size_t{0});
  if (j.contains("stand_offset"))
    for (int a = 0; a < 3; ++a) c.stand_offset[static_cast<size_t>(a)] = j.at("stand_offset")[a].get<double>();
  c.validate();
  return c;
}

std::string archetypes_to_json(const std::vector<ArchetypeConfig>& configs) {
  json arr = json::array();
  for (const auto& c : configs) arr.push_back(archetype_to_json_value(c));
  return arr.dump(2) + "\n";
}

std::vector<ArchetypeConfig> archetypes_from_json(const std::string& text) {
  json doc = json::parse(text);
  std::vector<ArchetypeConfig> configs;
  for (const auto& j : doc) configs.push_back(archetype_from_json_value(j));
  return configs;
}

std::vector<SessionTrace> generate(const ArchetypeConfig& config, int n_per_class, uint64_t seed,
                                   Environment env) {
  if (n_per_class < 1) fail(ErrorCode::InvalidConfig, "n_per_class must be >= 1");
  config.validate();
  std::vector<SessionTrace> traces(static_cast<size_t>(n_per_class));
  std::string participant =
      config.category_code >= 0 ? "a" + std::to_string(config.category_code) : "open";
  uint64_t class_stream =
      config.category_code >= 0 ? static_cast<uint64_t>(config.category_code) + 1 : 0;
  uint64_t class_seed = derive_seed(seed, class_stream);
  for (int i = 0; i < n_per_class; ++i)
    traces[static_cast<size_t>(i)] =
        generate_one(config, env, derive_seed(class_seed, static_cast<uint64_t>(i)), participant, i);
  return traces;
}

std::vector<SessionTrace> generate_set(const std::vector<ArchetypeConfig>& configs,
                                       int n_per_class, uint64_t seed, Environment env, int jobs) {
  if (n_per_class < 1) fail(ErrorCode::InvalidConfig, "n_per_class must be >= 1");
  for (const auto& c : configs) c.validate();
  std::vector<SessionTrace> traces(configs.size() * static_cast<size_t>(n_per_class));
  parallel_for(traces.size(), jobs, [&](size_t idx) {
    size_t ci = idx / static_cast<size_t>(n_per_class);
    int ti = static_cast<int>(idx % static_cast<size_t>(n_per_class));
    const auto& config = configs[ci];
    std::string participant =
        config.category_code >= 0 ? "a" + std::to_string(config.category_code) : "open";
    uint64_t class_stream =
        config.category_code >= 0 ? static_cast<uint64_t>(config.category_code) + 1 : 0;
    uint64_t class_seed = derive_seed(seed, class_stream);
    traces[idx] = generate_one(config, env, derive_seed(class_seed, static_cast<uint64_t>(ti)),
                               participant, ti);
  });
  return traces;
}

std::vector<GeneratedOpenTrace> generate_openmix(const std::vector<ArchetypeConfig>& archetypes,
                                                 int n_traces, uint64_t seed, Environment env,
                                                 double segment_min_s, double segment_max_s,
                                                 double growth) {
  if (n_traces < 1) fail(ErrorCode::InvalidConfig, "n_traces must be >= 1");
  if (archetypes.empty()) fail(ErrorCode::InvalidConfig, "openmix needs at least one archetype");
  if (growth < 1.0) fail(ErrorCode::InvalidConfig, "growth must be >= 1");
  for (const auto& c : archetypes) c.validate();

  std::vector<GeneratedOpenTrace> out(static_cast<size_t>(n_traces));
  for (int i = 0; i < n_traces; ++i) {
    uint64_t trace_seed = derive_seed(seed, 0x9000 + static_cast<uint64_t>(i));
    Rng rng(trace_seed);
    std::vector<size_t> order(archetypes.size());
    for (size_t k = 0; k < order.size(); ++k) order[k] = k;
    rng.shuffle(order);

    GeneratedOpenTrace gen;
    gen.trace.participant_id = "open";
    gen.trace.environment = env;
    gen.trace.trial_index = i;
    gen.trace.sample_rate_hint = env == Environment::Immersive ? 30.0 : 10.0;

    double t_offset = 0.0;
    const double dt = 1.0 / gen.trace.sample_rate_hint;
    for (size_t k = 0; k < order.size(); ++k) {
      ArchetypeConfig segment_config = archetypes[order[k]];
      double scale = std::pow(growth, static_cast<double>(k));
      segment_config.duration_min_s = std::min(segment_min_s * scale, 300.0);
      segment_config.duration_max_s = std::min(segment_max_s * scale, 300.0);
      int code = segment_config.category_code;
      segment_config.category_code = -1;  // frames stay unlabeled
      SessionTrace piece = generate_one(segment_config, env,
                                        derive_seed(trace_seed, k + 1), "open", i);
      OpenMixSegment span;
      span.t_start_s = t_offset;
      span.category_code = code;
      span.space_code = code >= 0 ? decode_category(code).space_code() : -1;
      for (auto& frame : piece.frames) {
        frame.timestamp += t_offset;
        gen.trace.frames.push_back(std::move(frame));
      }
      t_offset = gen.trace.frames.back().timestamp + dt;
      span.t_end_s = gen.trace.frames.back().timestamp;
      gen.segments.push_back(span);
    }
    out[static_cast<size_t>(i)] = std::move(gen);
  }
  return out;
}

namespace {

ArchetypeConfig space_base(Space space) {
  ArchetypeConfig c;
  switch (space) {
    case Space::Spatial:
      c.dwell = {{"choropleth", 1.0}};
      c.rates = {0.8, 0.12, 0.0, 0.0, 0.0, 0.02};
      c.duration_min_s = 5.0;
      c.duration_max_s = 8.0;
      c.dwell_mean_s = 3.0;
      c.slider_low = 0.0;
      c.slider_high = 0.0;
      break;
    case Space::Temporal:
      c.dwell = {{"charts", 1.0}};
      c.rates = {0.3, 0.05, 0.0, 0.0, 0.0, 0.02};
      c.duration_min_s = 8.0;
      c.duration_max_s = 12.0;
      c.dwell_mean_s = 3.5;
      c.slider_low = 0.0;
      c.slider_high = 0.0;
      c.initial_selections = 2;
      break;
    default:
      c.dwell = {{"choropleth", 0.40}, {"charts", 0.34}, {"panel", 0.26}};
      c.dwell_mode = DwellMode::Cycle;
      c.dwell_cycles = 3;
      c.rates = {0.45, 0.06, 0.03, 0.35, 0.45, 0.04};
      c.duration_min_s = 13.0;
      c.duration_max_s = 18.0;
      c.dwell_mean_s = 1.6;
      c.slider_low = 0.1;
      c.slider_high = 0.9;
      break;
  }
  return c;
}

}  // namespace

std::vector<ArchetypeConfig> preset_spaces3() {
  ArchetypeConfig spatial = space_base(Space::Spatial);
  spatial.category_code = 4;
  ArchetypeConfig temporal = space_base(Space::Temporal);
  temporal.category_code = 13;
  ArchetypeConfig combined = space_base(Space::Combined);
  combined.category_code = 27;
  return {spatial, temporal, combined};
}

std::vector<ArchetypeConfig> preset_tasks30() {
  std::vector<ArchetypeConfig> configs;
  for (int code : classification_category_codes()) {
    TaskLabel label = decode_category(code);
    ArchetypeConfig c = space_base(label.space);
    c.category_code = code;
    // Task types within a space differ by pace: higher types are the
    // longer, busier explorations.
    double type = static_cast<double>(label.task_type);
    double pace = 0.45 + 0.17 * type;
    c.rates.select_hz *= pace;
    c.rates.deselect_hz *= pace;
    c.rates.attribute_hz *= pace;
    c.rates.slider_hz *= pace;
    c.duration_min_s = std::min(60.0, c.duration_min_s + 1.1 * type);
    c.duration_max_s = std::min(90.0, c.duration_max_s + 1.6 * type);
    c.dwell_mean_s = std::max(0.8, c.dwell_mean_s * (0.55 + 0.14 * type));
    if (label.space == Space::Combined) {
      double panel = 0.12 + 0.025 * type;
      c.dwell = {{"choropleth", (1.0 - panel) * (0.35 + 0.03 * type)},
                 {"charts", (1.0 - panel) * (0.65 - 0.03 * type)},
                 {"panel", panel}};
      c.dwell_cycles = 2 + static_cast<size_t>(label.task_type) % 3;
      c.slider_high = 0.35 + 0.065 * type;
    }
    configs.push_back(c);
  }
  return configs;
}

std::vector<ArchetypeConfig> preset_openmix() {
  std::vector<ArchetypeConfig> configs;
  for (const auto& c : preset_tasks30())
    if (c.category_code == 4 || c.category_code == 7 || c.category_code == 13)
      configs.push_back(c);
  return configs;
}

std::vector<ArchetypeConfig> preset_by_name(const std::string& name) {
  if (name == "spaces3") return preset_spaces3();
  if (name == "tasks30") return preset_tasks30();
  if (name == "openmix") return preset_openmix();
  fail(ErrorCode::InvalidConfig, "unknown preset '" + name + "'");
}

std::pair<std::vector<SessionTrace>, FeatureSchema> inject_noise_feature(
    std::vector<SessionTrace> traces, const FeatureSchema& schema, const std::string& name,
    uint64_t seed, FeatureGroup group) {
  SchemaEntry entry;
  entry.name = name;
  entry.group = group;
  entry.kind = FeatureKind::Continuous;
  entry.desktop = schema.environment() == Environment::Desktop;
  entry.immersive = schema.environment() == Environment::Immersive;
  FeatureSchema extended = schema.with_feature(entry);  // throws DuplicateFeature

  for (size_t i = 0; i < traces.size(); ++i) {
    Rng rng(derive_seed(seed, 0xA015EULL + i));
    for (auto& frame : traces[i].frames) frame.values.push_back(rng.uniform());
  }
  return {std::move(traces), std::move(extended)};
}

}  // namespace provts

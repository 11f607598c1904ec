#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "provts/ingest.hpp"
#include "provts/knn.hpp"
#include "provts/synth.hpp"
#include "provts/transform.hpp"

using namespace provts;

namespace {

std::string traces_to_csv(const std::vector<SessionTrace>& traces, const FeatureSchema& schema) {
  std::ostringstream out;
  write_log_csv(out, traces, schema);
  return out.str();
}

}  // namespace

TEST_CASE("generation is deterministic and jobs-independent") {
  auto configs = preset_spaces3();
  FeatureSchema schema = schema_for(Environment::Immersive);
  auto a = generate_set(configs, 10, 7, Environment::Immersive, 1);
  auto b = generate_set(configs, 10, 7, Environment::Immersive, 1);
  auto c = generate_set(configs, 10, 7, Environment::Immersive, 4);
  CHECK(traces_to_csv(a, schema) == traces_to_csv(b, schema));
  CHECK(traces_to_csv(a, schema) == traces_to_csv(c, schema));

  // single-archetype entry point agrees with the set generator
  auto single = generate(configs[0], 10, 7, Environment::Immersive);
  auto from_set = std::vector<SessionTrace>(a.begin(), a.begin() + 10);
  CHECK(traces_to_csv(single, schema) == traces_to_csv(from_set, schema));
}

TEST_CASE("spatial archetype keeps objPosition inside the choropleth box") {
  auto spatial = preset_spaces3()[0];
  auto traces = generate(spatial, 10, 42, Environment::Immersive);
  FeatureSchema schema = schema_for(Environment::Immersive);
  size_t ox = schema.index_of("objPosition.x");
  size_t oy = schema.index_of("objPosition.y");
  size_t oz = schema.index_of("objPosition.z");
  const RegionBox& box = region_box("choropleth");

  size_t nonzero = 0, inside = 0;
  for (const auto& trace : traces)
    for (const auto& frame : trace.frames) {
      double x = frame.values[ox], y = frame.values[oy], z = frame.values[oz];
      if (x == 0.0 && y == 0.0 && z == 0.0) continue;
      ++nonzero;
      if (box.contains(x, y, z)) ++inside;
    }
  REQUIRE(nonzero > 0);
  CHECK(static_cast<double>(inside) / static_cast<double>(nonzero) >= 0.9);
}

TEST_CASE("duration range [5,10] at 30 Hz yields frame counts in [150,300]") {
  ArchetypeConfig config;
  config.category_code = 4;
  config.duration_min_s = 5.0;
  config.duration_max_s = 10.0;
  auto traces = generate(config, 40, 11, Environment::Immersive);
  for (const auto& t : traces) {
    CHECK(t.frames.size() >= 150);
    CHECK(t.frames.size() <= 300);
  }
}

TEST_CASE("every generated trace passes validation and the 2 s filter") {
  FeatureSchema immersive = schema_for(Environment::Immersive);
  FeatureSchema desktop = schema_for(Environment::Desktop);
  for (const auto& preset : {preset_spaces3(), preset_tasks30()}) {
    auto traces = generate_set(preset, 2, 5, Environment::Immersive, 2);
    for (const auto& t : traces) {
      CHECK_NOTHROW(validate_trace(t, immersive));
      CHECK(t.duration_s() >= 2.0);
    }
  }
  auto desktop_traces = generate_set(preset_spaces3(), 2, 5, Environment::Desktop, 2);
  for (const auto& t : desktop_traces) {
    CHECK_NOTHROW(validate_trace(t, desktop));
    CHECK(t.duration_s() >= 2.0);
  }
}

TEST_CASE("class-conditional separability: inter-class DTW exceeds intra-class") {
  auto traces = generate_set(preset_spaces3(), 10, 3, Environment::Immersive, 2);
  FeatureSchema schema = schema_for(Environment::Immersive);
  FeatureTensor tensor = build_dataset(traces, schema, TransformConfig{});
  double intra = 0.0, inter = 0.0;
  size_t n_intra = 0, n_inter = 0;
  for (size_t i = 0; i < tensor.n; ++i)
    for (size_t j = i + 1; j < tensor.n; ++j) {
      double d = dtw_distance(&tensor.data[i * tensor.l * tensor.d], tensor.l,
                              &tensor.data[j * tensor.l * tensor.d], tensor.l, tensor.d);
      if (tensor.labels_space[i] == tensor.labels_space[j]) {
        intra += d;
        ++n_intra;
      } else {
        inter += d;
        ++n_inter;
      }
    }
  CHECK(inter / static_cast<double>(n_inter) > intra / static_cast<double>(n_intra));
}

TEST_CASE("openmix concatenates one segment per archetype with ground truth") {
  auto open = generate_openmix(preset_openmix(), 4, 99, Environment::Immersive);
  REQUIRE(open.size() == 4);
  FeatureSchema schema = schema_for(Environment::Immersive);
  for (const auto& g : open) {
    CHECK(g.segments.size() == 3);
    CHECK_FALSE(g.trace.label.has_value());
    CHECK_NOTHROW(validate_trace(g.trace, schema));
    // spans tile the trace
    CHECK(g.segments.front().t_start_s == doctest::Approx(g.trace.frames.front().timestamp));
    CHECK(g.segments.back().t_end_s == doctest::Approx(g.trace.frames.back().timestamp));
    for (size_t k = 1; k < g.segments.size(); ++k)
      CHECK(g.segments[k].t_start_s > g.segments[k - 1].t_start_s);
    // each archetype contributes one segment; single-space codes only
    std::multiset<int> codes;
    for (const auto& s : g.segments) codes.insert(s.category_code);
    CHECK(codes == std::multiset<int>{4, 7, 13});
    // later segments grow
    double d0 = g.segments[0].t_end_s - g.segments[0].t_start_s;
    double d2 = g.segments[2].t_end_s - g.segments[2].t_start_s;
    CHECK(d2 > 1.5 * d0);
  }
}

TEST_CASE("noise feature injection") {
  FeatureSchema schema = schema_for(Environment::Immersive);
  auto traces = generate_set(preset_spaces3(), 4, 21, Environment::Immersive, 1);

  auto [noisy, extended] = inject_noise_feature(traces, schema, "noise0", 5);
  CHECK(extended.dimension() == 37);
  CHECK(extended.index_of("noise0") == 36);
  for (const auto& t : noisy)
    for (const auto& f : t.frames) {
      CHECK(f.values.size() == 37);
      CHECK(f.values[36] >= 0.0);
      CHECK(f.values[36] < 1.0);
    }
  CHECK_THROWS_AS(inject_noise_feature(noisy, extended, "noise0", 5), Error);
}

TEST_CASE("injected noise is uncorrelated with labels over 500 traces") {
  ArchetypeConfig a, b;
  a.category_code = 4;
  b.category_code = 13;
  a.duration_min_s = b.duration_min_s = 2.2;
  a.duration_max_s = b.duration_max_s = 3.0;
  std::vector<SessionTrace> traces = generate_set({a, b}, 250, 17, Environment::Immersive, 2);
  FeatureSchema schema = schema_for(Environment::Immersive);
  auto [noisy, extended] = inject_noise_feature(traces, schema, "noise0", 31);

  // Pearson correlation between the per-trace mean noise value and the label.
  std::vector<double> xs, ys;
  for (const auto& t : noisy) {
    double mean = 0.0;
    for (const auto& f : t.frames) mean += f.values[36];
    xs.push_back(mean / static_cast<double>(t.frames.size()));
    ys.push_back(static_cast<double>(t.label->category_code()));
  }
  double mx = 0, my = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(ys.size());
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  double r = sxy / std::sqrt(sxx * syy);
  CHECK(std::abs(r) < 0.1);
}

TEST_CASE("archetype configs round-trip through JSON") {
  auto configs = preset_tasks30();
  auto parsed = archetypes_from_json(archetypes_to_json(configs));
  REQUIRE(parsed.size() == configs.size());
  FeatureSchema schema = schema_for(Environment::Immersive);
  auto a = generate_set(configs, 2, 9, Environment::Immersive, 1);
  auto b = generate_set(parsed, 2, 9, Environment::Immersive, 1);
  CHECK(traces_to_csv(a, schema) == traces_to_csv(b, schema));
}

TEST_CASE("invalid configs are rejected") {
  ArchetypeConfig config;
  SUBCASE("duration below 2 s") {
    config.duration_min_s = 1.0;
    CHECK_THROWS_AS(config.validate(), Error);
  }
  SUBCASE("negative rate") {
    config.rates.select_hz = -0.1;
    CHECK_THROWS_AS(config.validate(), Error);
  }
  SUBCASE("negative noise") {
    config.noise_sigma = -1.0;
    CHECK_THROWS_AS(config.validate(), Error);
  }
  SUBCASE("unknown region") {
    config.dwell = {{"lobby", 1.0}};
    CHECK_THROWS_AS(config.validate(), Error);
  }
  SUBCASE("bad n_per_class") {
    CHECK_THROWS_AS(generate(config, 0, 1, Environment::Immersive), Error);
  }
  SUBCASE("tasks30 covers every classification category once") {
    auto configs = preset_tasks30();
    std::set<int> codes;
    for (const auto& c : configs) codes.insert(c.category_code);
    CHECK(codes.size() == classification_category_codes().size());
  }
}

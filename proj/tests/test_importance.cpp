#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "provts/importance.hpp"
#include "provts/synth.hpp"
#include "provts/transform.hpp"

using namespace provts;

namespace {

/// Three archetypes identical in every panel interaction; classes differ
/// only in where the user stands, so class signal lives purely in the
/// immersive group (position / orientation).
std::vector<ArchetypeConfig> immersive_signal_archetypes() {
  ArchetypeConfig base;
  base.duration_min_s = 4.0;
  base.duration_max_s = 6.0;
  base.dwell = {{"choropleth", 1.0}};
  base.rates = {0.5, 0.08, 0.0, 0.0, 0.0, 0.02};

  ArchetypeConfig a = base, b = base, c = base;
  a.category_code = 4;
  a.stand_offset = {0.0, 0.0, 0.0};
  b.category_code = 14;
  b.stand_offset = {1.1, -0.45, -0.7};
  c.category_code = 24;
  c.stand_offset = {-1.1, 0.45, -0.9};
  return {a, b, c};
}

struct Fixture {
  FeatureTensor tensor;
  ClassifierConfig config;
  ClassifierFactory factory;
};

Fixture make_fixture(int per_class, uint64_t seed, bool with_noise) {
  auto traces = generate_set(immersive_signal_archetypes(), per_class, seed,
                             Environment::Immersive, 2);
  FeatureSchema schema = schema_for(Environment::Immersive);
  if (with_noise) {
    auto [noisy, extended] = inject_noise_feature(std::move(traces), schema, "noise0", seed + 1);
    traces = std::move(noisy);
    schema = std::move(extended);
  }
  Fixture f;
  f.tensor = build_dataset(traces, schema, TransformConfig{});
  f.config.kind = ModelKind::Rocket;
  f.config.rocket.n_kernels = 150;
  f.config.seed = seed;
  f.config.jobs = 2;
  ClassifierConfig config = f.config;
  f.factory = [config] { return make_classifier(config); };
  return f;
}

}  // namespace

TEST_CASE("permute_feature moves whole per-sample series as blocks") {
  Rng rng(3);
  std::vector<float> data(4 * 5 * 6);
  for (auto& v : data) v = static_cast<float>(rng.uniform());
  auto tensor = helpers::make_tensor(4, 5, 6, {4, 13, 4, 13}, data);
  tensor.stats = {"acc", "mean", "std"};
  tensor.raw_features = {"r0", "r1"};  // 2 raw features x 3 stats = 6 columns

  std::vector<size_t> perm = {2, 3, 0, 1};
  auto permuted = permute_feature(tensor, 0, perm);
  for (size_t i = 0; i < 4; ++i)
    for (size_t s = 0; s < 5; ++s) {
      // raw 0 columns (0, 2, 4) move, raw 1 columns (1, 3, 5) stay
      for (size_t stat = 0; stat < 3; ++stat) {
        CHECK(permuted.at(i, s, stat * 2 + 0) == tensor.at(perm[i], s, stat * 2 + 0));
        CHECK(permuted.at(i, s, stat * 2 + 1) == tensor.at(i, s, stat * 2 + 1));
      }
    }

  SUBCASE("identity permutation changes nothing") {
    auto same = permute_feature(tensor, 1, {0, 1, 2, 3});
    CHECK(same.data == tensor.data);
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(permute_feature(tensor, 9, perm), Error);
    CHECK_THROWS_AS(permute_feature(tensor, 0, {0, 1}), Error);
  }
}

TEST_CASE("permuting an all-constant feature scores exactly zero") {
  auto fixture = make_fixture(5, 11, false);
  // selected_time is constant 0 for these archetypes (slider never moves)
  auto fitted = fixture.factory();
  fitted->fit(fixture.tensor, fixture.tensor.labels_space);
  PermFitOptions options;
  options.repeats = 3;
  options.mode = PermFitMode::Inference;
  double score = permfit_score(fixture.tensor, fixture.factory, fitted.get(), Scale::Space,
                               "selected_time", options, 5);
  CHECK(score == 0.0);

  SUBCASE("unknown feature") {
    CHECK_THROWS_AS(permfit_score(fixture.tensor, fixture.factory, fitted.get(), Scale::Space,
                                  "no_such_feature", options, 5),
                    Error);
  }
}

TEST_CASE("noise feature ranks below the signal-carrying immersive features") {
  auto fixture = make_fixture(8, 17, true);
  auto fitted = fixture.factory();
  fitted->fit(fixture.tensor, fixture.tensor.labels_space);
  PermFitOptions options;
  options.repeats = 5;
  options.mode = PermFitMode::Inference;
  std::vector<std::string> features = {"position.x", "position.z", "forward.x",
                                       "forward.z", "up.x", "noise0"};
  auto ranking = permfit_ranking(fixture.tensor, fixture.factory, fitted.get(), Scale::Space,
                                 features, options, 23);
  REQUIRE(ranking.size() == features.size());
  CHECK(ranking.back().feature == "noise0");
  for (const auto& e : ranking) CHECK(e.score >= 0.0);
  // ranks are a permutation of 1..n
  std::set<size_t> ranks;
  for (const auto& e : ranking) ranks.insert(e.rank);
  CHECK(ranks.size() == features.size());
  CHECK(*ranks.begin() == 1);
}

TEST_CASE("retrain-mode PermFIT also separates signal from noise") {
  auto fixture = make_fixture(5, 29, true);
  PermFitOptions options;
  options.repeats = 2;
  options.mode = PermFitMode::Retrain;
  options.cv_folds = 3;
  double signal = permfit_score(fixture.tensor, fixture.factory, nullptr, Scale::Space,
                                "position.x", options, 31);
  double noise = permfit_score(fixture.tensor, fixture.factory, nullptr, Scale::Space, "noise0",
                               options, 31);
  CHECK(signal > noise);
}

TEST_CASE("more repeats give a lower-variance score across reruns") {
  auto fixture = make_fixture(5, 41, false);
  auto fitted = fixture.factory();
  fitted->fit(fixture.tensor, fixture.tensor.labels_space);

  auto variance_of = [&](size_t repeats) {
    std::vector<double> scores;
    for (uint64_t seed = 0; seed < 10; ++seed) {
      PermFitOptions options;
      options.repeats = repeats;
      options.mode = PermFitMode::Inference;
      scores.push_back(permfit_score(fixture.tensor, fixture.factory, fitted.get(), Scale::Space,
                                     "position.x", options, seed));
    }
    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= static_cast<double>(scores.size());
    double var = 0.0;
    for (double s : scores) var += (s - mean) * (s - mean);
    return var / static_cast<double>(scores.size());
  };
  CHECK(variance_of(20) < variance_of(1));
}

TEST_CASE("leave-group-out: the immersive group carries the class signal") {
  auto fixture = make_fixture(7, 53, false);
  EvalReport full = cross_validate(fixture.tensor, fixture.factory, Scale::Space, 5, 53).report;
  REQUIRE(full.mean_accuracy > 0.9);  // sanity: the set is separable at all

  std::map<FeatureGroup, GroupImportance> deltas;
  for (FeatureGroup g :
       {FeatureGroup::Interaction, FeatureGroup::Selection, FeatureGroup::Immersive})
    deltas[g] = leave_group_out(fixture.tensor, fixture.factory, Scale::Space, g, 5, 53, &full);

  CHECK(deltas[FeatureGroup::Immersive].delta_accuracy() >
        deltas[FeatureGroup::Interaction].delta_accuracy());
  CHECK(deltas[FeatureGroup::Immersive].delta_accuracy() >
        deltas[FeatureGroup::Selection].delta_accuracy());
  // groups that are pure noise w.r.t. the labels barely move the score
  CHECK(std::abs(deltas[FeatureGroup::Interaction].delta_accuracy()) < 0.05);
  CHECK(std::abs(deltas[FeatureGroup::Selection].delta_accuracy()) < 0.05);
}

TEST_CASE("leaving out a group absent from the schema is an error") {
  auto traces = generate_set(preset_spaces3(), 3, 5, Environment::Desktop, 2);
  FeatureTensor tensor = build_dataset(traces, schema_for(Environment::Desktop), TransformConfig{});
  ClassifierConfig config;
  config.kind = ModelKind::Rocket;
  config.rocket.n_kernels = 50;
  CHECK_THROWS_AS(leave_group_out(tensor, [config] { return make_classifier(config); },
                                  Scale::Space, FeatureGroup::Immersive, 3, 1),
                  Error);
}

TEST_CASE("importance report JSON lists groups and the ranked features") {
  std::vector<GroupImportance> groups(1);
  groups[0].group = FeatureGroup::Immersive;
  groups[0].full_accuracy = 0.9;
  groups[0].reduced_accuracy = 0.4;
  std::vector<PermFitEntry> entries = {{"position.x", 0.5, 1}, {"noise0", 0.001, 2}};
  std::string json_text = importance_report_json(groups, entries);
  CHECK(json_text.find("\"immersive\"") != std::string::npos);
  CHECK(json_text.find("\"position.x\"") != std::string::npos);
  CHECK(json_text.find("0.5") != std::string::npos);
}

// Acceptance suite: one pass/fail line per criterion, every tolerance
// pinned here. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "provts/cli.hpp"
#include "provts/classifier.hpp"
#include "provts/cnn.hpp"
#include "provts/evaluate.hpp"
#include "provts/importance.hpp"
#include "provts/interpret.hpp"
#include "provts/knn.hpp"
#include "provts/linalg.hpp"
#include "provts/report.hpp"
#include "provts/rocket.hpp"
#include "provts/synth.hpp"
#include "provts/transform.hpp"

using namespace provts;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Criterion {
  std::string name;
  std::function<bool(std::string&)> check;
  double budget_s;  // 0 = no explicit budget
};

// ---------------------------------------------------------------- 1. DTW

bool dtw_oracle(std::string& detail) {
  Rng rng(2024);
  size_t pairs = 0;
  for (; pairs < 200; ++pairs) {
    size_t la = 1 + rng.uniform_index(8), lb = 1 + rng.uniform_index(8);
    size_t dim = 1 + rng.uniform_index(3);
    std::vector<double> a(la * dim), b(lb * dim);
    for (auto& v : a) v = static_cast<float>(rng.uniform(-2.0, 2.0));
    for (auto& v : b) v = static_cast<float>(rng.uniform(-2.0, 2.0));
    double fast = dtw_distance(a, b, dim);
    double slow = oracles::dtw_exhaustive(a, b, dim);
    double scale = std::max(1.0, std::abs(slow));
    if (std::abs(fast - slow) / scale > 1e-9) {
      detail = "pair " + std::to_string(pairs) + " differs: " + std::to_string(fast) + " vs " +
               std::to_string(slow);
      return false;
    }
  }
  detail = "200 pairs vs exhaustive enumeration within 1e-9";
  return true;
}

// ------------------------------------------------------- 2. convolutions

bool conv_oracles(std::string& detail) {
  Rng rng(77);
  for (int iter = 0; iter < 50; ++iter) {
    size_t flen = 1 + rng.uniform_index(8);
    size_t len = flen + rng.uniform_index(40);
    size_t channels = 1 + rng.uniform_index(6);
    size_t filters = 1 + rng.uniform_index(5);
    std::vector<double> input(len * channels), kernels(filters * flen * channels), bias(filters);
    for (auto& v : input) v = rng.uniform(-1.0, 1.0);
    for (auto& v : kernels) v = rng.uniform(-1.0, 1.0);
    for (auto& v : bias) v = rng.uniform(-1.0, 1.0);
    auto fast = conv1d_forward(input, len, channels, kernels, filters, flen, bias);
    auto slow = oracles::conv1d_naive(input, len, channels, kernels, filters, flen, bias);
    for (size_t i = 0; i < fast.size(); ++i)
      if (std::abs(fast[i] - slow[i]) > 1e-6) {
        detail = "conv1d diverges from the naive loop";
        return false;
      }
  }
  for (int iter = 0; iter < 50; ++iter) {
    size_t len = 16 + rng.uniform_index(100);
    size_t width = 1 + rng.uniform_index(10);
    std::vector<float> series(len * width);
    for (auto& v : series) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    RocketConfig config;
    config.n_kernels = 8;
    auto kernels = sample_kernels(len, width, config, 5000 + static_cast<uint64_t>(iter));
    for (const auto& k : kernels) {
      double ppv_a, max_a, ppv_b, max_b;
      apply_kernel(series.data(), len, width, k, ppv_a, max_a);
      oracles::rocket_kernel_naive(series, len, width, k, ppv_b, max_b);
      if (std::abs(ppv_a - ppv_b) > 1e-6 || std::abs(max_a - max_b) > 1e-6) {
        detail = "ROCKET kernel application diverges from the padded naive loop";
        return false;
      }
    }
  }
  detail = "100 random shapes, conv1d + ROCKET kernels within 1e-6";
  return true;
}

// --------------------------------------------------------- 3. gradients

bool cnn_gradients(std::string& detail) {
  CnnNet net;
  net.init_shapes(14, 5, 3, 4, 3);
  Rng rng(31);
  for (auto& p : net.params) p = rng.uniform(-0.5, 0.5);
  std::vector<float> batch(3 * 14 * 5);
  for (auto& v : batch) v = static_cast<float>(rng.uniform(0.0, 1.0));
  std::vector<size_t> targets = {0, 1, 2};

  auto batch_loss = [&]() {
    double loss = 0.0;
    for (size_t b = 0; b < 3; ++b) loss += net.loss_and_grad(&batch[b * 14 * 5], targets[b], nullptr);
    return loss / 3.0;
  };
  std::vector<double> grad(net.param_count(), 0.0);
  for (size_t b = 0; b < 3; ++b) net.loss_and_grad(&batch[b * 14 * 5], targets[b], &grad);
  for (auto& g : grad) g /= 3.0;

  const double eps = 1e-4;
  double worst = 0.0;
  for (size_t j = 0; j < net.param_count(); ++j) {
    double saved = net.params[j];
    net.params[j] = saved + eps;
    double up = batch_loss();
    net.params[j] = saved - eps;
    double down = batch_loss();
    net.params[j] = saved;
    double numeric = (up - down) / (2.0 * eps);
    double rel = std::abs(numeric - grad[j]) / std::max({std::abs(numeric), std::abs(grad[j]), 1e-8});
    worst = std::max(worst, rel);
    if (rel > 1e-3) {
      detail = "parameter " + std::to_string(j) + " relative error " + std::to_string(rel);
      return false;
    }
  }
  std::ostringstream out;
  out << net.param_count() << " parameters, worst relative error " << worst;
  detail = out.str();
  return true;
}

// ------------------------------------------------------------- 4. ridge

bool ridge_oracle(std::string& detail) {
  Rng rng(91);
  double worst_residual = 0.0;
  for (int iter = 0; iter < 50; ++iter) {
    size_t n = 6 + rng.uniform_index(20);
    size_t p = 2 + rng.uniform_index(8);
    std::vector<double> features(n * p);
    for (auto& v : features) v = rng.uniform(-1.0, 1.0);
    std::vector<int> labels(n);
    for (size_t i = 0; i < n; ++i) labels[i] = i % 2 == 0 ? 1 : 2;
    double alpha = std::pow(10.0, rng.uniform(-2.0, 2.0));
    RidgeConfig config;
    config.alpha_grid = {alpha};
    auto model = fit_ridge(features, n, p, labels, config, 33);

    for (size_t c = 0; c < model.classes.size(); ++c) {
      std::vector<double> z(n * p);
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < p; ++j)
          z[i * p + j] = (features[i * p + j] - model.feature_mean[j]) / model.feature_std[j];
      std::vector<double> gram(p * p, 0.0), rhs(p, 0.0);
      for (size_t a = 0; a < p; ++a)
        for (size_t b = 0; b < p; ++b)
          for (size_t i = 0; i < n; ++i) gram[a * p + b] += z[i * p + a] * z[i * p + b];
      for (size_t a = 0; a < p; ++a) gram[a * p + a] += alpha;
      for (size_t i = 0; i < n; ++i) {
        double y = labels[i] == model.classes[c] ? 1.0 : -1.0;
        for (size_t j = 0; j < p; ++j) rhs[j] += z[i * p + j] * y;
      }
      auto oracle = oracles::gauss_solve(gram, rhs, p);
      for (size_t j = 0; j < p; ++j)
        if (std::abs(model.beta[c * p + j] - oracle[j]) > 1e-8) {
          detail = "solution differs from Gaussian elimination at system " + std::to_string(iter);
          return false;
        }
    }
    worst_residual = std::max(worst_residual, ridge_residual_inf(features, n, p, labels, model));
  }
  // dual-path (p > n) residuals
  for (int iter = 0; iter < 10; ++iter) {
    size_t n = 6 + rng.uniform_index(6);
    size_t p = n + 5 + rng.uniform_index(40);
    std::vector<double> features(n * p);
    for (auto& v : features) v = rng.uniform(-1.0, 1.0);
    std::vector<int> labels(n);
    for (size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 3);
    RidgeConfig config;
    config.alpha_grid = {1.0};
    auto model = fit_ridge(features, n, p, labels, config, 7);
    worst_residual = std::max(worst_residual, ridge_residual_inf(features, n, p, labels, model));
  }
  if (worst_residual >= 1e-6) {
    detail = "residual " + std::to_string(worst_residual) + " >= 1e-6";
    return false;
  }
  std::ostringstream out;
  out << "50 systems match the dense oracle to 1e-8; worst residual " << worst_residual;
  detail = out.str();
  return true;
}

// --------------------------------------------------------- 5. transform

bool transform_conservation(std::string& detail) {
  std::vector<SchemaEntry> entries;
  for (int i = 0; i < 5; ++i)
    entries.push_back({"f" + std::to_string(i), FeatureGroup::Interaction,
                       FeatureKind::Continuous, true, true});
  FeatureSchema schema(Environment::Desktop, "fuzz", entries);
  Rng rng(1234);
  for (int iter = 0; iter < 1000; ++iter) {
    size_t frames = 1 + rng.uniform_index(600);
    SessionTrace trace;
    trace.participant_id = "f";
    trace.environment = Environment::Desktop;
    trace.trial_index = iter;
    for (size_t t = 0; t < frames; ++t) {
      BehaviorFrame frame;
      frame.timestamp = static_cast<double>(t) * 0.1;
      for (int f = 0; f < 5; ++f) frame.values.push_back(rng.uniform(-5.0, 5.0));
      trace.frames.push_back(std::move(frame));
    }
    auto acc = segment_accumulate(trace, 100);
    for (size_t f = 0; f < 5; ++f) {
      double in_total = 0.0, out_total = 0.0;
      for (const auto& fr : trace.frames) in_total += fr.values[f];
      for (size_t s = 0; s < 100; ++s) out_total += acc[s * 5 + f];
      double scale = std::max(1.0, std::abs(in_total));
      if (std::abs(in_total - out_total) / scale > 1e-9) {
        detail = "mass not conserved on fuzz iteration " + std::to_string(iter);
        return false;
      }
    }
    if (iter % 50 == 0) {
      FeatureTensor tensor = build_dataset({trace}, schema, TransformConfig{});
      if (tensor.n != 1 || tensor.l != 100 || tensor.d != 15) {
        detail = "shape contract violated";
        return false;
      }
      for (float v : tensor.data)
        if (v < 0.0f || v > 1.0f) {
          detail = "normalized value outside [0,1]";
          return false;
        }
    }
  }
  detail = "1000 fuzzed traces conserve totals to 1e-9; outputs in [0,1]; shape (n,100,3d)";
  return true;
}

// ------------------------------------------- 6. synthetic separability

ClassifierConfig model_config(ModelKind kind, uint64_t seed) {
  ClassifierConfig config;
  config.kind = kind;
  config.seed = seed;
  config.jobs = default_jobs();
  return config;
}

bool synthetic_separability(std::string& detail) {
  FeatureSchema schema = schema_for(Environment::Immersive);
  auto traces = generate_set(preset_spaces3(), 30, 7, Environment::Immersive, default_jobs());
  FeatureTensor tensor = build_dataset(traces, schema, TransformConfig{});

  std::ostringstream out;
  for (ModelKind kind : {ModelKind::Knn, ModelKind::Cnn, ModelKind::Rocket}) {
    ClassifierConfig config = model_config(kind, 7);
    auto cv = cross_validate(tensor, [&] { return make_classifier(config); }, Scale::Space, 5, 7,
                             to_string(kind));
    out << to_string(kind) << " space acc " << cv.report.mean_accuracy << "; ";
    if (cv.report.mean_accuracy < 0.95) {
      detail = out.str() + "-> below 0.95";
      return false;
    }
  }

  auto task_traces = generate_set(preset_tasks30(), 10, 7, Environment::Immersive, default_jobs());
  FeatureTensor task_tensor = build_dataset(task_traces, schema, TransformConfig{});
  ClassifierConfig rocket = model_config(ModelKind::Rocket, 7);
  auto cv = cross_validate(task_tensor, [&] { return make_classifier(rocket); }, Scale::Task, 5, 7,
                           "rocket");
  out << "rocket task acc " << cv.report.mean_accuracy;
  detail = out.str();
  return cv.report.mean_accuracy >= 5.0 * (1.0 / 30.0);
}

// ------------------------------------------------ 7. importance sanity

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

bool importance_sanity(std::string& detail) {
  std::ostringstream out;

  // leave-group-out on the immersive-only-signal dataset
  {
    auto traces = generate_set(immersive_signal_archetypes(), 10, 7, Environment::Immersive,
                               default_jobs());
    FeatureTensor tensor =
        build_dataset(traces, schema_for(Environment::Immersive), TransformConfig{});
    ClassifierConfig config = model_config(ModelKind::Rocket, 7);
    config.rocket.n_kernels = 300;
    ClassifierFactory factory = [&] { return make_classifier(config); };
    EvalReport full = cross_validate(tensor, factory, Scale::Space, 5, 7).report;
    std::map<FeatureGroup, double> delta;
    for (FeatureGroup g :
         {FeatureGroup::Interaction, FeatureGroup::Selection, FeatureGroup::Immersive})
      delta[g] = leave_group_out(tensor, factory, Scale::Space, g, 5, 7, &full).delta_accuracy();
    out << "dAcc immersive " << delta[FeatureGroup::Immersive] << ", interaction "
        << delta[FeatureGroup::Interaction] << ", selection " << delta[FeatureGroup::Selection]
        << "; ";
    if (!(delta[FeatureGroup::Immersive] > delta[FeatureGroup::Interaction] &&
          delta[FeatureGroup::Immersive] > delta[FeatureGroup::Selection])) {
      detail = out.str() + "-> immersive group does not dominate";
      return false;
    }
  }

  // The injected noise feature must rank below every signal-carrying
  // immersive feature (the ones the construction gives class signal:
  // body position and look direction) in >= 95% of 10 seeds.
  std::vector<std::string> features = {"position.x", "position.y", "position.z", "forward.x",
                                       "noise0"};
  size_t noise_last = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    auto traces =
        generate_set(immersive_signal_archetypes(), 15, 100 + seed, Environment::Immersive,
                     default_jobs());
    auto [noisy, extended] = inject_noise_feature(std::move(traces),
                                                  schema_for(Environment::Immersive), "noise0",
                                                  200 + seed);
    FeatureTensor tensor = build_dataset(noisy, extended, TransformConfig{});
    ClassifierConfig config = model_config(ModelKind::Rocket, seed);
    config.rocket.n_kernels = 200;
    ClassifierFactory factory = [&] { return make_classifier(config); };
    PermFitOptions options;
    options.repeats = 7;
    options.mode = PermFitMode::Retrain;
    options.cv_folds = 5;
    auto ranking = permfit_ranking(tensor, factory, nullptr, Scale::Space, features, options,
                                   300 + seed);
    if (ranking.back().feature == "noise0") ++noise_last;
  }
  out << "noise0 last in " << noise_last << "/10 seeds";
  detail = out.str();
  return static_cast<double>(noise_last) / 10.0 >= 0.95;
}

// ---------------------------------------------------- 8. interpretation

bool interpretation(std::string& detail) {
  auto archetypes = preset_openmix();
  auto traces = generate_set(archetypes, 10, 7, Environment::Immersive, default_jobs());
  FeatureSchema schema = schema_for(Environment::Immersive);
  FeatureTensor tensor = build_dataset(traces, schema, TransformConfig{});
  ClassifierConfig config = model_config(ModelKind::Rocket, 7);
  config.rocket.n_kernels = 300;
  TrainedModel model = train_model(tensor, Scale::Task, config);

  auto open = generate_openmix(archetypes, 3, 8, Environment::Immersive);
  InterpretConfig icfg;
  icfg.step = 45;
  size_t traces_ok = 0;
  for (const auto& g : open) {
    auto timeline = annotate(g.trace, model, icfg);
    size_t matched = 0;
    for (const auto& truth : g.segments) {
      std::map<int, double> span_time;
      for (const auto& s : timeline.segments) {
        double lo = std::max(s.t_start_s, truth.t_start_s);
        double hi = std::min(s.t_end_s, truth.t_end_s);
        if (hi <= lo) continue;
        span_time[s.category_code >= 0 ? s.category_code / 10 : -1] += hi - lo;
      }
      int dominant = -9;
      double best = -1.0;
      for (const auto& [space, duration] : span_time)
        if (duration > best) {
          best = duration;
          dominant = space;
        }
      if (dominant == truth.space_code) ++matched;
    }
    if (matched >= 2) ++traces_ok;
  }
  std::ostringstream out;
  out << traces_ok << "/" << open.size() << " openmix traces recover >= 2/3 segments; ";
  if (traces_ok < open.size()) {
    detail = out.str() + "-> below target";
    return false;
  }

  // coverage/ordering invariants on 100 fuzzed traces
  Rng rng(55);
  for (int iter = 0; iter < 100; ++iter) {
    ArchetypeConfig c = archetypes[rng.uniform_index(archetypes.size())];
    c.duration_min_s = 4.0 + rng.uniform(0.0, 4.0);
    c.duration_max_s = c.duration_min_s + rng.uniform(0.5, 8.0);
    auto trace = generate(c, 1, 900 + static_cast<uint64_t>(iter), Environment::Immersive)[0];
    InterpretConfig fuzz;
    fuzz.step = 10 + rng.uniform_index(120);
    fuzz.confidence_threshold = rng.uniform(0.0, 1.0);
    auto timeline = annotate(trace, model, fuzz);
    if (timeline.segments.empty()) {
      detail = out.str() + "empty timeline";
      return false;
    }
    const double tol = 1e-9;
    if (std::abs(timeline.segments.front().t_start_s - trace.frames.front().timestamp) > tol ||
        std::abs(timeline.segments.back().t_end_s - trace.frames.back().timestamp) > tol) {
      detail = out.str() + "coverage violated on fuzz " + std::to_string(iter);
      return false;
    }
    for (size_t k = 0; k < timeline.segments.size(); ++k) {
      const auto& s = timeline.segments[k];
      if (s.t_end_s < s.t_start_s || s.confidence < 0.0 || s.confidence > 1.0) {
        detail = out.str() + "segment invariants violated";
        return false;
      }
      if (k > 0 && std::abs(s.t_start_s - timeline.segments[k - 1].t_end_s) > tol) {
        detail = out.str() + "ordering violated";
        return false;
      }
    }
  }
  detail = out.str() + "100 fuzzed timelines keep coverage/ordering";
  return true;
}

// ------------------------------------------------------- 9. determinism

int run_cli_args(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"provts"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string file_fingerprint(const fs::path& path) {
  std::string bytes = read_text_file(path.string());
  if (path.filename() == "manifest.json") {
    auto doc = nlohmann::json::parse(bytes);
    doc.erase("wall_time_s");  // the one field allowed to differ
    doc.erase("inputs");       // carries run-directory paths
    doc.erase("outputs");
    bytes = doc.dump();
  } else if (path.filename() == "model.json") {
    // kNN models reference their training tensor by path; the tensor's
    // own bytes are compared separately.
    auto doc = nlohmann::json::parse(bytes);
    doc.erase("train_tensor");
    bytes = doc.dump();
  }
  return path.filename().string() + ":" + to_hex(fnv1a64(bytes));
}

std::string dir_fingerprint(const std::string& dir) {
  std::vector<std::string> parts;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file()) parts.push_back(file_fingerprint(entry.path()));
  std::sort(parts.begin(), parts.end());
  std::string joined;
  for (const auto& p : parts) joined += p + "\n";
  return joined;
}

bool determinism(std::string& detail) {
  fs::path root = fs::temp_directory_path() / "provts_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  std::string cfg = (root / "config.json").string();
  write_text_file(cfg, R"({"rocket": {"n_kernels": 48}, "cnn": {"epochs": 6, "batch_size": 8}})");

  // Two passes at jobs=1 and one at jobs=4 must agree byte-for-byte.
  std::vector<std::string> fingerprints;
  for (const std::string jobs : {"1", "1", "4"}) {
    fs::path run = root / ("run_j" + jobs + "_" + std::to_string(fingerprints.size()));
    auto sub = [&](const char* name) { return (run / name).string(); };
    std::vector<std::vector<std::string>> commands = {
        {"synth", "--preset", "spaces3", "--n", "4", "--seed", "7", "--jobs", jobs, "--out",
         sub("synth")},
        {"synth", "--preset", "openmix", "--n", "2", "--seed", "8", "--jobs", jobs, "--out",
         sub("open")},
        {"ingest", "--in", sub("synth") + "/logs.csv", "--env", "immersive", "--jobs", jobs,
         "--out", sub("ingest")},
        {"transform", "--in", sub("ingest") + "/cleaned.csv", "--env", "immersive", "--jobs",
         jobs, "--out", sub("tensor")},
        {"train", "--in", sub("tensor"), "--model", "rocket", "--scale", "task", "--seed", "7",
         "--config", cfg, "--jobs", jobs, "--out", sub("model_rocket")},
        {"train", "--in", sub("tensor"), "--model", "cnn", "--scale", "space", "--seed", "7",
         "--config", cfg, "--jobs", jobs, "--out", sub("model_cnn")},
        {"train", "--in", sub("tensor"), "--model", "knn", "--scale", "space", "--seed", "7",
         "--config", cfg, "--jobs", jobs, "--out", sub("model_knn")},
        {"eval", "--in", sub("tensor"), "--model", "rocket", "--scale", "space", "--folds", "4",
         "--seed", "7", "--config", cfg, "--jobs", jobs, "--out", sub("eval")},
        {"importance", "--in", sub("tensor"), "--model", "rocket", "--scale", "space", "--mode",
         "permfit", "--permfit-mode", "inference", "--repeats", "2", "--features",
         "position.x,up.y", "--config", cfg, "--seed", "7", "--jobs", jobs, "--out",
         sub("importance")},
        {"interpret", "--in", sub("open") + "/logs.csv", "--model-file", sub("model_rocket"),
         "--jobs", jobs, "--out", sub("timeline")},
    };
    for (const auto& command : commands)
      if (run_cli_args(command) != 0) {
        detail = "command '" + command.front() + "' failed at jobs=" + jobs;
        return false;
      }
    // the kNN model references the tensor by path; normalize for comparison
    fingerprints.push_back(dir_fingerprint(run.string()));
  }

  if (fingerprints[0] != fingerprints[1]) {
    detail = "outputs differ between two identical runs";
    return false;
  }
  if (fingerprints[0] != fingerprints[2]) {
    detail = "outputs differ between --jobs 1 and --jobs 4";
    return false;
  }
  fs::remove_all(root);
  detail = "10 seeded commands byte-identical across reruns and --jobs {1,4}";
  return true;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {"dtw-oracle", dtw_oracle, 10.0},
      {"convolution-oracles", conv_oracles, 30.0},
      {"cnn-gradient-check", cnn_gradients, 60.0},
      {"ridge-oracle", ridge_oracle, 0.0},
      {"transform-conservation", transform_conservation, 0.0},
      {"synthetic-separability", synthetic_separability, 900.0},
      {"importance-sanity", importance_sanity, 0.0},
      {"interpretation-check", interpretation, 0.0},
      {"determinism", determinism, 0.0},
  };

  int failures = 0;
  for (auto& criterion : criteria) {
    auto started = Clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = criterion.check(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double elapsed = std::chrono::duration<double>(Clock::now() - started).count();
    if (ok && criterion.budget_s > 0.0 && elapsed > criterion.budget_s) {
      ok = false;
      detail += " (exceeded " + std::to_string(criterion.budget_s) + " s budget)";
    }
    std::printf("[%s] %-24s %7.2fs  %s\n", ok ? "PASS" : "FAIL", criterion.name.c_str(), elapsed,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}

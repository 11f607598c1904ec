#include "provts/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "provts/classifier.hpp"
#include "provts/evaluate.hpp"
#include "provts/importance.hpp"
#include "provts/ingest.hpp"
#include "provts/interpret.hpp"
#include "provts/report.hpp"
#include "provts/synth.hpp"
#include "provts/tensor.hpp"
#include "provts/transform.hpp"

namespace provts {

const char* kVersion = "0.1.0";

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Manifest {
  json doc;
  Clock::time_point started = Clock::now();

  Manifest(const std::string& command, uint64_t seed) {
    doc["command"] = command;
    doc["seed"] = seed;
    doc["version"] = kVersion;
    doc["inputs"] = json::array();
    doc["outputs"] = json::array();
    doc["config"] = json::object();
  }
  void input(const std::string& path) { doc["inputs"].push_back(path); }
  void output(const std::string& path) { doc["outputs"].push_back(path); }
  void config(const std::string& key, const json& value) { doc["config"][key] = value; }

  void write(const std::string& out_dir) {
    doc["wall_time_s"] =
        std::chrono::duration<double>(Clock::now() - started).count();
    write_text_file(out_dir + "/manifest.json", doc.dump(2) + "\n");
  }
};

std::string ensure_out_dir(const std::string& out) {
  if (out.empty()) fail(ErrorCode::InvalidArgument, "--out is required");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + out + ": " + ec.message());
  return out;
}

FeatureSchema load_schema(const std::string& schema_path, Environment env) {
  if (schema_path.empty()) return schema_for(env);
  return FeatureSchema::from_json(read_text_file(schema_path));
}

std::string tensor_prefix(const std::string& in) {
  if (fs::is_directory(in)) return in + "/tensor";
  const std::string suffix = ".bin";
  if (in.size() > suffix.size() && in.substr(in.size() - suffix.size()) == suffix)
    return in.substr(0, in.size() - suffix.size());
  return in;
}

ClassifierConfig load_classifier_config(const std::string& config_path, const std::string& model,
                                        uint64_t seed, int jobs) {
  ClassifierConfig config;
  if (!config_path.empty()) config = ClassifierConfig::from_json(read_text_file(config_path));
  if (!model.empty()) config.kind = model_kind_from_string(model);
  config.seed = seed;
  config.jobs = jobs;
  return config;
}

// ---------------------------------------------------------------------
// Subcommand options.

struct CommonOpts {
  uint64_t seed = 0;
  std::string out;
  std::string config_path;
  int jobs = default_jobs();
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--seed", opts.seed, "PRNG seed");
  cmd->add_option("--out", opts.out, "output directory")->required();
  cmd->add_option("--config", opts.config_path, "JSON config file (flags win)");
  cmd->add_option("--jobs", opts.jobs, "worker thread cap (default: cores or PROVTS_JOBS)");
}

int cmd_synth(const CommonOpts& common, const std::string& preset,
              const std::string& archetypes_path, int n, const std::string& env_name,
              const std::string& format, const std::string& noise_feature) {
  ensure_out_dir(common.out);
  Manifest manifest("synth", common.seed);
  Environment env = environment_from_string(env_name);

  std::vector<ArchetypeConfig> archetypes;
  if (!archetypes_path.empty()) {
    manifest.input(archetypes_path);
    archetypes = archetypes_from_json(read_text_file(archetypes_path));
  } else {
    archetypes = preset_by_name(preset);
  }
  manifest.config("preset", preset);
  manifest.config("n", n);
  manifest.config("environment", env_name);
  manifest.config("format", format);

  FeatureSchema schema = schema_for(env);
  std::vector<SessionTrace> traces;
  if (preset == "openmix" && archetypes_path.empty()) {
    auto open = generate_openmix(archetypes, n, common.seed, env);
    json truth = json::array();
    for (const auto& g : open) {
      json segs = json::array();
      for (const auto& s : g.segments)
        segs.push_back({{"t_start_s", s.t_start_s},
                        {"t_end_s", s.t_end_s},
                        {"space_code", s.space_code},
                        {"category_code", s.category_code}});
      truth.push_back({{"trace", g.trace.id()}, {"segments", segs}});
      traces.push_back(g.trace);
    }
    write_text_file(common.out + "/ground_truth.json", truth.dump(2) + "\n");
    manifest.output(common.out + "/ground_truth.json");
  } else {
    traces = generate_set(archetypes, n, common.seed, env, common.jobs);
  }

  if (!noise_feature.empty()) {
    auto [noisy, extended] =
        inject_noise_feature(std::move(traces), schema, noise_feature, common.seed);
    traces = std::move(noisy);
    schema = std::move(extended);
    manifest.config("noise_feature", noise_feature);
  }

  std::string log_path = common.out + (format == "jsonl" ? "/logs.jsonl" : "/logs.csv");
  std::ofstream log(log_path, std::ios::binary);
  if (!log) fail(ErrorCode::IoError, "cannot write " + log_path);
  if (format == "jsonl")
    write_log_jsonl(log, traces, schema);
  else
    write_log_csv(log, traces, schema);
  log.close();

  write_text_file(common.out + "/schema.json", schema.to_json());
  write_text_file(common.out + "/archetypes.json", archetypes_to_json(archetypes));
  manifest.output(log_path);
  manifest.output(common.out + "/schema.json");
  manifest.output(common.out + "/archetypes.json");
  manifest.write(common.out);
  std::cout << "synth: wrote " << traces.size() << " traces to " << log_path << "\n";
  return 0;
}

int cmd_ingest(const CommonOpts& common, const std::string& in, const std::string& env_name,
               const std::string& schema_path, const std::string& rules_path,
               const std::string& exclude_path, double min_duration) {
  ensure_out_dir(common.out);
  Manifest manifest("ingest", common.seed);
  Environment env = environment_from_string(env_name);
  FeatureSchema schema = load_schema(schema_path, env);
  manifest.input(in);
  manifest.config("environment", env_name);
  manifest.config("min_duration_s", min_duration);

  auto parsed = parse_log_file(in, env, schema);
  for (const auto& issue : parsed.issues)
    std::cerr << "ingest: line " << issue.line << ": " << issue.message << "\n";

  if (!exclude_path.empty()) {
    manifest.input(exclude_path);
    std::ifstream ex(exclude_path);
    if (!ex) fail(ErrorCode::IoError, "cannot read " + exclude_path);
    parsed.traces = drop_excluded_spans(std::move(parsed.traces), parse_exclusion_intervals(ex));
  }

  std::vector<GoldenRule> rules;
  if (!rules_path.empty()) {
    manifest.input(rules_path);
    rules = parse_golden_rules(read_text_file(rules_path), schema);
  }

  auto result = clean(parsed.traces, min_duration, rules);

  std::string cleaned_path = common.out + "/cleaned.csv";
  std::ofstream cleaned(cleaned_path, std::ios::binary);
  if (!cleaned) fail(ErrorCode::IoError, "cannot write " + cleaned_path);
  write_log_csv(cleaned, result.traces, schema);
  cleaned.close();

  write_text_file(common.out + "/clean_report.json", result.report.to_json());
  write_text_file(common.out + "/schema.json", schema.to_json());
  manifest.output(cleaned_path);
  manifest.output(common.out + "/clean_report.json");
  manifest.output(common.out + "/schema.json");
  manifest.write(common.out);
  std::cout << "ingest: " << result.report.total_in << " in, " << result.report.kept
            << " kept (" << result.report.dropped_short << " short, "
            << result.report.dropped_golden << " failed golden rules, "
            << result.report.excluded_interaction << " interaction)\n";
  return 0;
}

int cmd_transform(const CommonOpts& common, const std::string& in, const std::string& env_name,
                  const std::string& schema_path, size_t segments,
                  const std::string& stats_csv) {
  ensure_out_dir(common.out);
  Manifest manifest("transform", common.seed);
  Environment env = environment_from_string(env_name);
  FeatureSchema schema = load_schema(schema_path, env);
  manifest.input(in);

  TransformConfig config;
  config.segments = segments;
  if (!stats_csv.empty()) {
    config.stats.clear();
    std::stringstream ss(stats_csv);
    std::string item;
    while (std::getline(ss, item, ',')) config.stats.push_back(stat_from_string(item));
  }
  manifest.config("segments", segments);

  auto parsed = parse_log_file(in, env, schema);
  FeatureTensor tensor = build_dataset(parsed.traces, schema, config);
  save_tensor(tensor, common.out + "/tensor");
  manifest.output(common.out + "/tensor.bin");
  manifest.output(common.out + "/tensor.meta.json");
  manifest.write(common.out);
  std::cout << "transform: tensor (" << tensor.n << ", " << tensor.l << ", " << tensor.d
            << ") written to " << common.out << "\n";
  if (!tensor.note.empty()) std::cout << "transform: note: " << tensor.note << "\n";
  return 0;
}

int cmd_train(const CommonOpts& common, const std::string& in, const std::string& model,
              const std::string& scale_name) {
  ensure_out_dir(common.out);
  Manifest manifest("train", common.seed);
  std::string prefix = tensor_prefix(in);
  manifest.input(prefix + ".bin");
  FeatureTensor tensor = load_tensor(prefix);
  Scale scale = scale_from_string(scale_name);

  ClassifierConfig config =
      load_classifier_config(common.config_path, model, common.seed, common.jobs);
  manifest.config("classifier", json::parse(config.to_json()));
  manifest.config("scale", scale_name);

  TrainedModel trained = train_model(tensor, scale, config);
  trained.save(common.out, prefix);
  manifest.output(common.out + "/model.json");
  if (config.kind != ModelKind::Knn) manifest.output(common.out + "/model.weights.bin");
  manifest.write(common.out);
  std::cout << "train: " << to_string(config.kind) << " (" << scale_name << " scale) saved to "
            << common.out << "\n";
  return 0;
}

void write_eval_outputs(const CommonOpts& common, Manifest& manifest, const EvalReport& report) {
  write_text_file(common.out + "/report.json", report.to_json());
  write_text_file(common.out + "/report.csv", eval_report_csv(report));
  write_text_file(common.out + "/confusion.csv", report.confusion.to_csv());
  write_confusion_png(report.confusion, common.out + "/confusion.png");
  manifest.output(common.out + "/report.json");
  manifest.output(common.out + "/report.csv");
  manifest.output(common.out + "/confusion.csv");
  manifest.output(common.out + "/confusion.png");
  std::cout << "eval: accuracy " << report.mean_accuracy << ", macro-F1 " << report.mean_macro_f1
            << "\n";
}

int cmd_eval(const CommonOpts& common, const std::string& in, const std::string& model,
             const std::string& model_file, const std::string& scale_name, size_t folds) {
  ensure_out_dir(common.out);
  Manifest manifest("eval", common.seed);
  std::string prefix = tensor_prefix(in);
  manifest.input(prefix + ".bin");
  FeatureTensor tensor = load_tensor(prefix);

  if (!model_file.empty()) {
    manifest.input(model_file);
    TrainedModel trained = TrainedModel::load(model_file);
    if (trained.schema_hash() != tensor.schema_hash())
      fail(ErrorCode::SchemaMismatch, "model schema " + trained.schema_hash() +
                                          " != tensor schema " + tensor.schema_hash());
    trained.config.jobs = common.jobs;
    EvalReport report = evaluate_on(*trained.classifier, tensor, trained.scale,
                                    to_string(trained.config.kind));
    write_eval_outputs(common, manifest, report);
    manifest.write(common.out);
    return 0;
  }

  Scale scale = scale_from_string(scale_name);
  ClassifierConfig config =
      load_classifier_config(common.config_path, model, common.seed, common.jobs);
  manifest.config("classifier", json::parse(config.to_json()));
  manifest.config("scale", scale_name);
  manifest.config("folds", folds);

  auto cv = cross_validate(tensor, [&] { return make_classifier(config); }, scale, folds,
                           common.seed, to_string(config.kind));
  write_eval_outputs(common, manifest, cv.report);
  manifest.write(common.out);
  return 0;
}

int cmd_importance(const CommonOpts& common, const std::string& in, const std::string& model,
                   const std::string& scale_name, const std::string& mode, size_t folds,
                   size_t repeats, const std::string& features_csv,
                   const std::string& permfit_mode) {
  ensure_out_dir(common.out);
  Manifest manifest("importance", common.seed);
  std::string prefix = tensor_prefix(in);
  manifest.input(prefix + ".bin");
  FeatureTensor tensor = load_tensor(prefix);
  Scale scale = scale_from_string(scale_name);

  ClassifierConfig config =
      load_classifier_config(common.config_path, model, common.seed, common.jobs);
  manifest.config("classifier", json::parse(config.to_json()));
  manifest.config("scale", scale_name);
  manifest.config("mode", mode);
  ClassifierFactory factory = [&] { return make_classifier(config); };

  std::vector<GroupImportance> groups;
  std::vector<PermFitEntry> ranking;

  if (mode == "group" || mode == "both") {
    EvalReport full = cross_validate(tensor, factory, scale, folds, common.seed).report;
    FeatureSchema schema = FeatureSchema::from_json(tensor.schema_json);
    for (FeatureGroup group :
         {FeatureGroup::Interaction, FeatureGroup::Selection, FeatureGroup::Immersive}) {
      if (schema.group_indices(group).empty()) continue;
      groups.push_back(
          leave_group_out(tensor, factory, scale, group, folds, common.seed, &full));
      std::cout << "leave-group-out " << to_string(group) << ": delta_acc "
                << groups.back().delta_accuracy() << ", delta_f1 "
                << groups.back().delta_macro_f1() << "\n";
    }
  }

  if (mode == "permfit" || mode == "both") {
    std::vector<std::string> features;
    if (!features_csv.empty()) {
      std::stringstream ss(features_csv);
      std::string item;
      while (std::getline(ss, item, ',')) features.push_back(item);
    } else {
      FeatureSchema schema = FeatureSchema::from_json(tensor.schema_json);
      for (size_t i : schema.group_indices(FeatureGroup::Immersive))
        features.push_back(schema.entry(i).name);
      if (features.empty()) features = tensor.raw_features;
    }
    PermFitOptions options;
    options.repeats = repeats;
    options.cv_folds = folds;
    options.mode = permfit_mode == "inference" ? PermFitMode::Inference : PermFitMode::Retrain;
    manifest.config("repeats", repeats);
    manifest.config("permfit_mode", permfit_mode);

    std::unique_ptr<Classifier> fitted;
    if (options.mode == PermFitMode::Inference) {
      fitted = factory();
      fitted->fit(tensor, tensor.labels(scale == Scale::Space));
    }
    ranking = permfit_ranking(tensor, factory, fitted.get(), scale, features, options,
                              common.seed);
    std::cout << "position,feature,score\n";
    for (const auto& e : ranking)
      std::cout << e.rank << ',' << e.feature << ',' << e.score << "\n";
  }

  write_text_file(common.out + "/importance.json", importance_report_json(groups, ranking));
  write_text_file(common.out + "/importance.csv", importance_report_csv(groups, ranking));
  manifest.output(common.out + "/importance.json");
  manifest.output(common.out + "/importance.csv");
  manifest.write(common.out);
  return 0;
}

int cmd_interpret(const CommonOpts& common, const std::string& in, const std::string& model_file,
                  size_t start_len, size_t step, double threshold,
                  const std::string& indicator) {
  ensure_out_dir(common.out);
  Manifest manifest("interpret", common.seed);
  manifest.input(in);
  manifest.input(model_file);

  TrainedModel model = TrainedModel::load(model_file);
  model.config.jobs = common.jobs;
  FeatureSchema schema = FeatureSchema::from_json(model.schema_json);
  auto parsed = parse_log_file(in, model.environment, schema);

  InterpretConfig config;
  config.start_len = start_len;
  config.step = step;
  config.confidence_threshold = threshold;
  if (!indicator.empty()) config.indicator_feature = indicator;
  manifest.config("start_len", start_len);
  manifest.config("step", step);
  manifest.config("confidence_threshold", threshold);

  for (const auto& trace : parsed.traces) {
    TimelineAnnotation timeline = annotate(trace, model, config);
    std::string base = common.out + "/timeline_" + trace.participant_id + "_" +
                       std::to_string(trace.trial_index);
    write_text_file(base + ".json", timeline.to_json());
    write_text_file(base + ".csv", timeline.to_csv());
    write_text_file(base + ".svg", timeline_svg(timeline, trace, schema));
    manifest.output(base + ".json");
    manifest.output(base + ".csv");
    manifest.output(base + ".svg");
    std::cout << "interpret: " << trace.id() << " -> " << timeline.segments.size()
              << " segments\n";
  }
  manifest.write(common.out);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"provts: task classification from visualization behavior logs"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate labeled synthetic sessions");
  CommonOpts synth_common;
  std::string synth_preset = "spaces3", synth_archetypes, synth_env = "immersive",
              synth_format = "csv", synth_noise;
  int synth_n = 10;
  add_common(synth, synth_common);
  synth->add_option("--preset", synth_preset, "spaces3 | tasks30 | openmix");
  synth->add_option("--archetypes", synth_archetypes, "custom archetype JSON");
  synth->add_option("--n", synth_n, "traces per class");
  synth->add_option("--env", synth_env, "desktop | immersive");
  synth->add_option("--format", synth_format, "csv | jsonl");
  synth->add_option("--noise-feature", synth_noise, "append an uncorrelated noise feature");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "parse and clean behavior logs");
  CommonOpts ingest_common;
  std::string ingest_in, ingest_env = "immersive", ingest_schema, ingest_rules, ingest_exclude;
  double ingest_min_duration = 2.0;
  add_common(ingest, ingest_common);
  ingest->add_option("--in", ingest_in, "log file (.csv or .jsonl)")->required();
  ingest->add_option("--env", ingest_env, "desktop | immersive");
  ingest->add_option("--schema", ingest_schema, "schema JSON (default: built-in)");
  ingest->add_option("--rules", ingest_rules, "golden rules JSON");
  ingest->add_option("--exclude", ingest_exclude, "exclusion intervals CSV");
  ingest->add_option("--min-duration", ingest_min_duration, "duration threshold in seconds");

  // transform
  auto* transform = app.add_subcommand("transform", "build the fixed-shape feature tensor");
  CommonOpts transform_common;
  std::string transform_in, transform_env = "immersive", transform_schema, transform_stats;
  size_t transform_segments = 100;
  add_common(transform, transform_common);
  transform->add_option("--in", transform_in, "cleaned log file")->required();
  transform->add_option("--env", transform_env, "desktop | immersive");
  transform->add_option("--schema", transform_schema, "schema JSON (default: built-in)");
  transform->add_option("--segments", transform_segments, "segment count l");
  transform->add_option("--stats", transform_stats, "comma list of acc,mean,std");

  // train
  auto* train = app.add_subcommand("train", "fit a classifier on a tensor");
  CommonOpts train_common;
  std::string train_in, train_model_name = "rocket", train_scale = "space";
  add_common(train, train_common);
  train->add_option("--in", train_in, "tensor prefix or directory")->required();
  train->add_option("--model", train_model_name, "knn | cnn | rocket");
  train->add_option("--scale", train_scale, "space | task");

  // eval
  auto* eval = app.add_subcommand("eval", "cross-validated or holdout evaluation");
  CommonOpts eval_common;
  std::string eval_in, eval_model_name = "rocket", eval_model_file, eval_scale = "space";
  size_t eval_folds = 5;
  add_common(eval, eval_common);
  eval->add_option("--in", eval_in, "tensor prefix or directory")->required();
  eval->add_option("--model", eval_model_name, "knn | cnn | rocket (CV mode)");
  eval->add_option("--model-file", eval_model_file, "trained model dir (holdout mode)");
  eval->add_option("--scale", eval_scale, "space | task");
  eval->add_option("--folds", eval_folds, "CV fold count");

  // importance
  auto* importance = app.add_subcommand("importance", "feature-importance analyses");
  CommonOpts importance_common;
  std::string importance_in, importance_model = "rocket", importance_scale = "space",
              importance_mode = "both", importance_features, importance_permfit_mode = "retrain";
  size_t importance_folds = 5, importance_repeats = 100;
  add_common(importance, importance_common);
  importance->add_option("--in", importance_in, "tensor prefix or directory")->required();
  importance->add_option("--model", importance_model, "knn | cnn | rocket");
  importance->add_option("--scale", importance_scale, "space | task");
  importance->add_option("--mode", importance_mode, "group | permfit | both");
  importance->add_option("--folds", importance_folds, "CV fold count");
  importance->add_option("--repeats", importance_repeats, "PermFIT permutation repeats");
  importance->add_option("--features", importance_features,
                         "comma list of raw features (default: immersive group)");
  importance->add_option("--permfit-mode", importance_permfit_mode, "retrain | inference");

  // interpret
  auto* interpret = app.add_subcommand("interpret", "annotate open sessions with a timeline");
  CommonOpts interpret_common;
  std::string interpret_in, interpret_model_file, interpret_indicator;
  size_t interpret_start = 100, interpret_step = 30;
  double interpret_threshold = 0.5;
  add_common(interpret, interpret_common);
  interpret->add_option("--in", interpret_in, "open-session log file")->required();
  interpret->add_option("--model-file", interpret_model_file, "trained model dir")->required();
  interpret->add_option("--start", interpret_start, "first window length in frames");
  interpret->add_option("--step", interpret_step, "window growth in frames");
  interpret->add_option("--threshold", interpret_threshold, "confidence threshold");
  interpret->add_option("--indicator", interpret_indicator, "indicator feature for the SVG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << "\n";
    return 1;
  }

  try {
    if (synth->parsed())
      return cmd_synth(synth_common, synth_preset, synth_archetypes, synth_n, synth_env,
                       synth_format, synth_noise);
    if (ingest->parsed())
      return cmd_ingest(ingest_common, ingest_in, ingest_env, ingest_schema, ingest_rules,
                        ingest_exclude, ingest_min_duration);
    if (transform->parsed())
      return cmd_transform(transform_common, transform_in, transform_env, transform_schema,
                           transform_segments, transform_stats);
    if (train->parsed()) return cmd_train(train_common, train_in, train_model_name, train_scale);
    if (eval->parsed())
      return cmd_eval(eval_common, eval_in, eval_model_name, eval_model_file, eval_scale,
                      eval_folds);
    if (importance->parsed())
      return cmd_importance(importance_common, importance_in, importance_model, importance_scale,
                            importance_mode, importance_folds, importance_repeats,
                            importance_features, importance_permfit_mode);
    if (interpret->parsed())
      return cmd_interpret(interpret_common, interpret_in, interpret_model_file, interpret_start,
                           interpret_step, interpret_threshold, interpret_indicator);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::IoError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace provts

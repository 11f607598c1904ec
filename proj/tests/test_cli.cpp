#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "provts/cli.hpp"
#include "provts/common.hpp"
#include "provts/report.hpp"

using namespace provts;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(std::initializer_list<const char*> args) {
  std::vector<const char*> argv = {"provts"};
  argv.insert(argv.end(), args.begin(), args.end());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) { return read_text_file(path); }

}  // namespace

TEST_CASE("synth-ingest-transform-train-eval pipeline round trip") {
  TempDir tmp("provts_cli_pipeline");
  std::string d1 = tmp.sub("synth"), d2 = tmp.sub("ingest"), d3 = tmp.sub("tensor"),
              d4 = tmp.sub("model"), d5 = tmp.sub("eval");

  CHECK(run({"synth", "--preset", "spaces3", "--n", "4", "--seed", "7", "--out", d1.c_str()}) == 0);
  CHECK(fs::exists(d1 + "/logs.csv"));
  CHECK(fs::exists(d1 + "/schema.json"));
  CHECK(fs::exists(d1 + "/manifest.json"));

  std::string logs = d1 + "/logs.csv";
  CHECK(run({"ingest", "--in", logs.c_str(), "--env", "immersive", "--out", d2.c_str()}) == 0);
  CHECK(fs::exists(d2 + "/cleaned.csv"));
  json clean_report = json::parse(slurp(d2 + "/clean_report.json"));
  CHECK(clean_report.at("total_in").get<int>() == 12);
  CHECK(clean_report.at("kept").get<int>() == 12);

  std::string cleaned = d2 + "/cleaned.csv";
  CHECK(run({"transform", "--in", cleaned.c_str(), "--env", "immersive", "--out", d3.c_str()}) == 0);
  CHECK(fs::exists(d3 + "/tensor.bin"));
  json meta = json::parse(slurp(d3 + "/tensor.meta.json"));
  CHECK(meta.at("shape") == json::array({12, 100, 108}));

  std::string config_path = tmp.sub("rocket.json");
  write_text_file(config_path, R"({"rocket": {"n_kernels": 64}})");
  CHECK(run({"train", "--in", d3.c_str(), "--model", "rocket", "--scale", "space", "--seed", "3",
             "--config", config_path.c_str(), "--out", d4.c_str()}) == 0);
  CHECK(fs::exists(d4 + "/model.json"));
  CHECK(fs::exists(d4 + "/model.weights.bin"));

  CHECK(run({"eval", "--in", d3.c_str(), "--model-file", d4.c_str(), "--out", d5.c_str()}) == 0);
  CHECK(fs::exists(d5 + "/report.json"));
  CHECK(fs::exists(d5 + "/confusion.csv"));
  CHECK(fs::exists(d5 + "/confusion.png"));
  // training-set evaluation of a separable toy set is perfect
  json report = json::parse(slurp(d5 + "/report.json"));
  CHECK(report.at("mean_accuracy").get<double>() == doctest::Approx(1.0));

  // PNG signature
  std::string png = slurp(d5 + "/confusion.png");
  CHECK(png.size() > 8);
  CHECK(static_cast<unsigned char>(png[0]) == 0x89);
  CHECK(png.compare(1, 3, "PNG") == 0);
}

TEST_CASE("jsonl logs flow through synth, ingest and transform") {
  TempDir tmp("provts_cli_jsonl");
  std::string d1 = tmp.sub("synth"), d2 = tmp.sub("ingest"), d3 = tmp.sub("tensor");
  CHECK(run({"synth", "--preset", "spaces3", "--n", "2", "--seed", "3", "--format", "jsonl",
             "--out", d1.c_str()}) == 0);
  CHECK(fs::exists(d1 + "/logs.jsonl"));
  std::string logs = d1 + "/logs.jsonl";
  CHECK(run({"ingest", "--in", logs.c_str(), "--env", "immersive", "--out", d2.c_str()}) == 0);
  std::string cleaned = d2 + "/cleaned.csv";
  CHECK(run({"transform", "--in", cleaned.c_str(), "--env", "immersive", "--out", d3.c_str()}) == 0);
  json meta = json::parse(slurp(d3 + "/tensor.meta.json"));
  CHECK(meta.at("shape") == json::array({6, 100, 108}));
}

TEST_CASE("train is deterministic across reruns and job counts") {
  TempDir tmp("provts_cli_determinism");
  std::string d1 = tmp.sub("synth"), d3 = tmp.sub("tensor");
  REQUIRE(run({"synth", "--preset", "spaces3", "--n", "3", "--seed", "5", "--out", d1.c_str()}) == 0);
  std::string logs = d1 + "/logs.csv";
  REQUIRE(run({"transform", "--in", logs.c_str(), "--env", "immersive", "--out", d3.c_str()}) == 0);

  std::string config_path = tmp.sub("rocket.json");
  write_text_file(config_path, R"({"rocket": {"n_kernels": 32}})");
  auto train_to = [&](const std::string& dir, const char* jobs) {
    REQUIRE(run({"train", "--in", d3.c_str(), "--model", "rocket", "--scale", "space", "--seed",
                 "11", "--config", config_path.c_str(), "--jobs", jobs, "--out", dir.c_str()}) == 0);
  };
  std::string m1 = tmp.sub("m1"), m2 = tmp.sub("m2"), m3 = tmp.sub("m3");
  train_to(m1, "1");
  train_to(m2, "1");
  train_to(m3, "4");
  CHECK(slurp(m1 + "/model.weights.bin") == slurp(m2 + "/model.weights.bin"));
  CHECK(slurp(m1 + "/model.weights.bin") == slurp(m3 + "/model.weights.bin"));
  CHECK(slurp(m1 + "/model.json") == slurp(m3 + "/model.json"));
}

TEST_CASE("eval rejects a model whose schema hash differs from the tensor") {
  TempDir tmp("provts_cli_schema_mismatch");
  std::string d1 = tmp.sub("immersive"), t1 = tmp.sub("tensor_imm"), m1 = tmp.sub("model");
  std::string d2 = tmp.sub("desktop"), t2 = tmp.sub("tensor_desk"), out = tmp.sub("eval");
  REQUIRE(run({"synth", "--preset", "spaces3", "--n", "3", "--seed", "2", "--out", d1.c_str()}) == 0);
  REQUIRE(run({"synth", "--preset", "spaces3", "--n", "3", "--seed", "2", "--env", "desktop",
               "--out", d2.c_str()}) == 0);
  std::string imm_logs = d1 + "/logs.csv", desk_logs = d2 + "/logs.csv";
  REQUIRE(run({"transform", "--in", imm_logs.c_str(), "--env", "immersive", "--out", t1.c_str()}) == 0);
  REQUIRE(run({"transform", "--in", desk_logs.c_str(), "--env", "desktop", "--out", t2.c_str()}) == 0);

  std::string config_path = tmp.sub("rocket.json");
  write_text_file(config_path, R"({"rocket": {"n_kernels": 32}})");
  REQUIRE(run({"train", "--in", t1.c_str(), "--model", "rocket", "--scale", "space", "--seed", "1",
               "--config", config_path.c_str(), "--out", m1.c_str()}) == 0);

  CHECK(run({"eval", "--in", t2.c_str(), "--model-file", m1.c_str(), "--out", out.c_str()}) == 1);
}

TEST_CASE("interpret produces timeline JSON, CSV and SVG per trace") {
  TempDir tmp("provts_cli_interpret");
  std::string pure = tmp.sub("pure"), tensor = tmp.sub("tensor"), model = tmp.sub("model"),
              open = tmp.sub("open"), out = tmp.sub("timeline");
  REQUIRE(run({"synth", "--preset", "openmix", "--n", "2", "--seed", "9", "--out", open.c_str()}) == 0);
  CHECK(fs::exists(open + "/ground_truth.json"));

  // train a task-scale model on pure traces of the same archetypes
  std::string archetypes = open + "/archetypes.json";
  REQUIRE(run({"synth", "--archetypes", archetypes.c_str(), "--n", "5", "--seed", "10", "--out",
               pure.c_str()}) == 0);
  std::string pure_logs = pure + "/logs.csv";
  REQUIRE(run({"transform", "--in", pure_logs.c_str(), "--env", "immersive", "--out",
               tensor.c_str()}) == 0);
  std::string config_path = tmp.sub("rocket.json");
  write_text_file(config_path, R"({"rocket": {"n_kernels": 64}})");
  REQUIRE(run({"train", "--in", tensor.c_str(), "--model", "rocket", "--scale", "task", "--seed",
               "3", "--config", config_path.c_str(), "--out", model.c_str()}) == 0);

  std::string open_logs = open + "/logs.csv";
  CHECK(run({"interpret", "--in", open_logs.c_str(), "--model-file", model.c_str(), "--out",
             out.c_str()}) == 0);
  CHECK(fs::exists(out + "/timeline_open_0.json"));
  CHECK(fs::exists(out + "/timeline_open_0.csv"));
  CHECK(fs::exists(out + "/timeline_open_0.svg"));
  CHECK(fs::exists(out + "/timeline_open_1.json"));
  json timeline = json::parse(slurp(out + "/timeline_open_0.json"));
  CHECK(timeline.at("segments").size() >= 1);
}

TEST_CASE("importance command emits the report and ranked list") {
  TempDir tmp("provts_cli_importance");
  std::string d1 = tmp.sub("synth"), t1 = tmp.sub("tensor"), out = tmp.sub("imp");
  REQUIRE(run({"synth", "--preset", "spaces3", "--n", "6", "--seed", "4", "--out", d1.c_str()}) == 0);
  std::string logs = d1 + "/logs.csv";
  REQUIRE(run({"transform", "--in", logs.c_str(), "--env", "immersive", "--out", t1.c_str()}) == 0);
  std::string config_path = tmp.sub("rocket.json");
  write_text_file(config_path, R"({"rocket": {"n_kernels": 32}})");
  CHECK(run({"importance", "--in", t1.c_str(), "--model", "rocket", "--scale", "space", "--mode",
             "permfit", "--permfit-mode", "inference", "--repeats", "2", "--features",
             "position.x,up.y", "--config", config_path.c_str(), "--seed", "6", "--out",
             out.c_str()}) == 0);
  json report = json::parse(slurp(out + "/importance.json"));
  CHECK(report.at("permfit").size() == 2);
  std::string csv = slurp(out + "/importance.csv");
  CHECK(csv.find("kind,name") == 0);
  CHECK(csv.find("feature,position.x") != std::string::npos);
}

TEST_CASE("usage and validation errors exit nonzero; commands do not mutate inputs") {
  TempDir tmp("provts_cli_errors");
  CHECK(run({"frobnicate"}) == 1);
  CHECK(run({"synth", "--preset", "nope", "--out", tmp.sub("x").c_str()}) == 1);
  CHECK(run({"eval", "--in", "/nonexistent/tensor", "--out", tmp.sub("y").c_str()}) == 2);

  std::string d1 = tmp.sub("synth");
  REQUIRE(run({"synth", "--preset", "spaces3", "--n", "2", "--seed", "1", "--out", d1.c_str()}) == 0);
  std::string logs = d1 + "/logs.csv";
  std::string before = slurp(logs);
  std::string t1 = tmp.sub("tensor");
  REQUIRE(run({"transform", "--in", logs.c_str(), "--env", "immersive", "--out", t1.c_str()}) == 0);
  CHECK(slurp(logs) == before);
}

TEST_CASE("manifest replay: re-running recorded outputs is byte-identical") {
  TempDir tmp("provts_cli_manifest");
  std::string a = tmp.sub("a"), b = tmp.sub("b");
  REQUIRE(run({"synth", "--preset", "tasks30", "--n", "1", "--seed", "12", "--out", a.c_str()}) == 0);
  REQUIRE(run({"synth", "--preset", "tasks30", "--n", "1", "--seed", "12", "--out", b.c_str()}) == 0);
  CHECK(slurp(a + "/logs.csv") == slurp(b + "/logs.csv"));
  CHECK(slurp(a + "/archetypes.json") == slurp(b + "/archetypes.json"));

  json ma = json::parse(slurp(a + "/manifest.json"));
  json mb = json::parse(slurp(b + "/manifest.json"));
  CHECK(ma.contains("wall_time_s"));
  ma.erase("wall_time_s");
  mb.erase("wall_time_s");
  // output paths differ only by directory; compare the stable fields
  CHECK(ma.at("command") == mb.at("command"));
  CHECK(ma.at("seed") == mb.at("seed"));
  CHECK(ma.at("config") == mb.at("config"));
}

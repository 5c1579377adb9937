#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ayn/data.hpp"
#include "doctest.h"
#include "json.hpp"

// End-to-end runs of the installed binary; AYN_CLI_PATH comes from CMake.

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Scratch directory shared by the whole binary; every artifact lives here so
// reruns never collide with each other or with the source tree.
const fs::path& scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("ayn_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

RunResult run_cli(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    const fs::path out = scratch() / ("stdout_" + std::to_string(counter) + ".txt");
    const fs::path err = scratch() / ("stderr_" + std::to_string(counter) + ".txt");
    ++counter;
    std::string cmd = "cd " + scratch().string() + " && " + env + " " + AYN_CLI_PATH + " " + args +
                      " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out);
    result.err = slurp(err);
    return result;
}

json error_body(const RunResult& result) {
    const json body = json::parse(result.err);
    REQUIRE(body.contains("error"));
    REQUIRE(body["error"].contains("code"));
    REQUIRE(body["error"].contains("message"));
    return body["error"];
}

// One tiny world, generated once; most cases below reuse these files.
void ensure_world() {
    static bool done = false;
    if (done) return;
    const auto r = run_cli(
        "synth --seed 5 --images 12 --train-count 160 --test-count 40 "
        "--colors red,green,blue --shapes triangle,square --noise 0.05 "
        "--families color,shape --format binary");
    REQUIRE(r.exit_code == 0);
    done = true;
}

void ensure_checkpoint() {
    static bool done = false;
    if (done) return;
    ensure_world();
    const auto r = run_cli(
        "train --train-qa toy_train.jsonl --features toy_features.bin "
        "--encoder bow --embed-dim 6 --fusion concat --top-k 8 "
        "--learning-rate 0.02 --epochs 6 --batch-size 16 "
        "--validation-fraction 0.2 --seed 3");
    REQUIRE(r.exit_code == 0);
    done = true;
}

void ensure_predictions() {
    static bool done = false;
    if (done) return;
    ensure_checkpoint();
    const auto r = run_cli(
        "predict --checkpoint checkpoint.json --test-qa toy_test.jsonl "
        "--features toy_features.bin --output predictions.jsonl");
    REQUIRE(r.exit_code == 0);
    done = true;
}

}  // namespace

TEST_CASE("synth writes a loadable corpus") {
    ensure_world();
    const auto train = ayn::load_qa_jsonl((scratch() / "toy_train.jsonl").string());
    const auto test = ayn::load_qa_jsonl((scratch() / "toy_test.jsonl").string());
    CHECK(train.size() == 160);
    CHECK(test.size() == 40);
    const auto features =
        ayn::VisualFeatureStore::load((scratch() / "toy_features.bin").string(),
                                      ayn::FeatureFormat::binary);
    CHECK(features.size() == 12);
}

TEST_CASE("train emits checkpoint, log, and a progress table") {
    ensure_world();
    const auto r = run_cli(
        "train --train-qa toy_train.jsonl --features toy_features.bin "
        "--encoder bow --embed-dim 6 --fusion concat --top-k 8 "
        "--learning-rate 0.02 --epochs 6 --batch-size 16 "
        "--validation-fraction 0.2 --seed 3 "
        "--checkpoint ck_a.json --log log_a.json");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("training run (seed 3)") != std::string::npos);
    CHECK(r.out.find("best epoch:") != std::string::npos);
    CHECK(fs::exists(scratch() / "ck_a.json"));
    CHECK(fs::exists(scratch() / "log_a.json"));

    SUBCASE("same flags and seed reproduce both artifacts byte for byte") {
        const auto again = run_cli(
            "train --train-qa toy_train.jsonl --features toy_features.bin "
            "--encoder bow --embed-dim 6 --fusion concat --top-k 8 "
            "--learning-rate 0.02 --epochs 6 --batch-size 16 "
            "--validation-fraction 0.2 --seed 3 "
            "--checkpoint ck_b.json --log log_b.json");
        CHECK(again.exit_code == 0);
        CHECK(slurp(scratch() / "ck_a.json") == slurp(scratch() / "ck_b.json"));
        CHECK(slurp(scratch() / "log_a.json") == slurp(scratch() / "log_b.json"));
    }

    SUBCASE("a different seed changes the checkpoint") {
        const auto other = run_cli(
            "train --train-qa toy_train.jsonl --features toy_features.bin "
            "--encoder bow --embed-dim 6 --fusion concat --top-k 8 "
            "--learning-rate 0.02 --epochs 6 --batch-size 16 "
            "--validation-fraction 0.2 --seed 4 "
            "--checkpoint ck_seed4.json --log log_seed4.json");
        CHECK(other.exit_code == 0);
        CHECK(slurp(scratch() / "ck_a.json") != slurp(scratch() / "ck_seed4.json"));
    }
}

TEST_CASE("config files stand in for flags") {
    ensure_checkpoint();
    std::ofstream(scratch() / "run.toml") << R"([train]
train-qa = "toy_train.jsonl"
features = "toy_features.bin"
encoder = "bow"
embed-dim = 6
fusion = "concat"
top-k = 8
learning-rate = 0.02
epochs = 6
batch-size = 16
validation-fraction = 0.2
seed = 3
checkpoint = "ck_toml.json"
log = "log_toml.json"
)";
    std::ofstream(scratch() / "run.json") << R"({
  "train": {
    "train-qa": "toy_train.jsonl",
    "features": "toy_features.bin",
    "encoder": "bow",
    "embed-dim": 6,
    "fusion": "concat",
    "top-k": 8,
    "learning-rate": 0.02,
    "epochs": 6,
    "batch-size": 16,
    "validation-fraction": 0.2,
    "seed": 3,
    "checkpoint": "ck_json.json",
    "log": "log_json.json"
  }
})";
    REQUIRE(run_cli("train --config run.toml").exit_code == 0);
    REQUIRE(run_cli("train --config run.json").exit_code == 0);
    const std::string from_flags = slurp(scratch() / "checkpoint.json");
    CHECK(slurp(scratch() / "ck_toml.json") == from_flags);
    CHECK(slurp(scratch() / "ck_json.json") == from_flags);

    SUBCASE("command-line flags override config values") {
        const auto r = run_cli("train --config run.toml --seed 9 --checkpoint ck_over.json");
        REQUIRE(r.exit_code == 0);
        CHECK(r.out.find("training run (seed 9)") != std::string::npos);
        CHECK(slurp(scratch() / "ck_over.json") != from_flags);
    }
}

TEST_CASE("predict writes one id/answer object per line") {
    ensure_checkpoint();
    const auto r = run_cli(
        "predict --checkpoint checkpoint.json --test-qa toy_test.jsonl "
        "--features toy_features.bin --output predictions_schema.jsonl");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("40 prediction(s)") != std::string::npos);

    std::ifstream in(scratch() / "predictions_schema.jsonl");
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) {
        ++lines;
        const json row = json::parse(line);
        CHECK(row.size() == 2);
        CHECK(row["id"].is_string());
        CHECK(row["answer"].is_string());
    }
    CHECK(lines == 40);

    SUBCASE("a rerun reproduces the file") {
        REQUIRE(run_cli("predict --checkpoint checkpoint.json --test-qa toy_test.jsonl "
                        "--features toy_features.bin --output predictions_again.jsonl")
                    .exit_code == 0);
        CHECK(slurp(scratch() / "predictions_schema.jsonl") ==
              slurp(scratch() / "predictions_again.jsonl"));
    }

    SUBCASE("images absent from the feature store are reported, not fatal") {
        std::ofstream(scratch() / "ghost.jsonl")
            << R"({"id":"g-1","image":"image999","question":"what color is it","answers":["red"]})"
            << '\n';
        const auto ghost = run_cli(
            "predict --checkpoint checkpoint.json --test-qa ghost.jsonl "
            "--features toy_features.bin --output ghost_pred.jsonl");
        CHECK(ghost.exit_code == 0);
        CHECK(ghost.err.find("warning") != std::string::npos);
        CHECK(ghost.err.find("1") != std::string::npos);
    }
}

TEST_CASE("eval prints the metric table and saves a stable report") {
    ensure_predictions();
    const auto r = run_cli(
        "eval --predictions predictions.jsonl --references toy_test.jsonl "
        "--json report.json");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("Accuracy") != std::string::npos);
    CHECK(r.out.find("WUPS@0.9") != std::string::npos);
    CHECK(r.out.find("WUPS@0.0") != std::string::npos);
    CHECK(r.out.find("overall") != std::string::npos);

    const json report = json::parse(slurp(scratch() / "report.json"));
    CHECK(report["format"] == "ayn-report-v1");
    CHECK(report["instances"] == 40);
    CHECK(report["rows"][0]["label"] == "overall");

    SUBCASE("evaluation is bit-reproducible") {
        REQUIRE(run_cli("eval --predictions predictions.jsonl --references toy_test.jsonl "
                        "--json report_again.json")
                    .exit_code == 0);
        CHECK(slurp(scratch() / "report.json") == slurp(scratch() / "report_again.json"));
    }
}

TEST_CASE("baselines run from the same corpus files") {
    ensure_world();
    const auto c = run_cli(
        "baseline --kind constant --train-qa toy_train.jsonl --test-qa toy_test.jsonl "
        "--output base_const.jsonl");
    REQUIRE(c.exit_code == 0);
    CHECK(c.out.find("40 prediction(s)") != std::string::npos);

    const auto l = run_cli(
        "baseline --kind lookup --train-qa toy_train.jsonl --test-qa toy_test.jsonl "
        "--strip-articles --output base_lookup.jsonl");
    CHECK(l.exit_code == 0);

    SUBCASE("nearest-neighbor kinds name the flag they are missing") {
        const auto r = run_cli(
            "baseline --kind nn-question --train-qa toy_train.jsonl --test-qa toy_test.jsonl");
        CHECK(r.exit_code == 1);
        const json err = error_body(r);
        CHECK(err["code"] == "invalid-value");
        CHECK(err["message"].get<std::string>().find("--embeddings") != std::string::npos);
    }

    SUBCASE("unknown kinds are rejected") {
        const auto r = run_cli(
            "baseline --kind oracle --train-qa toy_train.jsonl --test-qa toy_test.jsonl");
        CHECK(r.exit_code == 1);
        CHECK(error_body(r)["code"] == "invalid-value");
    }
}

TEST_CASE("report renders saved artifacts") {
    ensure_predictions();
    const auto log = run_cli("report --input train_log.json --svg curves.svg");
    REQUIRE(log.exit_code == 0);
    CHECK(log.out.find("best epoch:") != std::string::npos);
    CHECK(slurp(scratch() / "curves.svg").rfind("<svg", 0) == 0);

    REQUIRE(run_cli("eval --predictions predictions.jsonl --references toy_test.jsonl "
                    "--json report.json")
                .exit_code == 0);
    const auto table = run_cli("report --input report.json");
    REQUIRE(table.exit_code == 0);
    CHECK(table.out.find("WUPS@0.9") != std::string::npos);

    SUBCASE("curves only exist for training logs") {
        const auto r = run_cli("report --input report.json --svg nope.svg");
        CHECK(r.exit_code == 1);
        CHECK(error_body(r)["code"] == "invalid-value");
    }
}

TEST_CASE("missing inputs fall back to the data directory") {
    ensure_world();
    const fs::path data_dir = scratch() / "data_dir";
    fs::create_directories(data_dir);
    fs::copy_file(scratch() / "toy_train.jsonl", data_dir / "shared_train.jsonl",
                  fs::copy_options::overwrite_existing);
    fs::copy_file(scratch() / "toy_test.jsonl", data_dir / "shared_test.jsonl",
                  fs::copy_options::overwrite_existing);

    const std::string env = "AYN_DATA_DIR=" + data_dir.string();
    const auto r = run_cli(
        "baseline --kind constant --train-qa shared_train.jsonl --test-qa shared_test.jsonl "
        "--output base_env.jsonl",
        env);
    CHECK(r.exit_code == 0);

    SUBCASE("paths that exist locally win over the data directory") {
        std::ofstream(scratch() / "shared_train.jsonl") << "";  // present but empty
        const auto local = run_cli(
            "baseline --kind constant --train-qa shared_train.jsonl --test-qa shared_test.jsonl",
            env);
        CHECK(local.exit_code == 1);  // empty corpus is an error, so the local file was chosen
    }
}

TEST_CASE("failures exit nonzero with a JSON envelope on stderr") {
    ensure_predictions();
    const auto io = run_cli("predict --checkpoint nope.json --test-qa nope.jsonl --features no.tsv");
    CHECK(io.exit_code == 1);
    CHECK(error_body(io)["code"] == "io");

    const auto cli = run_cli("explode");
    CHECK(cli.exit_code == 1);
    CHECK(error_body(cli)["code"] == "cli");

    const auto missing = run_cli("train --features toy_features.bin");
    CHECK(missing.exit_code == 1);
    const json err = error_body(missing);
    CHECK(err["code"] == "cli");
    CHECK(err["message"].get<std::string>().find("--train-qa") != std::string::npos);

    const auto conflict = run_cli(
        "eval --predictions predictions.jsonl --references toy_test.jsonl --word-map words.txt");
    CHECK(conflict.exit_code == 1);
    CHECK(error_body(conflict)["code"] == "invalid-value");
}

TEST_CASE("version flag prints and exits cleanly") {
    const auto r = run_cli("--version");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("0.1.0") != std::string::npos);
}

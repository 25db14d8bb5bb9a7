#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "monosurv/model_io.hpp"

using namespace monosurv;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = MONOSURV_CLI_PATH;

struct RunResult {
    int exit_code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt";
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = "cd '" + dir.string() + "' && '" + kCli + "' " + args + " > '" +
                            out.string() + "' 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("simulate is byte-identical across runs") {
    const fs::path dir = fresh_dir("monosurv_cli_sim");
    const RunResult a = run_cli("simulate --kind normal --n 100 --seed 7 --out a.csv", dir);
    const RunResult b = run_cli("simulate --kind normal --n 100 --seed 7 --out b.csv", dir);
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(fs::exists(dir / "a.csv.manifest.json"));
    const json manifest = json::parse(slurp(dir / "a.csv.manifest.json"));
    CHECK(manifest.at("command") == "simulate");
    CHECK(manifest.at("flags").at("seed") == 7);
    fs::remove_all(dir);
}

TEST_CASE("train, predict and evaluate work end to end") {
    const fs::path dir = fresh_dir("monosurv_cli_train");
    REQUIRE(run_cli("simulate --kind weibull --n 300 --seed 1 --out train.csv", dir).exit_code == 0);
    REQUIRE(run_cli("simulate --kind weibull --n 100 --seed 2 --out val.csv", dir).exit_code == 0);

    std::ofstream(dir / "config.json")
        << R"({"cov_layers":1,"cov_nodes":8,"mixed_layers":2,"nodes_per_layer":8,"batch_size":50,)"
        << R"("learning_rate":0.01,"max_epochs":20})";
    const RunResult train = run_cli(
        "train --data train.csv --val val.csv --config config.json --head survival --seed 3 --out-model m.json",
        dir);
    REQUIRE(train.exit_code == 0);
    CHECK(fs::exists(dir / "m.json"));
    CHECK(fs::exists(dir / "m.json.train_report.json"));
    CHECK(fs::exists(dir / "m.json.manifest.json"));

    const Model model = load_model((dir / "m.json").string());
    CHECK(model.config.head == HeadKind::Survival);

    const RunResult predict = run_cli("predict --model m.json --x 0.5 --times 0:10:3 --out curve.csv", dir);
    REQUIRE(predict.exit_code == 0);
    std::ifstream curve(dir / "curve.csv");
    std::string header, row;
    std::getline(curve, header);
    CHECK(header == "time,survival");
    int rows = 0;
    double prev = 2.0;
    while (std::getline(curve, row)) {
        const auto comma = row.find(',');
        const double s = std::stod(row.substr(comma + 1));
        CHECK(s <= prev);
        prev = s;
        ++rows;
    }
    CHECK(rows == 3);

    const RunResult evaluate = run_cli("evaluate --model m.json --data val.csv --out-report r.json", dir);
    REQUIRE(evaluate.exit_code == 0);
    const json report = json::parse(slurp(dir / "r.json"));
    CHECK(report.contains("ibs"));
    CHECK(report.contains("ibll"));
    CHECK(report.contains("c_td"));
    CHECK(report.contains("test_nll"));
    fs::remove_all(dir);
}

TEST_CASE("evaluate reproduces a cv fold's metrics") {
    const fs::path dir = fresh_dir("monosurv_cli_cv");
    REQUIRE(run_cli("simulate --kind weibull --n 250 --seed 4 --out data.csv", dir).exit_code == 0);
    std::ofstream(dir / "grid.json")
        << R"({"mixed_layers":[1],"cov_layers":[1],"nodes_per_layer":[8],"cov_nodes":[8],)"
        << R"("dropout":[0.0],"weight_decay":[0.0],"learning_rate":[0.01],"batch_sizes":[50],"heads":["hazard"]})";
    const RunResult cv = run_cli("cv --data data.csv --grid grid.json --budget 1 --seed 9 --out-dir out", dir);
    REQUIRE(cv.exit_code == 0);

    for (int fold = 0; fold < 5; ++fold) {
        const std::string tag = std::to_string(fold);
        CHECK(fs::exists(dir / "out" / ("model_fold" + tag + ".json")));
        CHECK(fs::exists(dir / "out" / ("test_fold" + tag + ".csv")));
        CHECK(fs::exists(dir / "out" / ("report_fold" + tag + ".json")));
    }
    CHECK(fs::exists(dir / "out" / "summary.json"));
    CHECK(fs::exists(dir / "out" / "manifest.json"));

    const json fold0 = json::parse(slurp(dir / "out" / "report_fold0.json"));
    const RunResult re = run_cli("evaluate --model out/model_fold0.json --data out/test_fold0.csv --out-report re.json", dir);
    REQUIRE(re.exit_code == 0);
    const json redo = json::parse(slurp(dir / "re.json"));
    const json& recorded = fold0.at("metrics");
    CHECK(std::abs(redo.at("ibs").get<double>() - recorded.at("ibs").get<double>()) < 1e-12);
    CHECK(std::abs(redo.at("ibll").get<double>() - recorded.at("ibll").get<double>()) < 1e-12);
    CHECK(std::abs(redo.at("test_nll").get<double>() - recorded.at("test_nll").get<double>()) < 1e-12);
    if (!recorded.at("c_td").is_null()) {
        CHECK(std::abs(redo.at("c_td").get<double>() - recorded.at("c_td").get<double>()) < 1e-12);
    }
    fs::remove_all(dir);
}

TEST_CASE("exit codes distinguish usage, data and training failures") {
    const fs::path dir = fresh_dir("monosurv_cli_err");
    SUBCASE("unknown flag") {
        const RunResult r = run_cli("simulate --kind normal --n 10 --seed 1 --out x.csv --bogus 3", dir);
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("error:") != std::string::npos);
    }
    SUBCASE("unknown subcommand") {
        CHECK(run_cli("frobnicate", dir).exit_code == 2);
    }
    SUBCASE("unknown simulator kind") {
        const RunResult r = run_cli("simulate --kind cauchy --n 10 --seed 1 --out x.csv", dir);
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("cauchy") != std::string::npos);
    }
    SUBCASE("missing file") {
        const RunResult r = run_cli("evaluate --model nope.json --data nope.csv --out-report r.json", dir);
        CHECK(r.exit_code == 3);
    }
    SUBCASE("malformed numeric list") {
        REQUIRE(run_cli("simulate --kind weibull --n 50 --seed 1 --out d.csv", dir).exit_code == 0);
        REQUIRE(run_cli("simulate --kind weibull --n 30 --seed 2 --out v.csv", dir).exit_code == 0);
        std::ofstream(dir / "cfg.json") << R"({"max_epochs":2,"batch_size":25})";
        REQUIRE(run_cli("train --data d.csv --val v.csv --config cfg.json --seed 1 --out-model m.json", dir)
                    .exit_code == 0);
        const RunResult r = run_cli("predict --model m.json --x 0.5,oops --times 0:1:2 --out c.csv", dir);
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("oops") != std::string::npos);
        const RunResult r2 = run_cli("predict --model m.json --x 0.5 --times 0:1:0 --out c.csv", dir);
        CHECK(r2.exit_code == 2);
    }
    fs::remove_all(dir);
}

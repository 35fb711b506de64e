#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "buck/cli.hpp"
#include "buck/io.hpp"

using namespace buck;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("buck_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::size_t line_count(const std::string& path) {
    std::ifstream in(path);
    std::size_t n = 0;
    for (std::string l; std::getline(in, l);) ++n;
    return n;
}

// Small, fast configuration shared by the end-to-end tests.
const char* kSmallConfig = R"({
  "scenario": {"duration_s": 0.02},
  "dataset": {"duration_s": 0.01, "step_time_s": 0.005, "sample_interval_s": 5e-5},
  "compare": {"duration_s": 0.02, "event_time_s": 0.01}
})";

}  // namespace

TEST_CASE("usage errors exit with 1") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"nonsense"}).code == kExitUsage);
    CHECK(cli({"simulate", "--controller", "fuzzy"}).code == kExitUsage);
    CHECK(cli({"train", "--optimizer", "lbfgs"}).code == kExitUsage);
    CHECK(cli({"simulate", "--help"}).code == kExitOk);
}

TEST_CASE("config errors exit with 1 and name the key") {
    TempDir dir;
    io::write_file(dir / "bad.json", R"({"converter": {"capacitance": 1}})");
    const Run r = cli({"simulate", "--config", dir / "bad.json"});
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("converter.capacitance") != std::string::npos);
    CHECK(cli({"simulate", "--config", dir / "missing.json"}).code != kExitOk);
}

TEST_CASE("simulate writes a trace and prints metrics") {
    TempDir dir;
    io::write_file(dir / "cfg.json", kSmallConfig);
    const Run r = cli({"simulate", "--config", dir / "cfg.json", "--out", dir / "trace.csv"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("settling_ms=") != std::string::npos);
    std::ifstream in(dir / "trace.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == io::kTraceHeader);
    for (std::string line; std::getline(in, line);) {
        std::stringstream ss(line);
        std::string cell;
        for (int k = 0; k < 4; ++k) std::getline(ss, cell, ',');
        const double duty = std::stod(cell);
        CHECK(duty >= 0.0);
        CHECK(duty <= 1.0);
    }
}

TEST_CASE("dnn simulation needs a model") {
    TempDir dir;
    const Run r = cli({"simulate", "--controller", "dnn", "--model", dir / "none.json"});
    CHECK(r.code == kExitUsage);
    CHECK(cli({"compare", "--model", dir / "none.json", "--out", dir / "r.csv"}).code != kExitOk);
}

TEST_CASE("dataset, train, sweep and compare end to end") {
    TempDir dir;
    io::write_file(dir / "cfg.json", kSmallConfig);
    const std::string cfg = dir / "cfg.json";

    Run r = cli({"dataset", "--config", cfg, "--out", dir / "ds.csv"});
    REQUIRE(r.code == kExitOk);
    const std::size_t rows = line_count(dir / "ds.csv") - 1;
    CHECK(r.out.find("rows=" + std::to_string(rows)) != std::string::npos);

    r = cli({"train", "--config", cfg, "--dataset", dir / "ds.csv", "--out", dir / "model.json", "--epochs", "7"});
    REQUIRE(r.code == kExitOk);
    CHECK(line_count(dir / "model.history.csv") == 8);
    const Mlp net = io::load_model(dir / "model.json");
    CHECK(net.layer_sizes == std::vector<std::size_t>{2, 3, 3, 1});

    r = cli({"sweep", "--config", cfg, "--dataset", dir / "ds.csv", "--out", dir / "sweep.csv", "--epochs", "3"});
    REQUIRE(r.code == kExitOk);
    CHECK(line_count(dir / "sweep.csv") == 10);

    r = cli({"compare", "--config", cfg, "--model", dir / "model.json", "--out", dir / "report.csv", "--svg"});
    REQUIRE(r.code == kExitOk);
    std::ifstream in(dir / "report.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == io::kReportHeader);
    CHECK(line_count(dir / "report.csv") == 10);
    const std::string svg = io::read_file(dir / "report_load_step_v_o.svg");
    std::size_t polylines = 0;
    for (std::size_t pos = 0; (pos = svg.find("<polyline", pos)) != std::string::npos; ++pos) ++polylines;
    CHECK(polylines == 2);
    CHECK(fs::exists(dir / "report_startup_i_l.svg"));
}

TEST_CASE("training with zero learning rate keeps the initialization") {
    TempDir dir;
    io::write_file(dir / "ds.csv", "e,edot,f\n0.1,2,3\n0.2,-1,4\n0.5,0,1\n");
    io::write_file(dir / "lr0.json", R"({"train": {"learning_rate": 0}})");
    const Run r = cli({"train", "--config", dir / "lr0.json", "--dataset", dir / "ds.csv", "--out", dir / "m.json",
                       "--epochs", "1", "--seed", "5"});
    REQUIRE(r.code == kExitOk);
    const Mlp trained = io::load_model(dir / "m.json");
    const Mlp init = Mlp::create({2, 3, 3, 1}, Activation::relu, 5);
    for (std::size_t l = 0; l < init.layers.size(); ++l) {
        CHECK(trained.layers[l].weights == init.layers[l].weights);
        CHECK(trained.layers[l].bias == init.layers[l].bias);
    }
}

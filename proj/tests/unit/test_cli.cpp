#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "chronoseries/io.hpp"
#include "chronoseries/format.hpp"
#include "chronoseries/log.hpp"
#include "chronoseries/ops.hpp"
#include "chronoseries/plot.hpp"
#include "cli.hpp"
#include "test_support.hpp"

using namespace chronoseries;
using namespace chronoseries::testing;
namespace fs = std::filesystem;

namespace {

struct Result {
    int status;
    std::string out;
    std::string err;
    std::string log;
};

Result run(std::vector<std::string> args, const std::string& input = "") {
    args.insert(args.begin(), "chronoseries");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::istringstream in(input);
    std::ostringstream out;
    std::ostringstream err;
    const LogCapture log;
    const int status = cli::run(static_cast<int>(argv.size()), argv.data(), in, out, err);
    set_log_level(spdlog::level::info);
    return {status, out.str(), err.str(), log.text()};
}

class TempDir {
public:
    TempDir() : path_(fs::temp_directory_path() / ("chronoseries_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)))) {
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

const std::string humitemp = data_path("humitemp.csv").string();

}  // namespace

TEST_CASE("cli: info") {
    const auto r = run({"info", humitemp});
    CHECK(r.status == 0);
    CHECK(r.out.rfind("Time series of #14000 points at variable resolution (~615s)", 0) == 0);
}

TEST_CASE("cli: resample and aggregate pipeline") {
    TempDir dir;
    auto r = run({"resample", humitemp, "--unit", "1h", "--out", dir / "hourly.cs"});
    REQUIRE(r.status == 0);
    CHECK(r.log.find("Using auto-detected sampling interval: 615.0s") != std::string::npos);
    CHECK(r.log.find("Resampled 14000 DataTimePoints in 2519 DataTimePoints") != std::string::npos);
    const auto hourly = io::load(dir / "hourly.cs");
    CHECK(hourly.size() == 2519);
    CHECK_FALSE(fs::exists(dir / "hourly.cs.partial"));

    r = run({"aggregate", dir / "hourly.cs", "--tz", "Europe/Rome", "--unit", "1D", "--ops", "min,max,avg", "--format", "csv"});
    REQUIRE(r.status == 0);
    CHECK(r.out.rfind("start_epoch,end_epoch,temperature[C]_min,", 0) == 0);
    CHECK(r.log.find("Aggregated 2519 points in ") != std::string::npos);
}

TEST_CASE("cli: ops") {
    TempDir dir;
    const auto base = periodic_points(48, 24, 3600.0, {"a"});
    io::save(base, dir / "a.cs");
    io::save(periodic_points(48, 24, 3600.0, {"b"}), dir / "b.cs");
    auto r = run({"ops", dir / "a.cs", "--apply", "offset:2", "--apply", "rescale:3", "--stats"});
    REQUIRE(r.status == 0);
    CHECK(r.out.find("a_min: " + round_trip((ops::min(base).at("a") + 2) * 3)) != std::string::npos);
    r = run({"ops", dir / "a.cs", "--merge", dir / "b.cs", "--apply", "filter:b", "--format", "csv"});
    REQUIRE(r.status == 0);
    CHECK(r.out.rfind("epoch,b\n", 0) == 0);
    r = run({"ops", dir / "a.cs", "--apply", "mavg"});
    CHECK(r.status == 1);
    CHECK(r.err.rfind("error: invalid_argument: operation 'mavg' needs an argument", 0) == 0);
    r = run({"ops", dir / "a.cs", "--apply", "sqrt"});
    CHECK(r.err.rfind("error: invalid_argument: unknown operation 'sqrt'", 0) == 0);
}

TEST_CASE("cli: models") {
    TempDir dir;
    const auto series = periodic_points(24 * 10, 24, 3600.0, {"a", "b"});
    io::save(series, dir / "s.cs");
    auto r = run({"forecast", dir / "s.cs", "--periodicity", "24", "--steps", "3", "--fit-save", dir / "f.json"});
    REQUIRE(r.status == 0);
    const auto forecast = io::read_native(r.out);
    CHECK(forecast.size() == series.size() + 3);
    CHECK(forecast.at(-1).indexes.get("forecast") == 1.0);

    r = run({"forecast", dir / "s.cs", "--model-file", dir / "f.json", "--evaluate", "RMSE,MAE,MAPE"});
    REQUIRE(r.status == 0);
    CHECK(r.out == "a_MAE: 0\na_MAPE: 0\na_RMSE: 0\nb_MAE: 0\nb_MAPE: 0\nb_RMSE: 0\n");

    r = run({"forecast", dir / "s.cs", "--periodicity", "auto", "--cross-validate", "3"});
    REQUIRE(r.status == 0);
    CHECK(r.out.find("a_RMSE_avg: ") != std::string::npos);
    CHECK(r.out.find("b_MAE_stdev: ") != std::string::npos);
    CHECK(r.log.find("Detected periodicity 24 for 'a'") != std::string::npos);

    r = run({"detect-anomalies", dir / "s.cs", "--periodicity", "24", "--fit-save", dir / "d.json"});
    REQUIRE(r.status == 0);
    CHECK(io::read_native(r.out).size() == series.size() - 25);
    const auto again = run({"detect-anomalies", dir / "s.cs", "--model-file", dir / "d.json"});
    CHECK(again.out == r.out);

    r = run({"reconstruct", dir / "s.cs", "--periodicity", "24"});
    REQUIRE(r.status == 0);
    CHECK(io::read_native(r.out) == series);

    r = run({"reconstruct", dir / "s.cs", "--model-file", dir / "f.json"});
    CHECK(r.status == 1);
    CHECK(r.err.rfind("error: model: ", 0) == 0);
    r = run({"forecast", dir / "s.cs"});
    CHECK(r.err.rfind("error: invalid_argument: --periodicity is required", 0) == 0);
}

TEST_CASE("cli: plot") {
    TempDir dir;
    auto r = run({"plot", humitemp, "--html", dir / "p.html"});
    REQUIRE(r.status == 0);
    CHECK(r.log.find("Aggregating by \"10\" for improved plotting") != std::string::npos);
    const std::string html = io::read_file(dir / "p.html");
    CHECK(html.find("chronoseries-plot v1") != std::string::npos);
    r = run({"plot", humitemp, "--image", dir / "p.png", "--width", "400", "--height", "200"});
    REQUIRE(r.status == 0);
    CHECK(io::read_file(dir / "p.png").rfind("\x89PNG", 0) == 0);
    r = run({"plot", humitemp, "--image", dir / "p.svg", "--plot-labels", "humidity[RH]"});
    REQUIRE(r.status == 0);
    CHECK(io::read_file(dir / "p.svg").rfind("<svg", 0) == 0);
    r = run({"plot", humitemp, "--image", dir / "p.gif"});
    CHECK(r.status == 1);
    r = run({"plot", humitemp});
    CHECK(r.err.rfind("error: invalid_argument: plot needs --html or --image", 0) == 0);
}

TEST_CASE("cli: convert through stdin and stdout") {
    const std::string csv = "when;temp\n2019-01-03 02:00:00;1.5\n2019-01-03 03:00:00;2.5\n";
    auto r = run({"convert", "-", "--input-tz", "Europe/Rome", "--labels", "t"}, csv);
    REQUIRE(r.status == 0);
    const auto series = io::read_native(r.out);
    CHECK(series.tz() == "Europe/Rome");
    CHECK(series.labels() == std::vector<std::string>{"t"});
    CHECK(series.at(0).start.epoch == 1546477200.0);
    r = run({"convert", "-", "--format", "csv"}, io::write_native(series));
    CHECK(r.out == "epoch,t\n1546477200,1.5\n1546480800,2.5\n");
}

TEST_CASE("cli: errors and usage") {
    auto r = run({"resample", "/no/such/file.csv", "--unit", "1h"});
    CHECK(r.status == 1);
    CHECK(r.err.rfind("error: io: ", 0) == 0);
    r = run({"resample", humitemp});
    CHECK(r.status == 2);
    CHECK(r.err.rfind("error: usage: ", 0) == 0);
    r = run({"frobnicate"});
    CHECK(r.status == 2);
    r = run({});
    CHECK(r.status == 2);
    r = run({"resample", humitemp, "--unit", "1D"});
    CHECK(r.err.rfind("error: invalid_argument: cannot resample with calendar unit 1D", 0) == 0);
    r = run({"resample", humitemp, "--unit", "1h", "--tz", "Moon/Base"});
    CHECK(r.err.rfind("error: timezone: ", 0) == 0);
    r = run({"--log-level", "loud", "info", humitemp});
    CHECK(r.err.rfind("error: invalid_argument: unknown log level 'loud'", 0) == 0);
    r = run({"--log-level", "warn", "resample", humitemp, "--unit", "1h"});
    CHECK(r.status == 0);
    CHECK(r.log.empty());
    r = run({"--help"});
    CHECK(r.status == 0);
    CHECK(r.out.find("detect-anomalies") != std::string::npos);
}

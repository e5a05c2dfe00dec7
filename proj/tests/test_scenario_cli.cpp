#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "lta/json_util.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string output;
};

// Runs the CLI with stderr folded into the captured output.
Result cli(const std::string& args) {
    const std::string cmd = std::string("\"") + LTA_CLI + "\" " + args + " 2>&1";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.output.append(buf.data(), n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string scenario(const std::string& name) { return (fs::path(LTA_SCENARIO_DIR) / name).string(); }

fs::path temp_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("lta_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<std::string>> csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(cell);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_CASE("same seed twice gives byte-identical logs, another seed differs") {
    const auto a = temp_dir("det_a"), b = temp_dir("det_b"), c = temp_dir("det_c");
    const auto base = "simulate --config " + scenario("day1.json") + " --horizon-days 2 --out ";
    REQUIRE(cli(base + a.string()).code == 0);
    REQUIRE(cli(base + b.string()).code == 0);
    REQUIRE(cli(base + c.string() + " --seed 7").code == 0);
    const auto la = slurp(a / "events.jsonl");
    CHECK_FALSE(la.empty());
    CHECK(la == slurp(b / "events.jsonl"));
    CHECK(la != slurp(c / "events.jsonl"));
    for (const char* f : {"summary.txt", "run_histogram.csv", "recovery_table.csv", "daily_a_percent.csv",
                          "interactions.csv", "visit_plans.csv", "learned_state.json"})
        CHECK(fs::exists(a / f));
    for (const auto& d : {a, b, c}) fs::remove_all(d);
}

TEST_CASE("replay writes the same learned state as the online run") {
    const auto sim = temp_dir("replay_sim"), rep = temp_dir("replay_out");
    REQUIRE(cli("simulate --config " + scenario("day1.json") + " --horizon-days 3 --out " + sim.string()).code == 0);
    const auto r = cli("replay --log " + (sim / "events.jsonl").string() + " --config " + scenario("day1.json") +
                       " --out " + rep.string());
    REQUIRE(r.code == 0);
    CHECK(r.output.find("3 nightly rebuilds") != std::string::npos);
    CHECK(slurp(sim / "learned_state.json") == slurp(rep / "learned_state.json"));
    for (const char* f : {"edge_stats.json", "interaction_models.json", "activity_clusters.json"})
        CHECK(fs::exists(rep / f));
    fs::remove_all(sim);
    fs::remove_all(rep);
}

TEST_CASE("unknown config key fails and names the key") {
    const auto dir = temp_dir("bad_config");
    fs::create_directories(dir);
    auto doc = lta::Json::parse(slurp(scenario("day1.json")));
    doc["world"]["hazzard_typo"] = 1;
    doc["map"] = scenario("maps/office.json");
    const auto path = dir / "bad.json";
    std::ofstream(path) << doc.dump();
    const auto r = cli("simulate --config " + path.string() + " --out " + (dir / "out").string());
    CHECK(r.code != 0);
    CHECK(r.output.find("hazzard_typo") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("bad arguments are rejected") {
    CHECK(cli("simulate --config " + scenario("day1.json") + " --horizon-days 0 --out /tmp/lta_cli_never").code != 0);
    CHECK(cli("simulate --config " + scenario("day1.json") + " --variant sideways --out /tmp/lta_cli_never").code !=
          0);
    CHECK(cli("simulate --config /nonexistent.json --out /tmp/lta_cli_never").code != 0);
    CHECK(cli("nosuchcommand").code != 0);
    fs::remove_all("/tmp/lta_cli_never");
}

TEST_CASE("compare: one row per seed and variant, identical variants give identical columns") {
    const auto dir = temp_dir("compare");
    auto r = cli("compare --config " + scenario("adaptation.json") +
                 " --seeds 1-3 --variant adaptive --variant static_nav --horizon-days 2 --out " + dir.string());
    REQUIRE(r.code == 0);
    auto rows = csv(dir / "compare.csv");
    REQUIRE(rows.size() == 1 + 3 * 2);
    CHECK(rows[0][0] == "seed");
    CHECK(rows[0][2] == "navigation_failures");
    CHECK(rows[1][1] == "adaptive");
    CHECK(rows[2][1] == "static_nav");

    r = cli("compare --config " + scenario("adaptation.json") +
            " --seeds 4,5 --variant adaptive --variant adaptive --horizon-days 2 --out " + dir.string());
    REQUIRE(r.code == 0);
    rows = csv(dir / "compare.csv");
    REQUIRE(rows.size() == 1 + 2 * 2);
    CHECK(rows[1] == rows[2]);
    CHECK(rows[3] == rows[4]);

    CHECK(cli("compare --config " + scenario("adaptation.json") + " --seeds 1 --variant adaptive --out " +
              dir.string())
              .code != 0);
    fs::remove_all(dir);
}

TEST_CASE("validate-map reports counts, rejects a broken map") {
    auto r = cli("validate-map --map " + scenario("maps/office.json"));
    CHECK(r.code == 0);
    CHECK(r.output.find("valid map") != std::string::npos);

    const auto dir = temp_dir("bad_map");
    fs::create_directories(dir);
    auto doc = lta::Json::parse(slurp(scenario("maps/office.json")));
    doc["edges"][0]["target"] = "nowhere";
    std::ofstream(dir / "map.json") << doc.dump();
    r = cli("validate-map --map " + (dir / "map.json").string());
    CHECK(r.code != 0);
    CHECK(r.output.find("nowhere") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("fremen-fit recovers a daily square wave") {
    const auto dir = temp_dir("fremen");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "obs.csv");
        f << "t,state\n";
        for (int i = 0; i < 24 * 14; ++i) {
            const double t = i * 3600.0 + 600;
            f << t << ',' << (static_cast<int>(t / 3600) % 24 < 12 ? 1 : 0) << '\n';
        }
    }
    const auto r = cli("fremen-fit --input " + (dir / "obs.csv").string() + " --out " + (dir / "out").string() +
                       " --order 1 --predict-from 0 --predict-to 86400 --predict-step 3600");
    REQUIRE(r.code == 0);
    CHECK(r.output.find("components: 24h") != std::string::npos);
    const auto spectrum = csv(dir / "out" / "spectrum.csv");
    CHECK(spectrum.size() == 1 + 14);
    const auto predictions = csv(dir / "out" / "predictions.csv");
    REQUIRE(predictions.size() == 1 + 24);
    CHECK(std::stod(predictions[7][1]) > 0.5);   // 06:00
    CHECK(std::stod(predictions[19][1]) < 0.5);  // 18:00

    std::ofstream(dir / "bad.csv") << "t,state\n0,1\n3600,2\n";
    CHECK(cli("fremen-fit --input " + (dir / "bad.csv").string() + " --out " + (dir / "out2").string()).code != 0);
    fs::remove_all(dir);
}

TEST_CASE("metrics subcommand recomputes reports from a log with other windows") {
    const auto sim = temp_dir("metrics_sim"), out = temp_dir("metrics_out");
    REQUIRE(cli("simulate --config " + scenario("day1.json") + " --horizon-days 2 --out " + sim.string()).code == 0);
    auto r = cli("metrics --log " + (sim / "events.jsonl").string() + " --out " + out.string());
    REQUIRE(r.code == 0);
    CHECK(slurp(sim / "summary.txt") == slurp(out / "summary.txt"));
    CHECK(slurp(sim / "run_histogram.csv") == slurp(out / "run_histogram.csv"));

    r = cli("metrics --log " + (sim / "events.jsonl").string() + " --out " + out.string() +
            " --window-start-h 0 --window-end-h 24 --exclude-travel");
    REQUIRE(r.code == 0);
    const auto daily = csv(out / "daily_a_percent.csv");
    REQUIRE(daily.size() == 1 + 2);
    CHECK(daily[1][1] == "86400");
    CHECK(cli("metrics --log " + (sim / "events.jsonl").string() + " --out " + out.string() + " --window-start-h 8")
              .code != 0);
    fs::remove_all(sim);
    fs::remove_all(out);
}

TEST_CASE("thirty-day run completes with a nonzero recovery table") {
    const auto dir = temp_dir("endurance");
    const auto r = cli("simulate --config " + scenario("endurance30.json") + " --out " + dir.string());
    REQUIRE(r.code == 0);
    CHECK(r.output.find("Max TSL") != std::string::npos);
    const auto table = csv(dir / "recovery_table.csv");
    REQUIRE(table.size() > 1);
    int total = 0;
    const auto& header = table[0];
    const auto col = std::find(header.begin(), header.end(), "total") - header.begin();
    REQUIRE(col < static_cast<long>(header.size()));
    for (std::size_t i = 1; i < table.size(); ++i) total += std::stoi(table[i][static_cast<std::size_t>(col)]);
    CHECK(total > 0);
    const auto hist = csv(dir / "run_histogram.csv");
    CHECK(hist.size() >= 2);
    fs::remove_all(dir);
}

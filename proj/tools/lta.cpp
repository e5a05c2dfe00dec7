#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lta/error.hpp"
#include "lta/event_store.hpp"
#include "lta/fremen.hpp"
#include "lta/learner.hpp"
#include "lta/metrics.hpp"
#include "lta/runner.hpp"
#include "lta/scenario.hpp"
#include "lta/topomap.hpp"

namespace fs = std::filesystem;
using namespace lta;

namespace {

void write_json(const fs::path& path, const Json& doc) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write '" + path.string() + "'");
    f << doc.dump(2) << '\n';
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write '" + path.string() + "'");
    return f;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto dash = item.find('-');
        if (dash == std::string::npos) {
            out.push_back(std::stoull(item));
        } else {
            const auto lo = std::stoull(item.substr(0, dash)), hi = std::stoull(item.substr(dash + 1));
            if (hi < lo) throw ValidationError("seed range '" + item + "' is reversed");
            for (auto s = lo; s <= hi; ++s) out.push_back(s);
        }
    }
    if (out.empty()) throw ValidationError("no seeds given");
    return out;
}

scenario::Scenario load_with_overrides(const std::string& config, std::optional<std::uint64_t> seed,
                                       std::optional<int> horizon, const std::string& variant) {
    auto sc = scenario::load_scenario(config);
    if (seed) sc.seed = *seed;
    if (horizon) {
        if (*horizon < 1) throw ValidationError("--horizon-days must be >= 1");
        sc.horizon_days = *horizon;
    }
    if (!variant.empty()) sc.variant = scenario::variant_from_string(variant);
    return sc;
}

int cmd_simulate(const std::string& config, std::optional<std::uint64_t> seed, std::optional<int> horizon,
                 const std::string& variant, const fs::path& out) {
    const auto sc = load_with_overrides(config, seed, horizon, variant);
    fs::create_directories(out);
    store::EventStore store((out / "events.jsonl").string());
    auto run = run::simulate(sc, store, (out / "events.backup.jsonl").string());
    const auto& log = store.records();
    const auto windows = run::windows_from_log(log);
    run::write_reports(out, log, windows, {sc.executive.count_travel_as_active});
    {
        auto f = open_out(out / "visit_plans.csv");
        info::write_plan_csv(run.result.plans, f);
    }
    write_json(out / "learned_state.json", run.learner.state_json());
    std::ifstream summary(out / "summary.txt");
    std::cout << summary.rdbuf();
    std::cout << "Minimum battery        " << run.result.min_battery << '\n';
    return 0;
}

int cmd_replay(const std::string& log_path, const std::string& config, const fs::path& out) {
    const auto sc = scenario::load_scenario(config);
    const auto log = store::read_log_file(log_path);
    learn::Learner learner(sc.map, run::learner_options(sc));
    learner.apply_all(log);
    fs::create_directories(out);
    const auto state = learner.state_json();
    write_json(out / "learned_state.json", state);
    write_json(out / "edge_stats.json", state["edge_stats"]);
    write_json(out / "interaction_models.json", state["interaction_models"]);
    write_json(out / "activity_clusters.json", state["activity_clusters"]);
    std::cout << "replayed " << log.size() << " records, " << learner.rebuild_count() << " nightly rebuilds\n";
    return 0;
}

int cmd_metrics(const std::string& log_path, const fs::path& out, std::optional<double> w0, std::optional<double> w1,
                bool exclude_travel) {
    const auto log = store::read_log_file(log_path);
    auto windows = run::windows_from_log(log);
    if (w0 || w1) {
        if (!(w0 && w1)) throw ValidationError("give both --window-start-h and --window-end-h");
        double horizon = windows.empty() ? 0.0 : std::ceil(windows.back().end / 86400.0) * 86400.0;
        if (!log.empty()) horizon = std::max(horizon, log.back().t);
        windows = metrics::daily_windows(*w0, *w1, horizon);
    }
    run::write_reports(out, log, windows, {!exclude_travel});
    std::ifstream summary(out / "summary.txt");
    std::cout << summary.rdbuf();
    return 0;
}

int cmd_fremen_fit(const std::string& input, const fs::path& out, int order, const std::vector<double>& periods_h,
                   double predict_from, double predict_to, double predict_step) {
    std::ifstream in(input);
    if (!in) throw Error("cannot open '" + input + "'");
    auto options = fremen::FremenOptions::defaults();
    options.order = order;
    if (!periods_h.empty()) {
        options.periods_s.clear();
        for (double h : periods_h) options.periods_s.push_back(h * 3600.0);
    }
    fremen::FremenModel model(options);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const bool header = line_no == 1 && !(std::isdigit(static_cast<unsigned char>(line[0])) || line[0] == '-');
        if (header) continue;
        std::stringstream ss(line);
        std::string t, s;
        if (!std::getline(ss, t, ',') || !std::getline(ss, s, ','))
            throw ParseError(input + " line " + std::to_string(line_no) + ": expected t,state");
        try {
            const int state = std::stoi(s);
            if (state != 0 && state != 1) throw ParseError("state must be 0 or 1");
            model.add_observation(std::stod(t), state == 1);
        } catch (const std::logic_error&) {
            throw ParseError(input + " line " + std::to_string(line_no) + ": expected t,state");
        }
    }
    model.rebuild();
    fs::create_directories(out);
    write_json(out / "model.json", fremen::to_json(model));
    {
        auto f = open_out(out / "spectrum.csv");
        f << "period_s,amplitude,phase,retained\n";
        for (std::size_t j = 0; j < model.periods().size(); ++j) {
            const auto g = model.coefficients()[static_cast<Eigen::Index>(j)];
            bool kept = false;
            for (const auto& c : model.components()) kept = kept || c.index == j;
            f << model.periods()[j] << ',' << std::abs(g) << ',' << std::arg(g) << ',' << (kept ? 1 : 0) << '\n';
        }
    }
    if (predict_step > 0.0 && predict_to > predict_from) {
        auto f = open_out(out / "predictions.csv");
        f << "t,p,entropy\n";
        for (double t = predict_from; t < predict_to; t += predict_step) {
            const auto p = model.predict(t);
            f << t << ',' << p.p << ',' << p.h << '\n';
        }
    }
    std::cout << "observations " << model.count() << ", mean " << model.mean() << ", components:";
    for (const auto& c : model.components()) std::cout << ' ' << c.period_s / 3600.0 << "h";
    std::cout << '\n';
    return 0;
}

int cmd_validate_map(const std::string& path) {
    const auto map = topo::load_map_file(path);
    std::size_t enabled = 0;
    for (const auto& e : map.edges()) enabled += e.enabled ? 1 : 0;
    std::cout << "valid map: " << map.nodes().size() << " nodes, " << map.edges().size() << " edges (" << enabled
              << " enabled), dock '" << map.dock() << "'\n";
    return 0;
}

int cmd_compare(const std::string& config, const std::string& seeds, std::vector<std::string> variants,
                std::optional<int> horizon, const fs::path& out) {
    if (variants.size() < 2) throw ValidationError("compare needs at least two --variant values");
    std::vector<scenario::Variant> vs;
    for (const auto& v : variants) vs.push_back(scenario::variant_from_string(v));
    const auto base = load_with_overrides(config, std::nullopt, horizon, "");
    std::vector<run::VariantMetrics> rows;
    for (auto seed : parse_seeds(seeds))
        for (auto v : vs) rows.push_back(run::run_variant(base, seed, v));
    fs::create_directories(out);
    auto f = open_out(out / "compare.csv");
    run::write_compare_csv(rows, f);
    run::write_compare_csv(rows, std::cout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Long-term autonomy kernel: simulate deployments, replay logs, compute metrics"};
    app.require_subcommand(1);

    std::string config, out = "out", variant, log_path, input, map_path, seeds = "1-20";
    std::optional<std::uint64_t> seed;
    std::optional<int> horizon;
    std::vector<std::string> variants;

    auto* sim = app.add_subcommand("simulate", "Run the executive loop over a scenario");
    sim->add_option("--config", config, "Scenario JSON")->required();
    sim->add_option("--seed", seed, "Override the scenario seed");
    sim->add_option("--out", out, "Output directory");
    sim->add_option("--horizon-days", horizon, "Override the horizon");
    sim->add_option("--variant", variant, "adaptive | static_nav | uniform_info");

    auto* rep = app.add_subcommand("replay", "Rebuild learned state from an event log");
    rep->add_option("--log", log_path, "Event log (JSON Lines)")->required();
    rep->add_option("--config", config, "Scenario the log was produced with")->required();
    rep->add_option("--out", out, "Output directory");

    std::optional<double> w0, w1;
    bool exclude_travel = false;
    auto* met = app.add_subcommand("metrics", "LTA metrics and reports from an event log");
    met->add_option("--log", log_path, "Event log (JSON Lines)")->required();
    met->add_option("--out", out, "Output directory");
    met->add_option("--window-start-h", w0, "Daily autonomy window start (hours)");
    met->add_option("--window-end-h", w1, "Daily autonomy window end (hours)");
    met->add_flag("--exclude-travel", exclude_travel, "Do not count travel toward tasks as active");

    int order = 2;
    std::vector<double> periods_h;
    double p_from = 0.0, p_to = 0.0, p_step = 0.0;
    auto* ff = app.add_subcommand("fremen-fit", "Fit a FreMEn model to t,state observations");
    ff->add_option("--input", input, "CSV with columns t,state")->required();
    ff->add_option("--out", out, "Output directory");
    ff->add_option("--order", order, "Retained components");
    ff->add_option("--periods-h", periods_h, "Candidate periods in hours");
    ff->add_option("--predict-from", p_from, "Prediction start time (s)");
    ff->add_option("--predict-to", p_to, "Prediction end time (s)");
    ff->add_option("--predict-step", p_step, "Prediction step (s)");

    auto* vm = app.add_subcommand("validate-map", "Validate a topological map document");
    vm->add_option("--map", map_path, "Map JSON")->required();

    auto* cmp = app.add_subcommand("compare", "Paired runs of several variants over seeds");
    cmp->add_option("--config", config, "Scenario JSON")->required();
    cmp->add_option("--seeds", seeds, "Seeds, e.g. 1-20 or 1,5,9");
    cmp->add_option("--variant", variants, "Variant (repeat for each)")->required();
    cmp->add_option("--horizon-days", horizon, "Override the horizon");
    cmp->add_option("--out", out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(config, seed, horizon, variant, out);
        if (rep->parsed()) return cmd_replay(log_path, config, out);
        if (met->parsed()) return cmd_metrics(log_path, out, w0, w1, exclude_travel);
        if (ff->parsed()) return cmd_fremen_fit(input, out, order, periods_h, p_from, p_to, p_step);
        if (vm->parsed()) return cmd_validate_map(map_path);
        if (cmp->parsed()) return cmd_compare(config, seeds, variants, horizon, out);
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

// nilmtree: train decomposition trees on per-device power channels, decode
// an aggregate back into device estimates, and score the result.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "nilmtree/csv_io.hpp"
#include "nilmtree/disagg.hpp"
#include "nilmtree/errors.hpp"
#include "nilmtree/metrics.hpp"
#include "nilmtree/runconfig.hpp"
#include "nilmtree/synth.hpp"
#include "nilmtree/tree.hpp"

namespace fs = std::filesystem;
using namespace nilmtree;

namespace {

// Command-line values are collected as (key, value) overrides and applied on
// top of defaults and the config file, so precedence is one rule everywhere:
// defaults, then model manifest (disaggregate only), then file, then flags.
struct CliState {
    std::string config_file;
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_override(CLI::App* cmd, CliState& st, const std::string& flag, const std::string& key,
                  const std::string& desc) {
    cmd->add_option_function<std::string>(
        flag, [&st, key](const std::string& v) { st.overrides.emplace_back(key, v); }, desc);
}

void add_common(CLI::App* cmd, CliState& st) {
    cmd->add_option("--config", st.config_file, "key = value settings file");
}

RunConfig assemble(const CliState& st, RunConfig cfg = RunConfig{}) {
    if (!st.config_file.empty()) load_config_file(st.config_file, cfg);
    for (const auto& [k, v] : st.overrides) apply_setting(cfg, k, v);
    return cfg;
}

HouseData load_input(const RunConfig& cfg) {
    if (cfg.data_path.empty()) throw ConfigError("no input data given (--data or data.path)");
    CsvSchema schema;
    const CsvSchema* sp = nullptr;
    if (!cfg.schema_path.empty()) {
        schema = load_schema(cfg.schema_path);
        sp = &schema;
    }
    HouseData house = load_house(cfg.data_path, sp);
    if (cfg.resample_s > 0) house = resample(house, static_cast<std::int64_t>(cfg.resample_s));
    return house;
}

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) {
        if (!out.empty()) out += '+';
        out += n;
    }
    return out;
}

int cmd_train(const CliState& st) {
    RunConfig cfg = assemble(st);
    HouseData house = load_input(cfg);
    auto [train_part, test_part] = split_train_test(house, cfg.fraction);
    (void)test_part;

    DecompositionTree tree = build_tree(train_part, cfg.powerlet, cfg.tree);

    std::string model_dir = cfg.out_path.empty() ? "model" : cfg.out_path;
    save_tree(tree, model_dir);
    write_manifest((fs::path(model_dir) / "manifest.txt").string(), manifest_of(cfg));

    std::cout << "trained " << to_string(tree.method) << " tree over " << tree.devices.size()
              << " devices (" << train_part.sample_count() << " training samples)\n";
    for (const auto& log : tree.split_log)
        std::cout << "  split " << join_names(tree.node_names(TreeNode{log.set})) << " -> "
                  << join_names(tree.node_names(TreeNode{log.s1})) << " | "
                  << join_names(tree.node_names(TreeNode{log.s2}))
                  << "  dissimilarity=" << log.dissim << " swaps=" << log.swaps << '\n';
    std::cout << "model written to " << model_dir << '\n';
    return 0;
}

int cmd_disaggregate(const CliState& st) {
    RunConfig pre = assemble(st);
    if (pre.model_dir.empty()) throw ConfigError("disaggregate: --model is required");

    // Seed run-level settings from the model manifest so the test split and
    // aggregate choice match training; flags and config still override.
    RunConfig base;
    auto manifest_path = fs::path(pre.model_dir) / "manifest.txt";
    if (fs::exists(manifest_path)) {
        auto kv = read_manifest(manifest_path.string());
        for (const char* key : {"fraction", "resample_s", "aggregate"})
            if (auto it = kv.find(key); it != kv.end()) apply_setting(base, key, it->second);
    }
    RunConfig cfg = assemble(st, std::move(base));

    DecompositionTree tree = load_tree(cfg.model_dir);
    HouseData house = load_input(cfg);
    for (const auto& dev : tree.devices)
        if (house.device_index(dev) < 0)
            throw DataError("input data has no channel for model device '" + dev + "'");

    auto [train_part, test_part] = split_train_test(house, cfg.fraction);
    (void)train_part;

    PowerSeries agg;
    if (cfg.aggregate == "mains") {
        if (!test_part.mains) throw DataError("aggregate=mains but the input has no mains channel");
        agg = *test_part.mains;
    } else {
        agg = pseudo_signal(test_part, tree.devices);
    }
    agg.device_id = "aggregate";

    DisaggregationResult res = disaggregate(tree, agg, cfg.decode);

    std::string out = cfg.out_path.empty() ? "estimates.csv" : cfg.out_path;
    write_estimates_csv(res, agg, test_part, out);

    std::size_t solves = 0, unconverged = 0;
    for (const auto& wd : res.windows) {
        solves += wd.nodes.size();
        for (const auto& nd : wd.nodes)
            if (!nd.converged) ++unconverged;
    }
    std::cout << "decoded " << res.windows.size() << " windows (" << agg.size() << " samples, "
              << solves << " node solves, backend " << to_string(cfg.decode.backend) << ")\n";
    if (unconverged > 0)
        std::cout << "warning: " << unconverged << " node solves stopped before convergence\n";
    std::cout << "estimates written to " << out << '\n';
    return 0;
}

int cmd_evaluate(const CliState& st) {
    RunConfig cfg = assemble(st);
    if (cfg.result_path.empty()) throw ConfigError("evaluate: --result is required");
    EstimatesTable tab = read_estimates_csv(cfg.result_path);
    ScoreReport report = score_all(tab.devices, tab.truth, tab.estimates);

    std::string out_dir = cfg.out_path.empty() ? "." : cfg.out_path;
    fs::create_directories(out_dir);
    write_report_csv(report, (fs::path(out_dir) / "report.csv").string());
    write_report_txt(report, (fs::path(out_dir) / "report.txt").string());
    std::cout << format_report(report);
    return 0;
}

int cmd_synth(const CliState& st) {
    RunConfig cfg = assemble(st);
    if (cfg.synth.devices.empty())
        throw ConfigError("synth: no devices configured (set synth.devices in the config file)");
    HouseData house = synth_generate(cfg.synth);

    std::string out = cfg.out_path.empty() ? "house.csv" : cfg.out_path;
    save_house_csv(house, out);

    CsvSchema schema;
    schema.timestamp_col = "timestamp";
    for (const auto& dev : house.devices) schema.device_cols.emplace_back(dev.device_id, dev.device_id);
    schema.mains_col = "mains";
    std::string schema_path = fs::path(out).replace_extension(".schema.json").string();
    save_schema(schema, schema_path);

    std::cout << "generated " << house.sample_count() << " samples for " << house.devices.size()
              << " devices -> " << out << " (schema " << schema_path << ")\n";
    return 0;
}

int cmd_viz(const CliState& st) {
    RunConfig cfg = assemble(st);
    if (cfg.model_dir.empty()) throw ConfigError("viz: --model is required");
    DecompositionTree tree = load_tree(cfg.model_dir);

    std::string out_dir = cfg.out_path.empty() ? "." : cfg.out_path;
    fs::create_directories(out_dir);

    {
        std::ofstream dot(fs::path(out_dir) / "tree.dot");
        if (!dot) throw DataError("cannot write tree.dot");
        dot << tree_to_dot(tree);
    }
    {
        std::ofstream txt(fs::path(out_dir) / "powerlets.txt");
        if (!txt) throw DataError("cannot write powerlets.txt");
        txt << "devices: " << join_names(tree.devices) << '\n';
        txt << "method: " << to_string(tree.method) << "  w=" << tree.powerlet_params.w
            << "  k=" << tree.powerlet_params.k << '\n';
        std::vector<const TreeNode*> stack{tree.root.get()};
        while (!stack.empty()) {
            const TreeNode* n = stack.back();
            stack.pop_back();
            if (n->leaf()) continue;
            txt << "node " << join_names(tree.node_names(*n)) << ": left "
                << join_names(tree.node_names(*n->left)) << " N=" << n->left_dict->powerlets.size()
                << ", right " << join_names(tree.node_names(*n->right))
                << " N=" << n->right_dict->powerlets.size() << '\n';
            stack.push_back(n->right.get());
            stack.push_back(n->left.get());
        }
    }
    std::cout << "wrote " << out_dir << "/tree.dot and " << out_dir << "/powerlets.txt\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"powerlet decomposition trees for energy disaggregation"};
    app.require_subcommand(1);

    CliState st;

    auto* train = app.add_subcommand("train", "fit a decomposition tree on the training split");
    add_common(train, st);
    add_override(train, st, "--data", "data.path", "house CSV file or directory");
    add_override(train, st, "--schema", "data.schema", "CSV schema JSON");
    add_override(train, st, "--out", "out", "model output directory (default model)");
    add_override(train, st, "--w", "w", "window length in samples");
    add_override(train, st, "--k", "k", "powerlets per subdictionary");
    add_override(train, st, "--alpha", "alpha", "set-size exponent for the subset DP");
    add_override(train, st, "--method", "method", "gddm-equi | gddm-1vr | dpddm");
    add_override(train, st, "--seed", "seed", "random seed");
    add_override(train, st, "--restarts", "restarts", "balanced-split restarts");
    add_override(train, st, "--fraction", "fraction", "training share of the samples");
    add_override(train, st, "--resample", "resample_s", "resample to this interval in seconds");
    add_override(train, st, "--aggregate", "aggregate", "decode input: sum | mains");
    add_override(train, st, "--stride", "powerlet.stride", "training window stride");
    add_override(train, st, "--max-windows", "powerlet.max_windows",
                 "training window cap per subset");

    auto* dis = app.add_subcommand("disaggregate", "decode the test-split aggregate");
    add_common(dis, st);
    add_override(dis, st, "--model", "model", "model directory from train");
    add_override(dis, st, "--data", "data.path", "house CSV file or directory");
    add_override(dis, st, "--schema", "data.schema", "CSV schema JSON");
    add_override(dis, st, "--out", "out", "estimates CSV path (default estimates.csv)");
    add_override(dis, st, "--backend", "backend", "node solver: exhaustive | admm");
    add_override(dis, st, "--threads", "threads", "decode threads (0 = hardware)");
    add_override(dis, st, "--seed", "seed", "random seed");
    add_override(dis, st, "--fraction", "fraction", "training share of the samples");
    add_override(dis, st, "--resample", "resample_s", "resample to this interval in seconds");
    add_override(dis, st, "--aggregate", "aggregate", "decode input: sum | mains");
    add_override(dis, st, "--admm-mu", "admm.mu", "proximal weight");
    add_override(dis, st, "--admm-max-iter", "admm.max_iter", "iteration cap");
    add_override(dis, st, "--admm-samples", "admm.samples", "rounding samples");
    add_override(dis, st, "--solver-dump", "solver_dump", "directory for per-solve dumps");

    auto* eval = app.add_subcommand("evaluate", "score an estimates CSV");
    add_common(eval, st);
    add_override(eval, st, "--result", "result", "estimates CSV from disaggregate");
    add_override(eval, st, "--out", "out", "report directory (default .)");

    auto* synth = app.add_subcommand("synth", "generate a synthetic house CSV");
    add_common(synth, st);
    add_override(synth, st, "--out", "out", "output CSV path (default house.csv)");
    add_override(synth, st, "--length", "synth.length", "samples to generate");
    add_override(synth, st, "--noise", "synth.noise_sd", "per-channel noise sd in Watts");
    add_override(synth, st, "--seed", "synth.seed", "generator seed");

    auto* viz = app.add_subcommand("viz", "render a model as graphviz + a text summary");
    add_common(viz, st);
    add_override(viz, st, "--model", "model", "model directory from train");
    add_override(viz, st, "--out", "out", "output directory (default .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (train->parsed()) return cmd_train(st);
        if (dis->parsed()) return cmd_disaggregate(st);
        if (eval->parsed()) return cmd_evaluate(st);
        if (synth->parsed()) return cmd_synth(st);
        if (viz->parsed()) return cmd_viz(st);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const SolverError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

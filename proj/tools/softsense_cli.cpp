// Command-line front end: dataset synthesis, training, evaluation,
// prediction, knowledge-discovery export and the multi-target benchmark.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "softsense/checkpoint.hpp"
#include "softsense/csv.hpp"
#include "softsense/dataset.hpp"
#include "softsense/discovery.hpp"
#include "softsense/errors.hpp"
#include "softsense/graph.hpp"
#include "softsense/metrics.hpp"
#include "softsense/synth.hpp"
#include "softsense/training.hpp"

namespace fs = std::filesystem;
using namespace softsense;

namespace {

std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// One append-only JSON line per run, kept next to the command's outputs.
void append_manifest(const fs::path& dir, const std::string& command,
                     const std::string& config_hash, std::uint64_t seed,
                     const std::vector<std::string>& inputs,
                     const std::vector<std::string>& outputs, double wall_s) {
    nlohmann::json j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["wall_time_s"] = wall_s;
    j["versions"] = {{"checkpoint", kCheckpointFormat}};
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path path = dir / "softsense_runs.jsonl";
    std::ofstream out(path, std::ios::app);
    if (!out) throw IoError("cannot append manifest: " + path.string());
    out << j.dump() << '\n';
}

struct ConfigFlags {
    TrainConfig cfg;
    std::string config_path;
    std::string graph_refresh = "per-epoch";
    bool k_given = false;

    CLI::Option* opt_embedding = nullptr;
    CLI::Option* opt_batch = nullptr;
    CLI::Option* opt_hidden = nullptr;
    CLI::Option* opt_dropout = nullptr;
    CLI::Option* opt_lr = nullptr;
    CLI::Option* opt_window = nullptr;
    CLI::Option* opt_epochs = nullptr;
    CLI::Option* opt_patience = nullptr;
    CLI::Option* opt_k = nullptr;
    CLI::Option* opt_seed = nullptr;
    CLI::Option* opt_refresh = nullptr;
    CLI::Option* opt_symmetric = nullptr;
    CLI::Option* opt_train_frac = nullptr;
    CLI::Option* opt_val_frac = nullptr;
    CLI::Option* opt_test_frac = nullptr;
    CLI::Option* opt_grad_clip = nullptr;
    CLI::Option* opt_threads = nullptr;
};

void attach_config_flags(CLI::App* cmd, ConfigFlags& f) {
    f.opt_seed = cmd->add_option("--seed", f.cfg.seed, "RNG seed");
    f.opt_threads = cmd->add_option("--threads", f.cfg.threads, "worker threads");
    cmd->add_option("--config", f.config_path, "JSON config file (flags override it)");
    f.opt_embedding = cmd->add_option("--embedding-dim", f.cfg.embedding_dim, "sensor embedding dimension");
    f.opt_batch = cmd->add_option("--batch-size", f.cfg.batch_size, "mini-batch size");
    f.opt_hidden = cmd->add_option("--hidden-width", f.cfg.hidden_width, "hidden layer width");
    f.opt_dropout = cmd->add_option("--dropout", f.cfg.dropout, "hidden-layer dropout rate");
    f.opt_lr = cmd->add_option("--lr", f.cfg.learning_rate, "Adam learning rate");
    f.opt_window = cmd->add_option("--window", f.cfg.window, "sliding window size");
    f.opt_epochs = cmd->add_option("--epochs", f.cfg.max_epochs, "maximum epochs");
    f.opt_patience = cmd->add_option("--patience", f.cfg.patience, "early-stopping patience");
    f.opt_k = cmd->add_option("--k", f.cfg.k, "neighbors kept per node");
    f.opt_refresh = cmd->add_option("--graph-refresh", f.graph_refresh, "per-epoch or per-batch")
                        ->check(CLI::IsMember({"per-epoch", "per-batch"}));
    f.opt_symmetric = cmd->add_flag("--symmetric-graph", f.cfg.symmetric_graph,
                                    "union top-k edges with their reverses");
    f.opt_train_frac = cmd->add_option("--train-frac", f.cfg.fractions.train, "training fraction");
    f.opt_val_frac = cmd->add_option("--val-frac", f.cfg.fractions.val, "validation fraction");
    f.opt_test_frac = cmd->add_option("--test-frac", f.cfg.fractions.test, "test fraction");
    f.opt_grad_clip = cmd->add_option("--grad-clip", f.cfg.grad_clip, "global-norm clip, 0 = off");
}

void apply_config_file(TrainConfig& cfg, bool& k_set, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    for (const auto& [key, value] : j.items()) {
        if (key == "embedding_dim") cfg.embedding_dim = value.get<std::size_t>();
        else if (key == "batch_size") cfg.batch_size = value.get<std::size_t>();
        else if (key == "hidden_width") cfg.hidden_width = value.get<std::size_t>();
        else if (key == "dropout") cfg.dropout = value.get<double>();
        else if (key == "learning_rate") cfg.learning_rate = value.get<double>();
        else if (key == "window") cfg.window = value.get<std::size_t>();
        else if (key == "max_epochs") cfg.max_epochs = value.get<std::size_t>();
        else if (key == "patience") cfg.patience = value.get<std::size_t>();
        else if (key == "k") { cfg.k = value.get<std::size_t>(); k_set = true; }
        else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
        else if (key == "graph_refresh") cfg.graph_refresh = graph_refresh_from_string(value.get<std::string>());
        else if (key == "symmetric_graph") cfg.symmetric_graph = value.get<bool>();
        else if (key == "train_frac") cfg.fractions.train = value.get<double>();
        else if (key == "val_frac") cfg.fractions.val = value.get<double>();
        else if (key == "test_frac") cfg.fractions.test = value.get<double>();
        else if (key == "grad_clip") cfg.grad_clip = value.get<double>();
        else if (key == "threads") cfg.threads = value.get<std::size_t>();
        else throw ConfigError("unknown config key '" + key + "' in " + path);
    }
}

// Precedence: CLI flag > config file > built-in default.
TrainConfig resolve_config(ConfigFlags& f, bool& k_set) {
    TrainConfig from_cli = f.cfg;  // CLI11 already wrote flag values here
    TrainConfig cfg;               // defaults
    k_set = false;
    if (!f.config_path.empty()) apply_config_file(cfg, k_set, f.config_path);
    auto take = [](CLI::Option* opt, auto& dst, const auto& src) {
        if (opt != nullptr && opt->count() > 0) dst = src;
    };
    take(f.opt_embedding, cfg.embedding_dim, from_cli.embedding_dim);
    take(f.opt_batch, cfg.batch_size, from_cli.batch_size);
    take(f.opt_hidden, cfg.hidden_width, from_cli.hidden_width);
    take(f.opt_dropout, cfg.dropout, from_cli.dropout);
    take(f.opt_lr, cfg.learning_rate, from_cli.learning_rate);
    take(f.opt_window, cfg.window, from_cli.window);
    take(f.opt_epochs, cfg.max_epochs, from_cli.max_epochs);
    take(f.opt_patience, cfg.patience, from_cli.patience);
    if (f.opt_k->count() > 0) {
        cfg.k = from_cli.k;
        k_set = true;
    }
    take(f.opt_seed, cfg.seed, from_cli.seed);
    if (f.opt_refresh->count() > 0) cfg.graph_refresh = graph_refresh_from_string(f.graph_refresh);
    take(f.opt_symmetric, cfg.symmetric_graph, from_cli.symmetric_graph);
    take(f.opt_train_frac, cfg.fractions.train, from_cli.fractions.train);
    take(f.opt_val_frac, cfg.fractions.val, from_cli.fractions.val);
    take(f.opt_test_frac, cfg.fractions.test, from_cli.fractions.test);
    take(f.opt_grad_clip, cfg.grad_clip, from_cli.grad_clip);
    take(f.opt_threads, cfg.threads, from_cli.threads);
    return cfg;
}

std::string config_json(const TrainConfig& cfg) {
    nlohmann::json j;
    j["embedding_dim"] = cfg.embedding_dim;
    j["batch_size"] = cfg.batch_size;
    j["hidden_width"] = cfg.hidden_width;
    j["dropout"] = cfg.dropout;
    j["learning_rate"] = cfg.learning_rate;
    j["window"] = cfg.window;
    j["max_epochs"] = cfg.max_epochs;
    j["patience"] = cfg.patience;
    j["k"] = cfg.k;
    j["seed"] = cfg.seed;
    j["graph_refresh"] = to_string(cfg.graph_refresh);
    j["symmetric_graph"] = cfg.symmetric_graph;
    j["train_frac"] = cfg.fractions.train;
    j["val_frac"] = cfg.fractions.val;
    j["test_frac"] = cfg.fractions.test;
    return j.dump();
}

std::size_t resolve_target(const ProcessDataset& ds, const std::string& target) {
    const auto tags = ds.tags();
    for (std::size_t c = 0; c < tags.size(); ++c) {
        if (tags[c] == target) return c;
    }
    // numeric form: 1-based column number
    try {
        std::size_t pos = 0;
        const long num = std::stol(target, &pos);
        if (pos == target.size() && num >= 1 && static_cast<std::size_t>(num) <= tags.size()) {
            return static_cast<std::size_t>(num - 1);
        }
    } catch (const std::exception&) {
    }
    std::string avail;
    for (std::size_t c = 0; c < tags.size(); ++c) {
        if (c) avail += ", ";
        avail += tags[c];
    }
    throw ConfigError("unknown target tag '" + target + "'; available: " + avail);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

struct TrainOutputs {
    fs::path checkpoint, history, stats, graph, similarity;
};

TrainOutputs run_training(const ProcessDataset& ds, const TrainConfig& cfg,
                          std::size_t target_index, const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    const TrainResult result = train(ds, cfg, target_index);

    TrainOutputs files;
    files.checkpoint = out_dir / "checkpoint.json";
    files.history = out_dir / "history.csv";
    files.stats = out_dir / "stats.json";
    files.graph = out_dir / "graph.json";
    files.similarity = out_dir / "similarity.csv";

    save_checkpoint(result.checkpoint, files.checkpoint.string());
    save_history_csv(result.history, files.history.string());
    save_stats_json(result.checkpoint.stats, files.stats.string());

    const LearnedGraph graph = learn_graph(result.checkpoint.z, cfg.k);
    std::vector<std::string> input_tags;
    for (std::size_t c = 0; c < ds.n_vars(); ++c) {
        if (c != target_index) input_tags.push_back(ds.variable_meta[c].tag);
    }
    save_graph_json(graph, input_tags, files.graph.string());
    Matrix sim_with_header = graph.similarity;
    write_csv(files.similarity.string(), input_tags, sim_with_header);

    std::cout << "trained target '" << result.checkpoint.target_tag << "': best epoch "
              << result.best_epoch << " of " << result.history.size() << ", val mse "
              << format_double(result.best_val_mse) << '\n';
    std::cout << "checkpoint: " << files.checkpoint.string() << '\n';
    return files;
}

int cmd_gen_synth(const SynthSpec& spec, const std::string& out_path) {
    const auto t0 = std::chrono::steady_clock::now();
    const SynthResult result = generate_synth(spec);
    const fs::path out(out_path);
    if (out.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(out.parent_path(), ec);
    }
    write_synth(result, out_path);
    const auto t1 = std::chrono::steady_clock::now();

    nlohmann::json spec_json = {{"n_sensors", spec.n_sensors}, {"length", spec.length},
                                {"drivers", spec.drivers},     {"lag", spec.lag},
                                {"noise", spec.noise},         {"kind", spec.kind},
                                {"seed", spec.seed}};
    fs::path truth = out;
    truth.replace_extension();
    append_manifest(out.has_parent_path() ? out.parent_path() : fs::path("."), "gen-synth",
                    fnv1a_hex(spec_json.dump()), spec.seed, {},
                    {out_path, truth.string() + "_truth.json"},
                    std::chrono::duration<double>(t1 - t0).count());
    std::cout << "wrote " << out_path << " (" << spec.length << " rows, "
              << spec.n_sensors + 1 << " columns)\n";
    return 0;
}

int cmd_train(const std::string& data_path, const std::string& target, ConfigFlags& flags,
              const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    bool k_set = false;
    TrainConfig cfg = resolve_config(flags, k_set);
    const ProcessDataset ds = load_csv(data_path);
    const std::size_t target_index = resolve_target(ds, target);
    const std::size_t n = ds.n_vars() - 1;
    if (!k_set) cfg.k = std::min<std::size_t>(6, n - 1);
    cfg.validate();

    const TrainOutputs files = run_training(ds, cfg, target_index, out_dir);
    const auto t1 = std::chrono::steady_clock::now();
    append_manifest(out_dir, "train", fnv1a_hex(config_json(cfg)), cfg.seed, {data_path},
                    {files.checkpoint.string(), files.history.string(), files.stats.string(),
                     files.graph.string(), files.similarity.string()},
                    std::chrono::duration<double>(t1 - t0).count());
    return 0;
}

int cmd_evaluate(const std::string& ckpt_path, const std::string& data_path,
                 const std::string& split, const std::string& out_dir, std::size_t threads) {
    const auto t0 = std::chrono::steady_clock::now();
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const ProcessDataset ds = load_csv(data_path);
    const auto samples = windows_for_split(ds, ckpt, split);
    const EvalResult result = evaluate(ckpt, samples, threads);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    const fs::path report_json = fs::path(out_dir) / "report.json";
    const fs::path report_csv = fs::path(out_dir) / "report.csv";
    {
        std::ofstream out(report_json);
        if (!out) throw IoError("cannot write file: " + report_json.string());
        out << report_to_json(result.report) << '\n';
    }
    {
        std::ofstream out(report_csv);
        if (!out) throw IoError("cannot write file: " + report_csv.string());
        out << report_csv_header() << '\n'
            << report_csv_row(ckpt.target_tag, "softsense", result.report) << '\n';
    }
    std::cout << "target " << ckpt.target_tag << " (" << split << ", "
              << result.report.n_samples << " samples)\n";
    std::cout << "  nrmse: " << format_double(result.report.nrmse) << " %\n";
    std::cout << "  r2:    " << format_double(result.report.r2) << '\n';
    std::cout << "  nmae:  " << format_double(result.report.nmae) << " %\n";
    std::cout << "  mape:  " << format_double(result.report.mape) << " %\n";
    const auto t1 = std::chrono::steady_clock::now();
    append_manifest(out_dir, "evaluate", fnv1a_hex(read_file(ckpt_path)), ckpt.config.seed,
                    {ckpt_path, data_path}, {report_json.string(), report_csv.string()},
                    std::chrono::duration<double>(t1 - t0).count());
    return 0;
}

int cmd_predict(const std::string& ckpt_path, const std::string& data_path,
                const std::string& split, const std::string& out_path, std::size_t threads) {
    const auto t0 = std::chrono::steady_clock::now();
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const ProcessDataset ds = load_csv(data_path);
    const auto samples = windows_for_split(ds, ckpt, split);
    const EvalResult result = evaluate(ckpt, samples, threads);

    const fs::path out(out_path);
    if (out.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(out.parent_path(), ec);
    }
    std::ofstream file(out_path);
    if (!file) throw IoError("cannot write file: " + out_path);
    file << "t_index,y_true,y_hat\n";
    for (const auto& p : result.predictions) {
        file << p.t_index << ',' << format_double(p.y_true) << ',' << format_double(p.y_hat)
             << '\n';
    }
    std::cout << "wrote " << result.predictions.size() << " predictions to " << out_path << '\n';
    const auto t1 = std::chrono::steady_clock::now();
    append_manifest(out.has_parent_path() ? out.parent_path() : fs::path("."), "predict",
                    fnv1a_hex(read_file(ckpt_path)), ckpt.config.seed, {ckpt_path, data_path},
                    {out_path}, std::chrono::duration<double>(t1 - t0).count());
    return 0;
}

int cmd_discover(const std::string& ckpt_path, const std::string& data_path,
                 const std::string& split, const std::string& out_dir, std::size_t threads) {
    const auto t0 = std::chrono::steady_clock::now();
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const ProcessDataset ds = load_csv(data_path);
    const auto samples = windows_for_split(ds, ckpt, split);
    if (samples.empty()) throw std::runtime_error("discover: no samples in split '" + split + "'");

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    const DiscoveryBundle bundle = make_bundle(ckpt, ds, samples, threads);
    const std::string checkpoint_id = fnv1a_hex(read_file(ckpt_path));
    const std::string range = split + "[t=" + std::to_string(samples.front().t_index) + ".." +
                              std::to_string(samples.back().t_index) + "]";
    export_bundle(bundle, out_dir, ckpt.target_tag, checkpoint_id, range);
    std::cout << "wrote discovery matrices for '" << ckpt.target_tag << "' to " << out_dir
              << '\n';
    const auto t1 = std::chrono::steady_clock::now();
    append_manifest(out_dir, "discover", checkpoint_id, ckpt.config.seed,
                    {ckpt_path, data_path},
                    {(fs::path(out_dir) / (ckpt.target_tag + "_data.csv")).string(),
                     (fs::path(out_dir) / (ckpt.target_tag + "_embed.csv")).string(),
                     (fs::path(out_dir) / (ckpt.target_tag + "_attn.csv")).string(),
                     (fs::path(out_dir) / "manifest.json").string()},
                    std::chrono::duration<double>(t1 - t0).count());
    return 0;
}

// Runs the six benchmark target settings end to end and emits one comparison
// row per target variable.
int cmd_bench_mfp(const std::string& data_path, ConfigFlags& flags, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    bool k_set = false;
    TrainConfig cfg = resolve_config(flags, k_set);
    const ProcessDataset ds = load_csv(data_path);
    if (ds.n_vars() < 21) {
        throw ShapeError("bench-mfp: dataset has " + std::to_string(ds.n_vars()) +
                         " columns, benchmark targets need at least 21");
    }
    if (!k_set) cfg.k = std::min<std::size_t>(6, ds.n_vars() - 2);
    cfg.validate();

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    const std::vector<std::size_t> targets = {5, 8, 15, 16, 19, 20};  // 1-based columns
    const fs::path table_path = fs::path(out_dir) / "benchmark_comparison.csv";
    std::ofstream table(table_path);
    if (!table) throw IoError("cannot write file: " + table_path.string());
    table << "model,variable,target_tag,nrmse,r2,nmae,mape\n";
    std::vector<std::string> outputs{table_path.string()};

    for (const std::size_t var : targets) {
        const std::size_t target_index = var - 1;
        const fs::path sub = fs::path(out_dir) / ("var" + std::to_string(var));
        const TrainOutputs files = run_training(ds, cfg, target_index, sub);
        const Checkpoint ckpt = load_checkpoint(files.checkpoint.string());
        const auto samples = windows_for_split(ds, ckpt, "test");
        const EvalResult result = evaluate(ckpt, samples, cfg.threads);
        table << "softsense," << var << ',' << ckpt.target_tag << ','
              << format_double(result.report.nrmse) << ',' << format_double(result.report.r2)
              << ',' << format_double(result.report.nmae) << ','
              << format_double(result.report.mape) << '\n';
        table.flush();
        outputs.push_back(files.checkpoint.string());
        std::cout << "variable " << var << " (" << ckpt.target_tag
                  << "): nrmse " << format_double(result.report.nrmse) << " %, r2 "
                  << format_double(result.report.r2) << '\n';
    }
    const auto t1 = std::chrono::steady_clock::now();
    append_manifest(out_dir, "bench-mfp", fnv1a_hex(config_json(cfg)), cfg.seed, {data_path},
                    outputs, std::chrono::duration<double>(t1 - t0).count());
    std::cout << "comparison table: " << table_path.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph-attention soft sensing over multivariate process data"};
    app.require_subcommand(1);
    app.fallthrough();

    // gen-synth
    SynthSpec spec;
    std::string synth_out = "synth.csv";
    auto* gen = app.add_subcommand("gen-synth", "generate a synthetic process dataset");
    gen->add_option("--out", synth_out, "output CSV path");
    gen->add_option("--sensors", spec.n_sensors, "input sensor count");
    gen->add_option("--length", spec.length, "timesteps");
    gen->add_option("--drivers", spec.drivers, "1-based driver sensor numbers")->delimiter(',');
    gen->add_option("--lag", spec.lag, "target lag in steps");
    gen->add_option("--noise", spec.noise, "target noise stddev");
    gen->add_option("--kind", spec.kind, "linear or nonlinear")
        ->check(CLI::IsMember({"linear", "nonlinear"}));
    gen->add_option("--seed", spec.seed, "RNG seed");

    // train
    std::string train_data, train_target, train_out = ".";
    ConfigFlags train_flags;
    auto* tr = app.add_subcommand("train", "train a soft sensor for one target variable");
    tr->add_option("--data", train_data, "input CSV")->required();
    tr->add_option("--target", train_target, "target tag or 1-based column number")->required();
    tr->add_option("--out", train_out, "output directory");
    attach_config_flags(tr, train_flags);

    // evaluate
    std::string eval_ckpt, eval_data, eval_split = "test", eval_out = ".";
    std::size_t eval_threads = 1;
    auto* ev = app.add_subcommand("evaluate", "evaluate a checkpoint on a dataset split");
    ev->add_option("--checkpoint", eval_ckpt, "checkpoint JSON")->required();
    ev->add_option("--data", eval_data, "input CSV")->required();
    ev->add_option("--split", eval_split, "train|val|test|all");
    ev->add_option("--out", eval_out, "output directory");
    ev->add_option("--threads", eval_threads, "worker threads");

    // predict
    std::string pred_ckpt, pred_data, pred_split = "all", pred_out = "predictions.csv";
    std::size_t pred_threads = 1;
    auto* pr = app.add_subcommand("predict", "write per-window predictions");
    pr->add_option("--checkpoint", pred_ckpt, "checkpoint JSON")->required();
    pr->add_option("--data", pred_data, "input CSV")->required();
    pr->add_option("--split", pred_split, "train|val|test|all");
    pr->add_option("--out", pred_out, "output CSV path");
    pr->add_option("--threads", pred_threads, "worker threads");

    // discover
    std::string disc_ckpt, disc_data, disc_split = "test", disc_out = "discovery";
    std::size_t disc_threads = 1;
    auto* di = app.add_subcommand("discover", "export correlation and attention matrices");
    di->add_option("--checkpoint", disc_ckpt, "checkpoint JSON")->required();
    di->add_option("--data", disc_data, "input CSV")->required();
    di->add_option("--split", disc_split, "train|val|test|all");
    di->add_option("--out", disc_out, "output directory");
    di->add_option("--threads", disc_threads, "worker threads");

    // bench-mfp
    std::string bench_data, bench_out = "bench";
    ConfigFlags bench_flags;
    auto* be = app.add_subcommand("bench-mfp",
                                  "train/evaluate the six benchmark target variables");
    be->add_option("--data", bench_data, "24-variable benchmark CSV")->required();
    be->add_option("--out", bench_out, "output directory");
    attach_config_flags(be, bench_flags);

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return cmd_gen_synth(spec, synth_out);
        if (tr->parsed()) return cmd_train(train_data, train_target, train_flags, train_out);
        if (ev->parsed()) return cmd_evaluate(eval_ckpt, eval_data, eval_split, eval_out, eval_threads);
        if (pr->parsed()) return cmd_predict(pred_ckpt, pred_data, pred_split, pred_out, pred_threads);
        if (di->parsed()) return cmd_discover(disc_ckpt, disc_data, disc_split, disc_out, disc_threads);
        if (be->parsed()) return cmd_bench_mfp(bench_data, bench_flags, bench_out);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

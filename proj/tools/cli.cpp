#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "vatd/data_synth.hpp"
#include "vatd/mlm.hpp"
#include "vatd/refine.hpp"
#include "vatd/rng.hpp"
#include "vatd/train.hpp"

namespace vatd::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json config_to_json(const Config& cfg) {
    json out = json::object();
    for (const auto& [k, v] : cfg.entries()) {
        out[k] = v;
    }
    return out;
}

void write_metrics(const std::string& path, const Config& cfg,
                   const MetricsLog& log) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open metrics file for writing: " + path);
    }
    json header;
    header["config_hash"] = cfg.hash();
    header["config"] = config_to_json(cfg);
    out << header.dump() << '\n';
    for (const auto& rec : log.records) {
        json j;
        j["step"] = rec.step;
        j["ce_loss"] = rec.ce_loss;
        j["consistency_loss"] = rec.consistency_loss;
        j["tsa_kept_fraction"] = rec.tsa_kept_fraction;
        j["dev_accuracy"] = rec.dev_accuracy;
        j["mean_kl_adv"] = rec.mean_kl_adv;
        j["mean_kl_uniform_probe"] = rec.mean_kl_uniform_probe;
        j["chosen_rank_histogram"] = rec.chosen_rank_histogram;
        out << j.dump() << '\n';
    }
    if (!out) {
        throw std::runtime_error("failed writing metrics file: " + path);
    }
}

// resolution order: defaults first, config file second, explicit flags last
Config resolve(const Config& defaults, const std::string& config_path,
               const Config& flags) {
    Config cfg = defaults;
    if (!config_path.empty()) {
        cfg.merge(Config::from_file(config_path));
    }
    cfg.merge(flags);
    return cfg;
}

// ---- gen-data -----------------------------------------------------------

struct GenDataArgs {
    std::string out_dir;
    std::string config_path;
    Config flags;
};

int cmd_gen_data(const GenDataArgs& args) {
    Config defaults;
    const SynthSpec base = default_spec();
    defaults.set("synth.num_classes", base.num_classes);
    defaults.set("synth.keywords_per_class", base.keywords_per_class);
    defaults.set("synth.filler_pool", base.filler_pool);
    defaults.set("synth.len_min", base.len_min);
    defaults.set("synth.len_max", base.len_max);
    defaults.set("synth.keyword_rate", base.keyword_rate);
    defaults.set("synth.label_noise", base.label_noise);
    defaults.set("synth.seed", base.seed);
    defaults.set("synth.n_total", 4000);
    defaults.set("synth.labeled_per_class", 10);
    defaults.set("synth.n_unlabeled", 2000);
    defaults.set("synth.n_dev", 500);
    defaults.set("synth.split_seed", uint64_t{1});

    const Config cfg = resolve(defaults, args.config_path, args.flags);

    SynthSpec spec;
    spec.num_classes = cfg.get_int("synth.num_classes");
    spec.keywords_per_class = cfg.get_int("synth.keywords_per_class");
    spec.filler_pool = cfg.get_int("synth.filler_pool");
    spec.len_min = cfg.get_int("synth.len_min");
    spec.len_max = cfg.get_int("synth.len_max");
    spec.keyword_rate = cfg.get_double("synth.keyword_rate");
    spec.label_noise = cfg.get_double("synth.label_noise");
    spec.seed = cfg.get_u64("synth.seed");
    spec.validate();

    const RawCorpus corpus = generate(spec, cfg.get_int("synth.n_total"));
    const SplitResult parts =
        split(corpus, cfg.get_int("synth.labeled_per_class"),
              cfg.get_int("synth.n_unlabeled"), cfg.get_int("synth.n_dev"),
              cfg.get_u64("synth.split_seed"));

    fs::create_directories(args.out_dir);
    save_tsv(parts.labeled, (fs::path(args.out_dir) / "labeled.tsv").string());
    save_tsv(parts.unlabeled, (fs::path(args.out_dir) / "unlabeled.tsv").string());
    save_tsv(parts.dev, (fs::path(args.out_dir) / "dev.tsv").string());
    save_tsv(parts.test, (fs::path(args.out_dir) / "test.tsv").string());
    {
        std::ofstream out(fs::path(args.out_dir) / "spec.cfg");
        out << cfg.serialize();
        if (!out) {
            throw std::runtime_error("failed writing spec.cfg");
        }
    }
    json summary;
    summary["config_hash"] = cfg.hash();
    summary["labeled"] = parts.labeled.size();
    summary["unlabeled"] = parts.unlabeled.size();
    summary["dev"] = parts.dev.size();
    summary["test"] = parts.test.size();
    std::cout << summary.dump() << '\n';
    return 0;
}

// ---- pretrain-mlm -------------------------------------------------------

struct PretrainArgs {
    std::vector<std::string> data_paths;
    std::string out_path;
    std::string vocab_out;
    std::string config_path;
    Config flags;
};

int cmd_pretrain_mlm(const PretrainArgs& args) {
    Config defaults;
    defaults.set("mlm.d_m", 32);
    defaults.set("mlm.h_m", 64);
    defaults.set("mlm.window", 3);
    defaults.set("mlm.epochs", 5);
    defaults.set("mlm.lr", 1e-3);
    defaults.set("mlm.batch_size", 32);
    defaults.set("mlm.seed", uint64_t{1});
    defaults.set("mlm.min_freq", 1);
    defaults.set("mlm.max_vocab", 2048);

    const Config cfg = resolve(defaults, args.config_path, args.flags);

    LabelMap labels;
    RawCorpus all;
    for (const auto& p : args.data_paths) {
        RawCorpus part = load_tsv(p, labels);
        all.insert(all.end(), part.begin(), part.end());
    }
    if (all.empty()) {
        throw std::invalid_argument("pretrain-mlm: no input sentences");
    }

    const Vocab vocab = build_vocab(corpus_texts(all), cfg.get_int("mlm.min_freq"),
                                    cfg.get_int("mlm.max_vocab"));
    const std::vector<Sentence> sentences = encode_sentences(all, vocab);

    MLMTrainConfig tc;
    tc.d_m = cfg.get_int("mlm.d_m");
    tc.h_m = cfg.get_int("mlm.h_m");
    tc.window = cfg.get_int("mlm.window");
    tc.epochs = cfg.get_int("mlm.epochs");
    tc.lr = cfg.get_double("mlm.lr");
    tc.batch_size = cfg.get_int("mlm.batch_size");
    tc.seed = cfg.get_u64("mlm.seed");

    std::vector<double> losses;
    const MLMParams mlm = train_mlm(sentences, vocab.size(), tc, &losses);

    const std::string vocab_path =
        args.vocab_out.empty() ? args.out_path + ".vocab" : args.vocab_out;
    save_vocab(vocab, vocab_path);
    save_mlm(mlm, args.out_path);

    json summary;
    summary["config_hash"] = cfg.hash();
    summary["vocab_size"] = vocab.size();
    summary["sentences"] = sentences.size();
    summary["epoch_losses"] = losses;
    summary["vocab_path"] = vocab_path;
    std::cout << summary.dump() << '\n';
    return 0;
}

// ---- train --------------------------------------------------------------

struct TrainArgs {
    std::string labeled_path;
    std::string unlabeled_path;
    std::string dev_path;
    std::string vocab_path;
    std::string mlm_path;
    std::string out_path;
    std::string metrics_path;
    std::string config_path;
    Config flags;
};

Config train_defaults() {
    Config d;
    const TrainingConfig base;
    d.set("train.lr", base.lr);
    d.set("train.total_steps", base.total_steps);
    d.set("train.labeled_batch", base.labeled_batch);
    d.set("train.unlabeled_batch", base.unlabeled_batch);
    d.set("train.eval_every", base.eval_every);
    d.set("train.seed", base.seed);
    d.set("train.d", base.d);
    d.set("train.d_a", base.d_a);
    d.set("train.h", base.h);
    d.set("train.tsa", base.tsa_enabled);
    d.set("train.strategy", "vat_d");
    const PerturbationConfig pc;
    d.set("perturb.tau", pc.tau);
    d.set("perturb.topk", pc.k);
    d.set("perturb.temp", pc.T);
    d.set("perturb.refine", pc.S);
    return d;
}

TrainingConfig training_config_from(const Config& cfg) {
    TrainingConfig tc;
    tc.lr = cfg.get_double("train.lr");
    tc.total_steps = cfg.get_int("train.total_steps");
    tc.labeled_batch = cfg.get_int("train.labeled_batch");
    tc.unlabeled_batch = cfg.get_int("train.unlabeled_batch");
    tc.eval_every = cfg.get_int("train.eval_every");
    tc.seed = cfg.get_u64("train.seed");
    tc.d = cfg.get_int("train.d");
    tc.d_a = cfg.get_int("train.d_a");
    tc.h = cfg.get_int("train.h");
    tc.tsa_enabled = cfg.get_bool("train.tsa");

    const std::string strategy = cfg.get_string("train.strategy");
    if (strategy == "ce-only") {
        tc.use_consistency = false;
    } else {
        tc.use_consistency = true;
        tc.perturbation.strategy = parse_strategy(strategy);
    }
    tc.perturbation.tau = cfg.get_double("perturb.tau");
    tc.perturbation.k = cfg.get_int("perturb.topk");
    tc.perturbation.T = cfg.get_double("perturb.temp");
    tc.perturbation.S = cfg.get_int("perturb.refine");
    tc.perturbation.seed = tc.seed;
    return tc;
}

int cmd_train(const TrainArgs& args) {
    const Config cfg = resolve(train_defaults(), args.config_path, args.flags);
    const TrainingConfig tc = training_config_from(cfg);

    if (tc.use_consistency && args.mlm_path.empty()) {
        throw std::invalid_argument("MLM checkpoint required for strategy '" +
                                    cfg.get_string("train.strategy") + "'");
    }

    const Vocab vocab = load_vocab(args.vocab_path);
    LabelMap labels;
    const RawCorpus labeled_raw = load_tsv(args.labeled_path, labels);
    const RawCorpus dev_raw = load_tsv(args.dev_path, labels);

    std::vector<Sentence> unlabeled;
    if (!args.unlabeled_path.empty()) {
        LabelMap scratch;  // unlabeled labels are ignored
        unlabeled = encode_sentences(load_tsv(args.unlabeled_path, scratch), vocab);
    }

    MLMParams mlm;
    const MLMParams* mlm_ptr = nullptr;
    if (!args.mlm_path.empty()) {
        mlm = load_mlm(args.mlm_path);
        if (mlm.vocab_size != vocab.size()) {
            throw std::runtime_error(
                "vocabulary size mismatch between vocab file and MLM checkpoint");
        }
        mlm_ptr = &mlm;
    }

    const TrainResult result =
        train(tc, vocab.size(), encode_corpus(labeled_raw, vocab), unlabeled,
              encode_corpus(dev_raw, vocab), mlm_ptr);

    if (!args.out_path.empty()) {
        save_classifier(result.best_params, args.out_path, labels.names(),
                        cfg.hash());
    }
    if (!args.metrics_path.empty()) {
        write_metrics(args.metrics_path, cfg, result.log);
    }

    json summary;
    summary["config_hash"] = cfg.hash();
    summary["best_dev_accuracy"] = result.best_dev_accuracy;
    summary["best_step"] = result.best_step;
    std::cout << summary.dump() << '\n';
    return 0;
}

// ---- eval ---------------------------------------------------------------

struct EvalArgs {
    std::string checkpoint_path;
    std::string data_path;
    std::string vocab_path;
};

int cmd_eval(const EvalArgs& args) {
    const ClassifierCheckpoint ckpt = load_classifier(args.checkpoint_path);
    const Vocab vocab = load_vocab(args.vocab_path);
    if (ckpt.params.vocab_size != vocab.size()) {
        throw std::runtime_error(
            "vocabulary size mismatch between vocab file and checkpoint");
    }

    LabelMap labels = LabelMap::from_names(ckpt.labels);
    const int known = labels.size();
    const RawCorpus data = load_tsv(args.data_path, labels);
    if (known > 0 && labels.size() > known) {
        throw std::invalid_argument("data contains label '" +
                                    labels.name(known) +
                                    "' unknown to the checkpoint");
    }
    for (const auto& ex : data) {
        if (ex.class_id >= ckpt.params.C) {
            throw std::invalid_argument("label '" + ex.label +
                                        "' exceeds the model's class count");
        }
    }

    const double acc = evaluate(ckpt.params, encode_corpus(data, vocab));
    json out;
    out["accuracy"] = acc;
    out["n"] = data.size();
    std::cout << out.dump() << '\n';
    return 0;
}

// ---- perturb ------------------------------------------------------------

struct PerturbArgs {
    std::string classifier_path;
    std::string mlm_path;
    std::string vocab_path;
    std::string data_path;
    std::string out_path;
    std::string config_path;
    int limit = 0;
    Config flags;
};

int cmd_perturb(const PerturbArgs& args) {
    Config defaults;
    const PerturbationConfig base;
    defaults.set("perturb.tau", base.tau);
    defaults.set("perturb.topk", base.k);
    defaults.set("perturb.temp", base.T);
    defaults.set("perturb.refine", base.S);
    defaults.set("perturb.strategy", "vat_d");
    defaults.set("perturb.seed", base.seed);
    const Config cfg = resolve(defaults, args.config_path, args.flags);

    PerturbationConfig pc;
    pc.tau = cfg.get_double("perturb.tau");
    pc.k = cfg.get_int("perturb.topk");
    pc.T = cfg.get_double("perturb.temp");
    pc.S = cfg.get_int("perturb.refine");
    pc.strategy = parse_strategy(cfg.get_string("perturb.strategy"));
    pc.seed = cfg.get_u64("perturb.seed");
    pc.validate();

    const ClassifierCheckpoint ckpt = load_classifier(args.classifier_path);
    const MLMParams mlm = load_mlm(args.mlm_path);
    const Vocab vocab = load_vocab(args.vocab_path);
    if (ckpt.params.vocab_size != vocab.size() ||
        mlm.vocab_size != vocab.size()) {
        throw std::runtime_error(
            "vocabulary size mismatch between checkpoints and vocab file");
    }

    LabelMap scratch;
    const RawCorpus data = load_tsv(args.data_path, scratch);

    std::ofstream out(args.out_path);
    if (!out) {
        throw std::runtime_error("cannot open dump file for writing: " +
                                 args.out_path);
    }
    json header;
    header["config_hash"] = cfg.hash();
    header["config"] = config_to_json(cfg);
    out << header.dump() << '\n';

    size_t n = data.size();
    if (args.limit > 0) {
        n = std::min(n, static_cast<size_t>(args.limit));
    }
    for (size_t i = 0; i < n; ++i) {
        const Sentence x = encode_sentences({data[i]}, vocab)[0];
        // per-sentence substreams keep records independent of processing
        // order
        auto index_rng = make_rng(pc.seed, "index-selection", i);
        auto strategy_rng = make_rng(pc.seed, "sampling-strategy", i);
        const Perturbation p = iterative_refinements(
            ckpt.params, mlm, x, pc, index_rng, strategy_rng);

        json rec;
        rec["original_text"] = vocab.decode(p.original);
        rec["perturbed_text"] = vocab.decode(p.perturbed);
        rec["indexes"] = p.indexes;
        rec["chosen_ranks"] = p.chosen_ranks;
        rec["adversarial_scores"] = p.chosen_scores;
        rec["kl_before_after"] = std::vector<double>{p.kl_before, p.kl_after};
        rec["ppl_original"] = pseudo_perplexity(mlm, p.original);
        rec["ppl_trace"] = p.ppl_trace;
        out << rec.dump() << '\n';
    }
    if (!out) {
        throw std::runtime_error("failed writing dump file: " + args.out_path);
    }
    json summary;
    summary["config_hash"] = cfg.hash();
    summary["records"] = n;
    std::cout << summary.dump() << '\n';
    return 0;
}

// ---- ablate -------------------------------------------------------------

struct AblateArgs {
    std::string labeled_path;
    std::string unlabeled_path;
    std::string dev_path;
    std::string vocab_path;
    std::string mlm_path;
    std::string out_dir;
    std::string config_path;
    std::vector<std::string> strategies;
    std::vector<uint64_t> seeds;
    Config flags;
};

int cmd_ablate(const AblateArgs& args) {
    if (args.strategies.empty() || args.seeds.empty()) {
        throw std::invalid_argument("ablate: need at least one strategy and one seed");
    }
    const Config shared = resolve(train_defaults(), args.config_path, args.flags);

    // validate strategy names up front
    for (const auto& s : args.strategies) {
        if (s != "ce-only") parse_strategy(s);
    }
    const bool needs_mlm =
        std::any_of(args.strategies.begin(), args.strategies.end(),
                    [](const std::string& s) { return s != "ce-only"; });
    if (needs_mlm && args.mlm_path.empty()) {
        throw std::invalid_argument("MLM checkpoint required for the requested strategies");
    }

    const Vocab vocab = load_vocab(args.vocab_path);
    LabelMap labels;
    const std::vector<LabeledExample> labeled =
        encode_corpus(load_tsv(args.labeled_path, labels), vocab);
    const std::vector<LabeledExample> dev =
        encode_corpus(load_tsv(args.dev_path, labels), vocab);
    std::vector<Sentence> unlabeled;
    if (!args.unlabeled_path.empty()) {
        LabelMap scratch;
        unlabeled = encode_sentences(load_tsv(args.unlabeled_path, scratch), vocab);
    }
    MLMParams mlm;
    const MLMParams* mlm_ptr = nullptr;
    if (!args.mlm_path.empty()) {
        mlm = load_mlm(args.mlm_path);
        if (mlm.vocab_size != vocab.size()) {
            throw std::runtime_error(
                "vocabulary size mismatch between vocab file and MLM checkpoint");
        }
        mlm_ptr = &mlm;
    }

    fs::create_directories(args.out_dir);

    json summary;
    summary["config_hash"] = shared.hash();
    summary["seeds"] = args.seeds;
    summary["strategies"] = json::object();
    bool any_failed = false;

    std::cout << "strategy      mean     stddev   runs\n";
    for (const auto& strat : args.strategies) {
        std::vector<double> accs;
        std::vector<int> best_steps;
        std::vector<uint64_t> failed;
        std::vector<int64_t> rank_hist;
        std::vector<double> cons_trace;
        size_t trace_runs = 0;

        for (uint64_t seed : args.seeds) {
            Config cell = shared;
            cell.set("train.strategy", strat);
            cell.set("train.seed", seed);
            try {
                const TrainingConfig tc = training_config_from(cell);
                const TrainResult r = train(tc, vocab.size(), labeled,
                                            unlabeled, dev,
                                            strat == "ce-only" ? nullptr : mlm_ptr);
                accs.push_back(r.best_dev_accuracy);
                best_steps.push_back(r.best_step);
                if (!r.log.records.empty()) {
                    const auto& hist = r.log.records.back().chosen_rank_histogram;
                    if (rank_hist.size() < hist.size()) {
                        rank_hist.resize(hist.size(), 0);
                    }
                    for (size_t i = 0; i < hist.size(); ++i) {
                        rank_hist[i] += hist[i];
                    }
                    if (cons_trace.size() < r.log.records.size()) {
                        cons_trace.resize(r.log.records.size(), 0.0);
                    }
                    for (size_t i = 0; i < r.log.records.size(); ++i) {
                        cons_trace[i] += r.log.records[i].consistency_loss;
                    }
                    ++trace_runs;
                }
                write_metrics((fs::path(args.out_dir) /
                               (strat + "_seed" + std::to_string(seed) +
                                ".metrics.jsonl"))
                                  .string(),
                              cell, r.log);
            } catch (const std::exception& e) {
                std::cerr << "ablate cell failed (" << strat << ", seed "
                          << seed << "): " << e.what() << '\n';
                failed.push_back(seed);
                any_failed = true;
            }
        }

        double mean = 0.0, stddev = 0.0;
        for (double a : accs) mean += a;
        if (!accs.empty()) mean /= static_cast<double>(accs.size());
        if (accs.size() > 1) {
            for (double a : accs) stddev += (a - mean) * (a - mean);
            stddev = std::sqrt(stddev / static_cast<double>(accs.size() - 1));
        }
        if (trace_runs > 0) {
            for (double& v : cons_trace) v /= static_cast<double>(trace_runs);
        }

        json row;
        row["accuracies"] = accs;
        row["mean"] = mean;
        row["stddev"] = stddev;
        row["best_steps"] = best_steps;
        row["failed_seeds"] = failed;
        row["rank_histogram"] = rank_hist;
        row["mean_consistency_trace"] = cons_trace;
        summary["strategies"][strat] = row;

        std::ostringstream line;
        line.setf(std::ios::fixed);
        line.precision(4);
        line << strat;
        for (size_t i = strat.size(); i < 12; ++i) line << ' ';
        line << "  " << mean << "   " << stddev << "   " << accs.size() << "/"
             << args.seeds.size();
        std::cout << line.str() << '\n';
    }

    {
        std::ofstream out(fs::path(args.out_dir) / "summary.json");
        out << summary.dump(2) << '\n';
        if (!out) {
            throw std::runtime_error("failed writing summary.json");
        }
    }
    return any_failed ? 2 : 0;
}

// ---- option plumbing ----------------------------------------------------

// binds a flag so that, when the user passes it, the value lands in the
// Config under `key` (giving flags the last word over file and defaults)
void bind_double(CLI::App* cmd, const std::string& flag, const std::string& key,
                 Config* flags, const std::string& desc) {
    cmd->add_option_function<double>(
        flag, [flags, key](double v) { flags->set(key, v); }, desc);
}

void bind_int(CLI::App* cmd, const std::string& flag, const std::string& key,
              Config* flags, const std::string& desc) {
    cmd->add_option_function<int>(
        flag, [flags, key](int v) { flags->set(key, v); }, desc);
}

void bind_u64(CLI::App* cmd, const std::string& flag, const std::string& key,
              Config* flags, const std::string& desc) {
    cmd->add_option_function<uint64_t>(
        flag, [flags, key](uint64_t v) { flags->set(key, v); }, desc);
}

void bind_string(CLI::App* cmd, const std::string& flag, const std::string& key,
                 Config* flags, const std::string& desc) {
    cmd->add_option_function<std::string>(
        flag, [flags, key](const std::string& v) { flags->set(key, v); }, desc);
}

void add_train_flags(CLI::App* cmd, Config* flags) {
    bind_double(cmd, "--lr", "train.lr", flags, "learning rate");
    bind_int(cmd, "--steps", "train.total_steps", flags, "training steps");
    bind_int(cmd, "--labeled-batch", "train.labeled_batch", flags,
             "labeled batch size");
    bind_int(cmd, "--unlabeled-batch", "train.unlabeled_batch", flags,
             "unlabeled batch size");
    bind_int(cmd, "--eval-every", "train.eval_every", flags,
             "steps between dev evaluations");
    bind_u64(cmd, "--seed", "train.seed", flags, "root seed");
    bind_int(cmd, "--dim", "train.d", flags, "embedding width");
    bind_int(cmd, "--attn-dim", "train.d_a", flags, "attention width");
    bind_int(cmd, "--hidden", "train.h", flags, "hidden width");
    cmd->add_flag_function(
        "--no-tsa",
        [flags](int64_t) { flags->set("train.tsa", false); },
        "disable training signal annealing");
    bind_double(cmd, "--tau", "perturb.tau", flags, "replacement ratio");
    bind_int(cmd, "--topk", "perturb.topk", flags, "candidate set size");
    bind_double(cmd, "--temp", "perturb.temp", flags,
                "sharpening temperature");
    bind_int(cmd, "--refine", "perturb.refine", flags, "refinement steps");
}

std::vector<uint64_t> parse_seed_list(const std::string& csv) {
    std::vector<uint64_t> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoull(item));
    }
    return out;
}

std::vector<std::string> parse_name_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{
        "consistency training with virtual adversarial token replacement"};
    app.require_subcommand(1);

    GenDataArgs gen;
    auto* gen_cmd = app.add_subcommand(
        "gen-data", "generate a synthetic classification benchmark");
    gen_cmd->add_option("--out", gen.out_dir, "output directory")->required();
    gen_cmd->add_option("--config", gen.config_path, "config file");
    bind_int(gen_cmd, "--classes", "synth.num_classes", &gen.flags,
             "number of classes");
    bind_int(gen_cmd, "--keywords", "synth.keywords_per_class", &gen.flags,
             "keywords per class");
    bind_int(gen_cmd, "--fillers", "synth.filler_pool", &gen.flags,
             "shared filler pool size");
    bind_int(gen_cmd, "--len-min", "synth.len_min", &gen.flags,
             "minimum sentence length");
    bind_int(gen_cmd, "--len-max", "synth.len_max", &gen.flags,
             "maximum sentence length");
    bind_double(gen_cmd, "--keyword-rate", "synth.keyword_rate", &gen.flags,
                "probability a token is class-diagnostic");
    bind_double(gen_cmd, "--label-noise", "synth.label_noise", &gen.flags,
                "label flip probability");
    bind_u64(gen_cmd, "--seed", "synth.seed", &gen.flags, "generation seed");
    bind_int(gen_cmd, "--n-total", "synth.n_total", &gen.flags,
             "total examples to generate");
    bind_int(gen_cmd, "--labeled-per-class", "synth.labeled_per_class",
             &gen.flags, "labeled examples per class");
    bind_int(gen_cmd, "--unlabeled", "synth.n_unlabeled", &gen.flags,
             "unlabeled pool size");
    bind_int(gen_cmd, "--dev", "synth.n_dev", &gen.flags, "dev set size");
    bind_u64(gen_cmd, "--split-seed", "synth.split_seed", &gen.flags,
             "partition seed");

    PretrainArgs pre;
    auto* pre_cmd = app.add_subcommand(
        "pretrain-mlm", "train the context-window language model");
    pre_cmd->add_option("--data", pre.data_paths, "input TSV files")
        ->required()
        ->expected(-1);
    pre_cmd->add_option("--out", pre.out_path, "checkpoint path")->required();
    pre_cmd->add_option("--vocab-out", pre.vocab_out,
                        "vocab file path (default: <out>.vocab)");
    pre_cmd->add_option("--config", pre.config_path, "config file");
    bind_int(pre_cmd, "--d-m", "mlm.d_m", &pre.flags, "embedding width");
    bind_int(pre_cmd, "--h-m", "mlm.h_m", &pre.flags, "hidden width");
    bind_int(pre_cmd, "--window", "mlm.window", &pre.flags,
             "context half-width");
    bind_int(pre_cmd, "--epochs", "mlm.epochs", &pre.flags, "training epochs");
    bind_double(pre_cmd, "--lr", "mlm.lr", &pre.flags, "learning rate");
    bind_int(pre_cmd, "--batch-size", "mlm.batch_size", &pre.flags,
             "batch size");
    bind_u64(pre_cmd, "--seed", "mlm.seed", &pre.flags, "seed");
    bind_int(pre_cmd, "--min-freq", "mlm.min_freq", &pre.flags,
             "minimum token frequency");
    bind_int(pre_cmd, "--max-vocab", "mlm.max_vocab", &pre.flags,
             "maximum vocabulary size");

    TrainArgs tr;
    auto* tr_cmd =
        app.add_subcommand("train", "train the classifier with consistency");
    tr_cmd->add_option("--labeled", tr.labeled_path, "labeled TSV")->required();
    tr_cmd->add_option("--unlabeled", tr.unlabeled_path, "unlabeled TSV");
    tr_cmd->add_option("--dev", tr.dev_path, "dev TSV")->required();
    tr_cmd->add_option("--vocab", tr.vocab_path, "vocab file")->required();
    tr_cmd->add_option("--mlm", tr.mlm_path, "frozen MLM checkpoint");
    tr_cmd->add_option("--out", tr.out_path, "best checkpoint path");
    tr_cmd->add_option("--metrics", tr.metrics_path, "metrics JSONL path");
    tr_cmd->add_option("--config", tr.config_path, "config file");
    bind_string(tr_cmd, "--strategy", "train.strategy", &tr.flags,
                "vat_d | uniform | argmax | sampling | ce-only");
    add_train_flags(tr_cmd, &tr.flags);

    EvalArgs ev;
    auto* ev_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
    ev_cmd->add_option("--checkpoint", ev.checkpoint_path, "classifier checkpoint")
        ->required();
    ev_cmd->add_option("--data", ev.data_path, "labeled TSV")->required();
    ev_cmd->add_option("--vocab", ev.vocab_path, "vocab file")->required();

    PerturbArgs pt;
    auto* pt_cmd = app.add_subcommand(
        "perturb", "dump adversarial perturbations for a corpus");
    pt_cmd->add_option("--classifier", pt.classifier_path,
                       "classifier checkpoint")
        ->required();
    pt_cmd->add_option("--mlm", pt.mlm_path, "MLM checkpoint")->required();
    pt_cmd->add_option("--vocab", pt.vocab_path, "vocab file")->required();
    pt_cmd->add_option("--data", pt.data_path, "input TSV")->required();
    pt_cmd->add_option("--out", pt.out_path, "dump path (JSON lines)")
        ->required();
    pt_cmd->add_option("--limit", pt.limit, "process only the first N records");
    pt_cmd->add_option("--config", pt.config_path, "config file");
    bind_double(pt_cmd, "--tau", "perturb.tau", &pt.flags, "replacement ratio");
    bind_int(pt_cmd, "--topk", "perturb.topk", &pt.flags, "candidate set size");
    bind_double(pt_cmd, "--temp", "perturb.temp", &pt.flags,
                "sharpening temperature");
    bind_int(pt_cmd, "--refine", "perturb.refine", &pt.flags,
             "refinement steps");
    bind_string(pt_cmd, "--strategy", "perturb.strategy", &pt.flags,
                "vat_d | uniform | argmax | sampling");
    bind_u64(pt_cmd, "--seed", "perturb.seed", &pt.flags, "seed");

    AblateArgs ab;
    std::string ab_strategies = "vat_d,uniform,argmax,sampling,ce-only";
    std::string ab_seeds = "1,2,3,4,5";
    auto* ab_cmd = app.add_subcommand(
        "ablate", "sweep replacement strategies across seeds");
    ab_cmd->add_option("--labeled", ab.labeled_path, "labeled TSV")->required();
    ab_cmd->add_option("--unlabeled", ab.unlabeled_path, "unlabeled TSV");
    ab_cmd->add_option("--dev", ab.dev_path, "dev TSV")->required();
    ab_cmd->add_option("--vocab", ab.vocab_path, "vocab file")->required();
    ab_cmd->add_option("--mlm", ab.mlm_path, "MLM checkpoint");
    ab_cmd->add_option("--out", ab.out_dir, "output directory")->required();
    ab_cmd->add_option("--strategies", ab_strategies,
                       "comma-separated strategy list");
    ab_cmd->add_option("--seeds", ab_seeds, "comma-separated seed list");
    ab_cmd->add_option("--config", ab.config_path, "config file");
    add_train_flags(ab_cmd, &ab.flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen_cmd->parsed()) return cmd_gen_data(gen);
        if (pre_cmd->parsed()) return cmd_pretrain_mlm(pre);
        if (tr_cmd->parsed()) return cmd_train(tr);
        if (ev_cmd->parsed()) return cmd_eval(ev);
        if (pt_cmd->parsed()) return cmd_perturb(pt);
        if (ab_cmd->parsed()) {
            ab.strategies = parse_name_list(ab_strategies);
            ab.seeds = parse_seed_list(ab_seeds);
            return cmd_ablate(ab);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace vatd::cli

// Command-line surface for the anchored-embeddings pipeline:
// preprocess, train, train-dynamic, eval, eval-sota, trajectory, synth.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "anchored/corpus.hpp"
#include "anchored/evaluation.hpp"
#include "anchored/synth.hpp"
#include "anchored/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// One run directory per invocation; an existing path gets a timestamp suffix.
std::string fresh_dir(const std::string& requested) {
    fs::path p(requested);
    if (fs::exists(p)) {
        auto now = std::chrono::system_clock::now().time_since_epoch();
        auto us = std::chrono::duration_cast<std::chrono::microseconds>(now).count();
        p = fs::path(requested + "." + std::to_string(us));
    }
    fs::create_directories(p);
    return p.string();
}

struct PreprocessOpts {
    std::string manifest;
    std::string out_dir;
    anchored::PreprocessConfig cfg;
    bool no_lowercase = false;
    bool no_punct = false;
    bool no_stem = false;
};

// `normalization_only` registers just the flags that affect how single words
// are normalized (anchor and hold-out lookup); the corpus-level options stay
// exclusive to the preprocess subcommand to avoid clashing with train --seed.
void add_preprocess_flags(CLI::App* cmd, PreprocessOpts& opts, bool normalization_only = false) {
    cmd->add_flag("--no-lowercase", opts.no_lowercase, "Keep original letter case");
    cmd->add_flag("--no-strip-punctuation", opts.no_punct, "Keep punctuation characters");
    cmd->add_flag("--no-stem", opts.no_stem, "Skip stemming");
    cmd->add_option("--number-token", opts.cfg.number_token, "Replacement token for digit runs");
    if (normalization_only) return;
    cmd->add_option("--vocab-max", opts.cfg.vocab_max, "Vocabulary size cap")
        ->check(CLI::Range(2, 100000000));
    cmd->add_option("--subsample-threshold", opts.cfg.subsample_threshold,
                    "Frequency subsampling threshold")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", opts.cfg.seed, "RNG seed");
}

void finalize_preprocess(PreprocessOpts& opts) {
    opts.cfg.lowercase = !opts.no_lowercase;
    opts.cfg.strip_punctuation = !opts.no_punct;
    opts.cfg.stem = !opts.no_stem;
}

struct AnchorOpts {
    std::string anchors_file;
    std::string dimension;  // gender | sentiment shortcut
    std::string data_dir = "data";
    std::string prior_kind;
    bool neutral = false;
    double sigma = -1, gamma = -1, omega = -1, psi = -1;
};

void add_anchor_flags(CLI::App* cmd, AnchorOpts& opts) {
    cmd->add_option("--anchors", opts.anchors_file, "Anchor file (JSON)");
    cmd->add_option("--dimension", opts.dimension, "Shipped anchor set: gender or sentiment")
        ->check(CLI::IsMember({"gender", "sentiment"}));
    cmd->add_option("--data-dir", opts.data_dir, "Directory holding shipped anchor files");
    cmd->add_option("--prior", opts.prior_kind,
                    "Prior kind override: none, standard-basis, truncated");
    cmd->add_flag("--neutral", opts.neutral, "Enable the neutral-word prior");
    cmd->add_option("--sigma", opts.sigma, "Base prior variance");
    cmd->add_option("--gamma", opts.gamma, "Anchor dimension-K variance");
    cmd->add_option("--omega", opts.omega, "Anchor off-dimension variance");
    cmd->add_option("--psi", opts.psi, "Neutral-word dimension-K variance");
}

anchored::AnchorRequest resolve_anchor_request(const AnchorOpts& opts) {
    std::string path = opts.anchors_file;
    if (path.empty() && !opts.dimension.empty())
        path = (fs::path(opts.data_dir) / ("anchors_" + opts.dimension + ".json")).string();
    anchored::AnchorRequest req;
    if (!path.empty()) req = anchored::read_anchor_file(path);
    if (!opts.prior_kind.empty()) req.kind = anchored::prior_kind_from_string(opts.prior_kind);
    if (opts.neutral) req.use_neutral = true;
    if (opts.sigma > 0) req.sigma = opts.sigma;
    if (opts.gamma > 0) req.gamma = opts.gamma;
    if (opts.omega > 0) req.omega = opts.omega;
    if (opts.psi > 0) req.psi = opts.psi;
    return req;
}

void write_resolution_report(const std::string& path, const anchored::AnchorResolution& res) {
    json j;
    j["resolved"] = json::object();
    for (const auto& [word, id] : res.resolved) j["resolved"][word] = id;
    j["missing"] = res.missing;
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

struct CachePaths {
    anchored::Vocabulary vocab;
    anchored::Corpus corpus;
};

CachePaths load_cache(const std::string& dir) {
    CachePaths c;
    c.vocab = anchored::Vocabulary::read_tsv((fs::path(dir) / "vocab.tsv").string());
    std::ifstream slices((fs::path(dir) / "slices.tsv").string());
    if (!slices) throw std::runtime_error("cannot open cache index: " + dir + "/slices.tsv");
    std::string line;
    while (std::getline(slices, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw std::runtime_error("malformed slices.tsv line");
        std::string label = line.substr(0, tab);
        std::string file = line.substr(tab + 1);
        c.corpus.slices.push_back(anchored::read_slice_cache(file, label));
    }
    if (c.corpus.slices.empty()) throw std::runtime_error("cache has no slices: " + dir);
    return c;
}

struct TrainOpts {
    std::string cache_dir;
    std::string out_dir = "run";
    anchored::TrainConfig cfg;
    AnchorOpts anchors;
    PreprocessOpts pre;  // normalization settings for anchor word lookup
};

void add_train_flags(CLI::App* cmd, TrainOpts& opts) {
    cmd->add_option("--cache", opts.cache_dir, "Preprocessed corpus cache directory")
        ->required();
    cmd->add_option("--out", opts.out_dir, "Run directory (suffixed if it exists)");
    cmd->add_option("--k", opts.cfg.K, "Embedding dimensionality")->check(CLI::PositiveNumber);
    cmd->add_option("--window", opts.cfg.window, "Total context window size (even)");
    cmd->add_option("--epochs", opts.cfg.epochs, "Training epochs");
    cmd->add_option("--batch-size", opts.cfg.batch_size, "Minibatch size");
    cmd->add_option("--learning-rate", opts.cfg.learning_rate, "Adam learning rate");
    cmd->add_option("--neg-count", opts.cfg.neg_count, "Negative samples per window");
    cmd->add_option("--neg-power", opts.cfg.neg_power, "Negative distribution exponent");
    cmd->add_option("--adam-beta1", opts.cfg.adam_beta1, "Adam beta1");
    cmd->add_option("--adam-beta2", opts.cfg.adam_beta2, "Adam beta2");
    cmd->add_option("--adam-eps", opts.cfg.adam_eps, "Adam epsilon");
    cmd->add_option("--init-scale", opts.cfg.init_scale, "Init standard deviation");
    cmd->add_option("--seed", opts.cfg.seed, "RNG seed");
    cmd->add_option("--threads", opts.cfg.threads, "Parallel batch evaluation threads");
    cmd->add_option("--sigma-d", opts.cfg.sigma_d, "Random-walk variance (default sigma/100)");
    add_anchor_flags(cmd, opts.anchors);
    add_preprocess_flags(cmd, opts.pre, true);
}

void echo_config(const CLI::App& app, const std::string& path) {
    std::ofstream out(path);
    out << app.config_to_str(true, true);
}

void write_objective_log(const std::string& path, const std::vector<anchored::EpochLog>& log) {
    std::ofstream out(path);
    out << std::setprecision(17);
    out << "epoch\tobjective\tlog_prior\tlog_likelihood\n";
    for (const auto& e : log)
        out << e.epoch << '\t' << e.objective << '\t' << e.log_prior << '\t'
            << e.log_likelihood << '\n';
}

int run_train(const CLI::App& cmd, TrainOpts& opts, bool dynamic) {
    finalize_preprocess(opts.pre);
    CachePaths cache = load_cache(opts.cache_dir);
    anchored::AnchorRequest req = resolve_anchor_request(opts.anchors);
    opts.cfg.sigma = req.sigma;  // CLI overrides already folded into the request

    auto [spec, resolution] = anchored::resolve_anchors(cache.vocab, req, opts.pre.cfg);

    std::string run_dir = fresh_dir(opts.out_dir);
    echo_config(cmd, (fs::path(run_dir) / "config.echo").string());
    write_resolution_report((fs::path(run_dir) / "anchor_resolution.json").string(), resolution);

    if (dynamic) {
        auto result = anchored::train_dynamic(cache.corpus, opts.cfg, spec, cache.vocab);
        std::vector<std::string> words;
        for (int v = 0; v < cache.vocab.size(); v++) words.push_back(cache.vocab.word(v));
        anchored::write_model_file((fs::path(run_dir) / "model.txt").string(), result.model,
                                   words);
        write_objective_log((fs::path(run_dir) / "objective.tsv").string(), result.log);
        if (!result.log.empty())
            std::cout << "final objective: " << result.log.back().objective << '\n';
    } else {
        auto result = anchored::train(cache.corpus, opts.cfg, spec, cache.vocab);
        std::vector<std::string> words;
        for (int v = 0; v < cache.vocab.size(); v++) words.push_back(cache.vocab.word(v));
        anchored::write_model_file((fs::path(run_dir) / "model.txt").string(), result.model,
                                   words);
        write_objective_log((fs::path(run_dir) / "objective.tsv").string(), result.log);
        if (!result.log.empty())
            std::cout << "final objective: " << result.log.back().objective << '\n';
    }
    std::cout << "run directory: " << run_dir << '\n';
    return 0;
}

struct EvalOpts {
    std::string model_file;
    std::string holdout_file;
    std::string holdout_dimension;
    std::string data_dir = "data";
    std::string out_dir = "eval";
    std::string pairs;  // eval-sota: "man/woman,he/she"
    AnchorOpts anchors;
    PreprocessOpts pre;
};

void add_eval_flags(CLI::App* cmd, EvalOpts& opts, bool sota) {
    cmd->add_option("--model", opts.model_file, "Serialized model file")->required();
    cmd->add_option("--holdout", opts.holdout_file, "Hold-out file (JSON)");
    cmd->add_option("--out", opts.out_dir, "Output directory (suffixed if it exists)");
    if (sota) {
        cmd->add_option("--dimension", opts.holdout_dimension,
                        "Shipped hold-out set: gender or sentiment")
            ->check(CLI::IsMember({"gender", "sentiment"}));
        cmd->add_option("--data-dir", opts.data_dir, "Directory holding shipped data files");
        cmd->add_option("--pairs", opts.pairs, "Antonym pairs, e.g. man/woman,he/she")
            ->required();
    } else {
        // --dimension / --data-dir come from the anchor flags and select the
        // matching shipped hold-out set as well
        add_anchor_flags(cmd, opts.anchors);
    }
    add_preprocess_flags(cmd, opts.pre, true);
}

anchored::HoldoutRequest resolve_holdout_request(const EvalOpts& opts) {
    std::string path = opts.holdout_file;
    if (path.empty() && !opts.holdout_dimension.empty())
        path = (fs::path(opts.data_dir) / ("holdout_" + opts.holdout_dimension + ".json"))
                   .string();
    if (path.empty()) throw std::runtime_error("no hold-out file given (--holdout/--dimension)");
    return anchored::read_holdout_file(path);
}

void emit_eval_outputs(const std::string& out_dir, const anchored::EvalReport& report,
                       const anchored::HoldoutSet& holdout) {
    std::ofstream rpt((fs::path(out_dir) / "report.json").string());
    anchored::write_report(rpt, report);
    std::ofstream tbl((fs::path(out_dir) / "per_word.tsv").string());
    anchored::write_per_word_table(tbl, report);
    if (!holdout.missing.empty() || !holdout.dropped_anchor_overlap.empty()) {
        std::ofstream log((fs::path(out_dir) / "unresolved.json").string());
        json j;
        j["missing"] = holdout.missing;
        j["dropped_anchor_overlap"] = holdout.dropped_anchor_overlap;
        log << j.dump(2) << '\n';
    }
    std::cout << "n=" << report.n << " accuracy_rho=" << report.accuracy_rho
              << " accuracy_alpha=" << report.accuracy_alpha << " ci_rho=["
              << report.ci_rho.first << ", " << report.ci_rho.second << "]\n";
}

int run_eval(EvalOpts& opts) {
    finalize_preprocess(opts.pre);
    if (opts.holdout_dimension.empty()) opts.holdout_dimension = opts.anchors.dimension;
    opts.data_dir = opts.anchors.data_dir;
    anchored::LoadedModel loaded = anchored::read_model_file(opts.model_file);
    if (loaded.dynamic)
        throw std::runtime_error("eval expects a static model; use trajectory for dynamic ones");

    anchored::AnchorRequest req = resolve_anchor_request(opts.anchors);
    anchored::AnchorSpec spec;
    if (!req.positive.empty() || !req.negative.empty() || !req.neutral.empty()) {
        auto lookup_vocab = [&](const std::string& w) { return loaded.id_of(w); };
        // resolve anchors against the model's word list for overlap removal
        anchored::AnchorRequest plain = req;
        plain.kind = anchored::PriorKind::None;
        anchored::AnchorSpec tmp;
        for (const auto& w : req.positive) {
            std::string n = anchored::normalize_word(w, opts.pre.cfg);
            int id = n.empty() ? -1 : lookup_vocab(n);
            if (id >= 0) tmp.positive_ids.push_back(id);
        }
        for (const auto& w : req.negative) {
            std::string n = anchored::normalize_word(w, opts.pre.cfg);
            int id = n.empty() ? -1 : lookup_vocab(n);
            if (id >= 0) tmp.negative_ids.push_back(id);
        }
        for (const auto& w : req.neutral) {
            std::string n = anchored::normalize_word(w, opts.pre.cfg);
            int id = n.empty() ? -1 : lookup_vocab(n);
            if (id >= 0) tmp.neutral_ids.push_back(id);
        }
        spec = tmp;
    }

    anchored::HoldoutRequest hreq = resolve_holdout_request(opts);
    anchored::HoldoutSet holdout = anchored::resolve_holdout(
        hreq, [&](const std::string& w) { return loaded.id_of(w); }, spec, opts.pre.cfg);

    anchored::EvalReport report = anchored::holdout_accuracy(loaded.model, holdout);
    std::string out_dir = fresh_dir(opts.out_dir);
    emit_eval_outputs(out_dir, report, holdout);
    return 0;
}

int run_eval_sota(EvalOpts& opts) {
    finalize_preprocess(opts.pre);
    anchored::LoadedModel loaded = anchored::read_model_file(opts.model_file);
    if (loaded.dynamic) throw std::runtime_error("eval-sota expects a static model");

    std::vector<std::pair<int, int>> pairs;
    std::stringstream ss(opts.pairs);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto slash = item.find('/');
        if (slash == std::string::npos)
            throw std::runtime_error("pair must be written as positive/negative: " + item);
        std::string pos = anchored::normalize_word(item.substr(0, slash), opts.pre.cfg);
        std::string neg = anchored::normalize_word(item.substr(slash + 1), opts.pre.cfg);
        int pid = pos.empty() ? -1 : loaded.id_of(pos);
        int nid = neg.empty() ? -1 : loaded.id_of(neg);
        if (pid < 0 || nid < 0)
            throw std::runtime_error("unresolved pair word in: " + item);
        pairs.emplace_back(pid, nid);
    }

    anchored::HoldoutRequest hreq = resolve_holdout_request(opts);
    anchored::AnchorSpec no_anchors;
    anchored::HoldoutSet holdout = anchored::resolve_holdout(
        hreq, [&](const std::string& w) { return loaded.id_of(w); }, no_anchors, opts.pre.cfg);

    std::vector<double> axis = anchored::sota_axis(loaded.model, pairs);
    anchored::EvalReport report = anchored::sota_accuracy(loaded.model, axis, holdout);
    std::string out_dir = fresh_dir(opts.out_dir);
    emit_eval_outputs(out_dir, report, holdout);
    return 0;
}

struct TrajectoryOpts {
    std::string model_file;
    std::vector<std::string> words;
    std::string out_dir = "trajectories";
    PreprocessOpts pre;
};

int run_trajectory(TrajectoryOpts& opts) {
    finalize_preprocess(opts.pre);
    anchored::LoadedModel loaded = anchored::read_model_file(opts.model_file);
    if (!loaded.dynamic) throw std::runtime_error("trajectory expects a dynamic model");
    std::string out_dir = fresh_dir(opts.out_dir);
    int resolved = 0;
    for (const auto& word : opts.words) {
        std::string norm = anchored::normalize_word(word, opts.pre.cfg);
        int id = norm.empty() ? -1 : loaded.id_of(norm);
        if (id < 0) {
            std::cerr << "unresolved word: " << word << '\n';
            continue;
        }
        resolved++;
        auto series = anchored::trajectory(loaded.dynamic_model, id);
        std::ofstream out((fs::path(out_dir) / (norm + ".tsv")).string());
        out << std::setprecision(17);
        for (const auto& [label, value] : series) out << label << '\t' << value << '\n';
    }
    if (resolved == 0) throw std::runtime_error("no requested word resolved");
    std::cout << "trajectories written to " << out_dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Word embeddings with anchored interpretable dimensions"};
    app.require_subcommand(1);

    // preprocess
    PreprocessOpts pre;
    auto* cmd_pre = app.add_subcommand("preprocess", "Build vocabulary and token-id caches");
    cmd_pre->set_config("--config");
    cmd_pre->add_option("--manifest", pre.manifest, "Corpus manifest (label<TAB>glob lines)")
        ->required();
    cmd_pre->add_option("--out", pre.out_dir, "Cache output directory")->required();
    add_preprocess_flags(cmd_pre, pre);

    // train / train-dynamic
    TrainOpts train_opts;
    auto* cmd_train = app.add_subcommand("train", "MAP training of the static model");
    cmd_train->set_config("--config");
    add_train_flags(cmd_train, train_opts);

    TrainOpts dyn_opts;
    auto* cmd_dyn = app.add_subcommand("train-dynamic",
                                       "MAP training of the time-sliced model");
    cmd_dyn->set_config("--config");
    add_train_flags(cmd_dyn, dyn_opts);

    // eval / eval-sota
    EvalOpts eval_opts;
    auto* cmd_eval = app.add_subcommand("eval", "Hold-out sign accuracy of a trained model");
    cmd_eval->set_config("--config");
    add_eval_flags(cmd_eval, eval_opts, false);

    EvalOpts sota_opts;
    auto* cmd_sota = app.add_subcommand("eval-sota",
                                        "Post-hoc antonym-axis baseline evaluation");
    cmd_sota->set_config("--config");
    add_eval_flags(cmd_sota, sota_opts, true);

    // trajectory
    TrajectoryOpts traj_opts;
    auto* cmd_traj = app.add_subcommand("trajectory",
                                        "Interpretable-dimension series from a dynamic model");
    cmd_traj->set_config("--config");
    cmd_traj->add_option("--model", traj_opts.model_file, "Dynamic model file")->required();
    cmd_traj->add_option("--words", traj_opts.words, "Words to export")->required();
    cmd_traj->add_option("--out", traj_opts.out_dir, "Output directory");
    add_preprocess_flags(cmd_traj, traj_opts.pre);

    // synth
    anchored::PlantedSpec synth_spec;
    std::string synth_out = "synth";
    auto* cmd_synth = app.add_subcommand("synth", "Planted-dimension corpus generator");
    cmd_synth->set_config("--config");
    cmd_synth->add_option("--out", synth_out, "Output directory");
    cmd_synth->add_option("--vocab", synth_spec.V, "Vocabulary size");
    cmd_synth->add_option("--n-signal", synth_spec.n_signal, "Signal word count (even)");
    cmd_synth->add_option("--docs", synth_spec.n_docs, "Documents per slice");
    cmd_synth->add_option("--doc-len", synth_spec.doc_len, "Tokens per document");
    cmd_synth->add_option("--mix", synth_spec.mix, "Signal pool probability");
    cmd_synth->add_option("--slices", synth_spec.n_slices, "Number of time slices");
    cmd_synth->add_option("--seed", synth_spec.seed, "RNG seed");
    cmd_synth->add_option("--flip-word", synth_spec.flip_word,
                          "Signal word index whose polarity flips");
    cmd_synth->add_option("--flip-slice", synth_spec.flip_slice,
                          "Slice at which the flip takes effect");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_pre) {
            finalize_preprocess(pre);
            auto manifest = anchored::read_manifest(pre.manifest);
            anchored::LoadStats stats;
            auto [corpus, vocab] = anchored::load_corpus(manifest, pre.cfg, &stats);
            fs::create_directories(pre.out_dir);
            vocab.write_tsv((fs::path(pre.out_dir) / "vocab.tsv").string());
            std::ofstream slices((fs::path(pre.out_dir) / "slices.tsv").string());
            for (size_t i = 0; i < corpus.slices.size(); i++) {
                std::string file =
                    (fs::path(pre.out_dir) / ("slice_" + std::to_string(i) + ".ids")).string();
                anchored::write_slice_cache(file, corpus.slices[i], vocab.size());
                slices << corpus.slices[i].label << '\t' << file << '\n';
            }
            std::cout << "V=" << vocab.size() << " tokens_before_subsampling="
                      << stats.tokens_before_subsampling
                      << " tokens_after_subsampling=" << stats.tokens_after_subsampling << '\n';
            return 0;
        }
        if (*cmd_train) return run_train(*cmd_train, train_opts, false);
        if (*cmd_dyn) return run_train(*cmd_dyn, dyn_opts, true);
        if (*cmd_eval) return run_eval(eval_opts);
        if (*cmd_sota) return run_eval_sota(sota_opts);
        if (*cmd_traj) return run_trajectory(traj_opts);
        if (*cmd_synth) {
            auto result = anchored::generate(synth_spec);
            fs::create_directories(synth_out);
            std::string manifest = anchored::write_planted(result, synth_out);
            json truth;
            for (const auto& [word, sign] : result.truth) truth[word] = sign;
            std::ofstream out((fs::path(synth_out) / "truth.json").string());
            out << truth.dump(2) << '\n';
            std::cout << "manifest: " << manifest << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

#include "lsar/cli.hpp"

#include "CLI11.hpp"
#include "bytes.hpp"
#include "lsar/embedstore.hpp"
#include "lsar/error.hpp"
#include "lsar/eval.hpp"
#include "lsar/subspace.hpp"
#include "lsar/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace lsar::cli {

namespace {

struct RunConfig {
    std::string subcommand;
    std::string input;
    std::string candidates;
    std::string test;
    std::string output;
    std::string format;
    std::string model;
    std::string model_out;
    std::string method = "lsar";
    std::optional<std::size_t> rank;
    std::optional<std::size_t> k;
    std::string metric;
    std::string gold;
    std::string labels;
    std::string distances;
    std::string pivot;
    bool normalize = false;
    bool one_target = false;
    std::uint64_t seed = 0;
    std::size_t axis = 0;
    std::string report;
    unsigned threads = 0;
    SynthConfig synth;
};

FileFormat embedding_format(const RunConfig& cfg, const std::string& path) {
    if (cfg.format == "emb1") return FileFormat::Binary;
    if (cfg.format == "tsv") return FileFormat::Tsv;
    return format_from_path(path);
}

std::string file_hash(const std::string& path) {
    return hex64(fnv1a64(detail::read_file(path)));
}

EmbeddingSet load_set(const RunConfig& cfg, const std::string& path, std::vector<std::string>& warnings) {
    if (path.empty()) throw ArgumentError("missing input path");
    EmbeddingSet set = read_embeddings(path, embedding_format(cfg, path));
    if (cfg.normalize) {
        auto normalized = normalize_rows(set);
        if (normalized.zero_rows > 0) {
            warnings.push_back(std::to_string(normalized.zero_rows) + " zero-norm rows left unnormalized in " + path);
        }
        set = std::move(normalized.set);
    }
    return set;
}

AlignmentModel load_alignment(const std::string& path) {
    if (path == "identity") return make_identity(0);
    return load_model(path);
}

// Effective configuration recorded in every report. Thread count is excluded on
// purpose: results never depend on it.
Json base_config(const RunConfig& cfg) {
    Json c;
    c["subcommand"] = cfg.subcommand;
    auto put_path = [&](const char* key, const std::string& path) {
        if (path.empty()) return;
        c[key] = path;
        if (path != "identity") c[std::string(key) + "_fnv1a64"] = file_hash(path);
    };
    put_path("input", cfg.input);
    put_path("candidates", cfg.candidates);
    put_path("test", cfg.test);
    put_path("model", cfg.model);
    put_path("gold", cfg.gold);
    put_path("labels", cfg.labels);
    put_path("distances", cfg.distances);
    c["normalize"] = cfg.normalize;
    return c;
}

void emit(const RunConfig& cfg, const EvalReport& report, std::ostream& out) {
    const std::string text = report.dump();
    if (cfg.report.empty()) {
        out << text;
    } else {
        detail::write_file(cfg.report, text);
    }
}

void write_text(const RunConfig& cfg, const std::string& text, std::ostream& out) {
    if (cfg.output.empty()) {
        out << text;
    } else {
        detail::write_file(cfg.output, text);
    }
}

void merge_config(EvalReport& report, const Json& extra) {
    Json merged = extra;
    for (auto it = report.config.begin(); it != report.config.end(); ++it) merged[it.key()] = it.value();
    report.config = std::move(merged);
}

void cmd_identify(const RunConfig& cfg, std::ostream& out) {
    if (cfg.model_out.empty()) throw ArgumentError("identify needs --model-out");
    EvalReport report;
    report.metric = "identify";
    const EmbeddingSet set = load_set(cfg, cfg.input, report.warnings);
    report.config = base_config(cfg);
    report.config["method"] = cfg.method;

    AlignmentModel model;
    if (cfg.method == "original") {
        model = make_identity(set.dim);
        model.languages = set.tags();
    } else if (cfg.method == "centered") {
        model = fit_centered(set);
    } else if (cfg.method == "lir") {
        const std::size_t k = cfg.k.value_or(1);
        report.config["k"] = k;
        model = fit_lir(set, k);
    } else {
        const MeanMatrix means = mean_by_language(set);
        const std::size_t rank = cfg.rank.value_or(default_rank(means.num_languages()));
        report.config["rank"] = rank;
        const SubspaceModel sub = identify_lsar(means, rank);
        Eigen::Index effective = 0;
        for (Eigen::Index j = 0; j < sub.basis.cols(); ++j) effective += sub.basis.col(j).squaredNorm() > 0.0;
        if (effective < static_cast<Eigen::Index>(rank)) {
            report.warnings.push_back("effective rank " + std::to_string(effective) + " below requested " + std::to_string(rank));
        }
        report.summary = {{"objective", objective_value(means, sub)}, {"effective_rank", static_cast<double>(effective)}};
        model = wrap_lsar(sub);
    }
    save_model(model, cfg.model_out);
    report.config["model_out_fnv1a64"] = file_hash(cfg.model_out);
    report.finalize();
    emit(cfg, report, out);
}

void cmd_transform(const RunConfig& cfg, std::ostream&) {
    if (cfg.output.empty()) throw ArgumentError("transform needs --output");
    if (cfg.model.empty()) throw ArgumentError("transform needs --model (a model file or 'identity')");
    std::vector<std::string> warnings;
    const EmbeddingSet set = load_set(cfg, cfg.input, warnings);
    const AlignmentModel model = load_alignment(cfg.model);
    write_embeddings(apply_model(model, set, cfg.threads), cfg.output, embedding_format(cfg, cfg.output));
}

struct RetrievalInputs {
    EmbeddingSet queries;
    EmbeddingSet candidates;
    GoldAlignment gold;
    std::vector<std::string> warnings;
};

RetrievalInputs load_retrieval(const RunConfig& cfg) {
    RetrievalInputs in;
    in.queries = load_set(cfg, cfg.input, in.warnings);
    in.candidates = cfg.candidates.empty() ? in.queries : load_set(cfg, cfg.candidates, in.warnings);
    in.gold = cfg.gold.empty() ? identity_gold(in.queries) : read_gold(cfg.gold);
    return in;
}

void cmd_eval_retrieval(const RunConfig& cfg, std::ostream& out) {
    const RetrievalInputs in = load_retrieval(cfg);
    RetrievalTask task{.queries = in.queries, .candidates = in.candidates, .gold = in.gold, .metric = parse_similarity(cfg.metric.empty() ? "cosine" : cfg.metric), .pivot = {}, .include_same_language = false, .threads = cfg.threads};
    if (!cfg.pivot.empty()) task.pivot = cfg.pivot;
    task.threads = cfg.threads;
    EvalReport report = retrieval_accuracy(task);
    merge_config(report, base_config(cfg));
    report.warnings.insert(report.warnings.begin(), in.warnings.begin(), in.warnings.end());
    emit(cfg, report, out);
}

void cmd_eval_map(const RunConfig& cfg, std::ostream& out) {
    const RetrievalInputs in = load_retrieval(cfg);
    RetrievalTask task{.queries = in.queries, .candidates = in.candidates, .gold = in.gold, .metric = parse_similarity(cfg.metric.empty() ? "dot" : cfg.metric), .pivot = {}, .include_same_language = false, .threads = cfg.threads};
    task.threads = cfg.threads;
    EvalReport report = cfg.one_target ? map_breakdown(task).report : mean_average_precision(task);
    merge_config(report, base_config(cfg));
    report.config["one_target"] = cfg.one_target;
    report.warnings.insert(report.warnings.begin(), in.warnings.begin(), in.warnings.end());
    emit(cfg, report, out);
}

void cmd_eval_cluster(const RunConfig& cfg, std::ostream& out) {
    EvalReport report;
    report.metric = "nmi";
    const EmbeddingSet set = load_set(cfg, cfg.input, report.warnings);
    Matrix rows(static_cast<Eigen::Index>(set.total_rows()), static_cast<Eigen::Index>(set.dim));
    std::vector<std::size_t> language;
    for (std::size_t l = 0; l < set.languages.size(); ++l) {
        rows.middleRows(static_cast<Eigen::Index>(language.size()), set.languages[l].rows.rows()) = set.languages[l].rows;
        language.insert(language.end(), set.languages[l].size(), l);
    }
    KMeansOptions options;
    options.k = cfg.k.value_or(set.num_languages());
    options.seed = cfg.seed;
    options.threads = cfg.threads;
    const KMeansResult clusters = kmeans(rows, options);

    report.config = base_config(cfg);
    report.config["k"] = options.k;
    report.config["seed"] = options.seed;
    report.config["n_init"] = options.n_init;
    report.config["max_iter"] = options.max_iter;
    report.config["tol"] = options.tol;
    report.per_language = {{"nmi", nmi(clusters.labels, language)}};
    report.summary = {{"inertia", clusters.inertia}};
    report.finalize();
    emit(cfg, report, out);
}

// lang<TAB>id<TAB>label, label in {0, 1}.
std::map<std::pair<std::string, std::string>, int> read_labels(const std::string& path) {
    std::map<std::pair<std::string, std::string>, int> labels;
    std::istringstream in(detail::read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string lang, id, label;
        if (!std::getline(fields, lang, '\t') || !std::getline(fields, id, '\t') || !std::getline(fields, label)) {
            throw FormatError("labels line " + std::to_string(line_no) + ": expected lang<TAB>id<TAB>label");
        }
        if (label != "0" && label != "1") throw DataError("labels line " + std::to_string(line_no) + ": label must be 0 or 1");
        labels[{lang, id}] = label == "1";
    }
    return labels;
}

struct Labeled {
    Matrix x;
    std::vector<int> y;
};

Labeled gather(const LanguageBlock& block, const std::map<std::pair<std::string, std::string>, int>& labels, std::size_t& missing) {
    Labeled out;
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < block.size(); ++i) {
        const auto it = labels.find({block.tag, block.id_of(i)});
        if (it == labels.end()) {
            ++missing;
            continue;
        }
        rows.push_back(static_cast<Eigen::Index>(i));
        out.y.push_back(it->second);
    }
    out.x = block.rows(rows, Eigen::all);
    return out;
}

void cmd_eval_classify(const RunConfig& cfg, std::ostream& out) {
    if (cfg.labels.empty()) throw ArgumentError("eval-classify needs --labels");
    EvalReport report;
    report.metric = "classification_accuracy";
    const EmbeddingSet train = load_set(cfg, cfg.input, report.warnings);
    const EmbeddingSet test = cfg.test.empty() ? train : load_set(cfg, cfg.test, report.warnings);
    const auto labels = read_labels(cfg.labels);
    const std::string pivot = cfg.pivot.empty() ? train.languages.front().tag : cfg.pivot;

    std::size_t missing = 0;
    const Labeled training = gather(train.at(pivot), labels, missing);
    LogRegOptions options;
    options.seed = cfg.seed;
    options.threads = cfg.threads;
    const LogRegCvResult fit = train_logreg_cv(training.x, training.y, options);

    for (const auto& block : test.languages) {
        const Labeled part = gather(block, labels, missing);
        if (part.y.empty()) continue;
        report.per_language.emplace_back(block.tag, classify_accuracy(fit.model, part.x, part.y));
    }
    if (missing > 0) report.warnings.push_back(std::to_string(missing) + " rows without labels skipped");
    if (!fit.model.converged) report.warnings.push_back("final logistic regression fit did not reach the gradient tolerance");

    report.config = base_config(cfg);
    report.config["train_language"] = pivot;
    report.config["folds"] = options.folds;
    report.config["c_grid"] = options.c_grid;
    report.config["seed"] = options.seed;
    const auto best = std::find(options.c_grid.begin(), options.c_grid.end(), fit.best_c) - options.c_grid.begin();
    report.summary = {{"best_c", fit.best_c}, {"cv_accuracy", fit.cv_accuracy[static_cast<std::size_t>(best)]}};
    report.finalize();
    emit(cfg, report, out);
}

struct Distances {
    std::vector<std::pair<std::string, double>> values;
    std::string orientation = "distance";
};

// lang<TAB>value lines; an optional header "lang<TAB>distance" or
// "lang<TAB>similarity" names the orientation.
Distances read_distances(const std::string& path) {
    Distances d;
    std::istringstream in(detail::read_file(path));
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw FormatError("distances: expected lang<TAB>value");
        const std::string lang = line.substr(0, tab);
        const std::string value = line.substr(tab + 1);
        if (first && lang == "lang") {
            if (value != "distance" && value != "similarity") throw FormatError("distances header must name 'distance' or 'similarity'");
            d.orientation = value;
            first = false;
            continue;
        }
        first = false;
        char* end = nullptr;
        const double v = std::strtod(value.c_str(), &end);
        if (value.empty() || *end != '\0') throw FormatError("distances: bad number '" + value + "'");
        d.values.emplace_back(lang, v);
    }
    return d;
}

void cmd_correlate(const RunConfig& cfg, std::ostream& out) {
    if (cfg.distances.empty()) throw ArgumentError("correlate needs --distances");
    EvalReport report;
    report.metric = "pearson";
    const EmbeddingSet set = load_set(cfg, cfg.input, report.warnings);
    const std::string pivot = cfg.pivot.empty() ? set.languages.front().tag : cfg.pivot;
    const Distances distances = read_distances(cfg.distances);

    const MeanMatrix means = mean_by_language(set);
    auto correlate = [&](const MeanMatrix& m) {
        const auto sims = language_similarity(m, pivot);
        std::vector<double> xs;
        std::vector<double> ys;
        for (const auto& [lang, dist] : distances.values) {
            const auto it = std::find_if(sims.begin(), sims.end(), [&](const auto& s) { return s.first == lang; });
            if (it == sims.end()) continue;
            xs.push_back(it->second);
            ys.push_back(dist);
        }
        return pearson(xs, ys);
    };

    if (cfg.model.empty()) {
        report.per_language = {{"original", correlate(means)}};
    } else {
        // Rectified means are the model applied to the means (every model is affine per language);
        // the removed part is what the model took away.
        const AlignmentModel model = load_alignment(cfg.model);
        EmbeddingSet mean_set;
        mean_set.dim = means.dim;
        for (std::size_t l = 0; l < means.languages.size(); ++l) {
            LanguageBlock block;
            block.tag = means.languages[l];
            block.rows = means.columns.col(static_cast<Eigen::Index>(l)).transpose();
            mean_set.languages.push_back(std::move(block));
        }
        const MeanMatrix rectified = mean_by_language(apply_model(model, mean_set, cfg.threads));
        MeanMatrix removed = means;
        removed.columns = means.columns - rectified.columns;
        report.per_language = {{"removed", correlate(removed)}, {"rectified", correlate(rectified)}};
    }
    for (const auto& [lang, dist] : distances.values) {
        if (lang != pivot && !set.find(lang)) report.warnings.push_back("language '" + lang + "' in distances but not in input");
    }
    report.config = base_config(cfg);
    report.config["pivot"] = pivot;
    report.config["orientation"] = distances.orientation;
    report.finalize();
    emit(cfg, report, out);
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void cmd_export_gamma(const RunConfig& cfg, std::ostream& out) {
    if (cfg.model.empty()) throw ArgumentError("export-gamma needs --model");
    const AlignmentModel model = load_model(cfg.model);
    const auto* sub = std::get_if<SubspaceModel>(&model.params);
    if (!sub) throw ArgumentError("export-gamma needs an LSAR model, got " + model.method());
    std::string text = "lang\tgamma\n";
    for (const auto& [lang, value] : export_gamma(*sub, cfg.axis)) text += lang + "\t" + format_number(value) + "\n";
    write_text(cfg, text, out);
}

void cmd_export_pca2d(const RunConfig& cfg, std::ostream& out) {
    std::vector<std::string> warnings;
    const EmbeddingSet set = load_set(cfg, cfg.input, warnings);
    Matrix rows(static_cast<Eigen::Index>(set.total_rows()), static_cast<Eigen::Index>(set.dim));
    std::vector<std::string> notes;
    for (const auto& block : set.languages) {
        rows.middleRows(static_cast<Eigen::Index>(notes.size()), block.rows.rows()) = block.rows;
        for (std::size_t i = 0; i < block.size(); ++i) notes.push_back(block.tag + "\t" + block.id_of(i));
    }
    std::string text = "x\ty\tlang\tid\n";
    for (const auto& p : export_pca2d(rows, notes)) text += format_number(p.x) + "\t" + format_number(p.y) + "\t" + p.annotation + "\n";
    write_text(cfg, text, out);
}

void cmd_synth(const RunConfig& cfg, std::ostream&) {
    if (cfg.output.empty()) throw ArgumentError("synth needs --output");
    SynthConfig synth = cfg.synth;
    synth.seed = cfg.seed;
    const SynthTruth truth = generate_synthetic(synth);
    write_embeddings(truth.set, cfg.output, embedding_format(cfg, cfg.output));
    detail::write_file(cfg.output + ".truth.json", truth.truth_json().dump(2) + "\n");
}

void error_record(std::ostream& err, const std::string& kind, const std::string& message) {
    Json j;
    j["error"] = kind;
    j["message"] = message;
    err << j.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Language subspace identification and evaluation toolkit"};
    app.name("lsar");
    app.require_subcommand(1);
    RunConfig cfg;

    const std::vector<std::string> methods{"original", "centered", "lir", "lsar"};
    auto io = [&](CLI::App* sub, bool input_required) {
        auto* opt = sub->add_option("--input", cfg.input, "embedding file (EMB1 or TSV)");
        if (input_required) opt->required();
        sub->add_option("--format", cfg.format, "embedding file format")->check(CLI::IsMember({"emb1", "tsv"}));
        sub->add_flag("--normalize", cfg.normalize, "L2-normalize rows after reading");
        sub->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
    };
    auto reporting = [&](CLI::App* sub) { sub->add_option("--report", cfg.report, "write the JSON report here instead of stdout"); };
    auto retrieval = [&](CLI::App* sub) {
        io(sub, true);
        reporting(sub);
        sub->add_option("--candidates", cfg.candidates, "candidate embeddings (default: --input)");
        sub->add_option("--gold", cfg.gold, "gold TSV query_id<TAB>candidate_id (default: matching ids)");
        sub->add_option("--metric", cfg.metric, "similarity")->check(CLI::IsMember({"cosine", "dot"}));
    };

    auto* identify = app.add_subcommand("identify", "fit an alignment model");
    io(identify, true);
    reporting(identify);
    identify->add_option("--method", cfg.method, "alignment method")->check(CLI::IsMember(methods));
    identify->add_option("--rank", cfg.rank, "subspace rank (default: languages - 1)");
    identify->add_option("--k", cfg.k, "LIR components per language (default 1)");
    identify->add_option("--model-out", cfg.model_out, "model file to write")->required();

    auto* transform = app.add_subcommand("transform", "apply a model to embeddings");
    io(transform, true);
    transform->add_option("--model", cfg.model, "model file or 'identity'")->required();
    transform->add_option("--output", cfg.output, "embedding file to write")->required();

    auto* eval_retrieval = app.add_subcommand("eval-retrieval", "top-1 cross-lingual retrieval accuracy");
    retrieval(eval_retrieval);
    eval_retrieval->add_option("--pivot", cfg.pivot, "retrieve into this language from all others");

    auto* eval_map = app.add_subcommand("eval-map", "mean average precision over a multilingual pool");
    retrieval(eval_map);
    eval_map->add_flag("--one-target", cfg.one_target, "limit-to-one breakdown by question and answer language");

    auto* eval_cluster = app.add_subcommand("eval-cluster", "K-Means against language labels, scored by NMI");
    io(eval_cluster, true);
    reporting(eval_cluster);
    eval_cluster->add_option("--k", cfg.k, "clusters (default: number of languages)");
    eval_cluster->add_option("--seed", cfg.seed, "seed");

    auto* eval_classify = app.add_subcommand("eval-classify", "cross-validated logistic regression, zero-shot transfer");
    io(eval_classify, true);
    reporting(eval_classify);
    eval_classify->add_option("--labels", cfg.labels, "TSV lang<TAB>id<TAB>label")->required();
    eval_classify->add_option("--test", cfg.test, "test embeddings (default: --input)");
    eval_classify->add_option("--pivot", cfg.pivot, "training language (default: first)");
    eval_classify->add_option("--seed", cfg.seed, "fold assignment seed");

    auto* correlate = app.add_subcommand("correlate", "Pearson correlation of mean similarities with typological distances");
    io(correlate, true);
    reporting(correlate);
    correlate->add_option("--model", cfg.model, "model whose removed/rectified parts are compared");
    correlate->add_option("--distances", cfg.distances, "TSV lang<TAB>distance against the pivot")->required();
    correlate->add_option("--pivot", cfg.pivot, "pivot language (default: first)");

    auto* gamma = app.add_subcommand("export-gamma", "per-language coordinates along one subspace axis");
    gamma->add_option("--model", cfg.model, "LSAR model file")->required();
    gamma->add_option("--axis", cfg.axis, "axis index (default 0)");
    gamma->add_option("--output", cfg.output, "TSV to write (default: stdout)");

    auto* pca = app.add_subcommand("export-pca2d", "2D PCA coordinates for plotting");
    io(pca, true);
    pca->add_option("--output", cfg.output, "TSV to write (default: stdout)");

    auto* synth = app.add_subcommand("synth", "generate a synthetic fixture with a planted subspace");
    synth->add_option("--output", cfg.output, "embedding file to write")->required();
    synth->add_option("--format", cfg.format, "embedding file format")->check(CLI::IsMember({"emb1", "tsv"}));
    synth->add_option("--seed", cfg.seed, "seed");
    synth->add_option("--dim", cfg.synth.dim, "dimension");
    synth->add_option("--langs", cfg.synth.languages, "number of languages");
    synth->add_option("--rank", cfg.synth.r_true, "planted rank");
    synth->add_option("--rows", cfg.synth.rows, "rows per language");
    synth->add_option("--parallel", cfg.synth.n_parallel, "parallel rows shared by all languages");
    synth->add_option("--zeta", cfg.synth.zeta, "language offset scale");
    synth->add_option("--sigma", cfg.synth.sigma, "isotropic noise std");
    synth->add_option("--spread", cfg.synth.spread, "per-row subspace jitter, relative to zeta");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        error_record(err, "UsageError", e.what());
        return kExitUsage;
    }

    try {
        const CLI::App* chosen = app.get_subcommands().front();
        cfg.subcommand = chosen->get_name();
        static const std::map<std::string, void (*)(const RunConfig&, std::ostream&)> handlers{
            {"identify", cmd_identify},
            {"transform", cmd_transform},
            {"eval-retrieval", cmd_eval_retrieval},
            {"eval-map", cmd_eval_map},
            {"eval-cluster", cmd_eval_cluster},
            {"eval-classify", cmd_eval_classify},
            {"correlate", cmd_correlate},
            {"export-gamma", cmd_export_gamma},
            {"export-pca2d", cmd_export_pca2d},
            {"synth", cmd_synth},
        };
        handlers.at(cfg.subcommand)(cfg, out);
    } catch (const Error& e) {
        error_record(err, e.kind(), e.what());
        return kExitDomainError;
    } catch (const std::exception& e) {
        error_record(err, "InternalError", e.what());
        return kExitDomainError;
    }
    return kExitOk;
}

}  // namespace lsar::cli

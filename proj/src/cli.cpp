#include "faceattr/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "faceattr/attributes.hpp"
#include "faceattr/cnn.hpp"
#include "faceattr/confusion.hpp"
#include "faceattr/cooccurrence.hpp"
#include "faceattr/decision_tree.hpp"
#include "faceattr/embeddings.hpp"
#include "faceattr/error.hpp"
#include "faceattr/evaluation.hpp"
#include "faceattr/image.hpp"
#include "faceattr/probe.hpp"
#include "faceattr/report.hpp"
#include "faceattr/rng.hpp"
#include "faceattr/run_config.hpp"
#include "faceattr/split.hpp"
#include "faceattr/workload.hpp"

namespace fs = std::filesystem;

namespace faceattr {

namespace {

struct Context {
    std::string command;
    RunConfig config;
    bool dry_run = false;
    std::ostream& out;
    std::vector<InputDigest> inputs;

    ReportHeader header(std::initializer_list<const char*> keys) const {
        ReportHeader h;
        h.command = command;
        for (const char* k : keys) h.config.emplace_back(k, config.get(k));
        h.seed = config.get_u64("seed");
        h.inputs = inputs;
        return h;
    }
};

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string existing_file(const RunConfig& cfg, const char* key) {
    const std::string path = cfg.require_path(key);
    if (!fs::is_regular_file(path)) throw IoError(path, std::string("no such file (setting '") + key + "')");
    return path;
}

std::string existing_dir(const RunConfig& cfg, const char* key) {
    const std::string path = cfg.require_path(key);
    if (!fs::is_directory(path)) throw IoError(path, std::string("no such directory (setting '") + key + "')");
    return path;
}

AttributeTable load_attributes(Context& ctx) {
    const std::string path = existing_file(ctx.config, "attributes");
    AttributeTable table = load_attribute_file(path);
    ctx.inputs.push_back({"attributes", path, sha256_file(path)});
    return table;
}

std::vector<PredictionRecord> load_eval(Context& ctx) {
    const std::string path = existing_file(ctx.config, "eval");
    auto records = load_eval_file(path);
    ctx.inputs.push_back({"eval", path, sha256_file(path)});
    return records;
}

Split split_from_config(const Context& ctx, const AttributeTable& table) {
    const auto& c = ctx.config;
    return make_split(table, c.get("attr"), c.get_size("train-n"), c.get_size("test-n"), c.get_u64("seed"),
                      parse_balance(c.get("balance")));
}

std::vector<int> classes_for(const AttributeTable& table, std::size_t target, const std::vector<std::string>& ids) {
    std::vector<int> out;
    out.reserve(ids.size());
    for (const auto& id : ids) out.push_back(class_of_label(table.find(id)->labels[target]));
    return out;
}

std::string history_csv(const ReportHeader& h, const std::vector<EpochStats>& history) {
    std::string s = h.render() + "epoch,loss,train_accuracy,test_accuracy\n";
    for (const auto& e : history) {
        s += std::to_string(e.epoch) + ',' + fixed(e.loss, 9) + ',' + fixed(e.train_accuracy, 6) + ',' +
             (e.test_accuracy ? fixed(*e.test_accuracy, 6) : std::string()) + '\n';
    }
    return s;
}

std::string eval_csv(const ReportHeader& h, const EvalResult& r) {
    std::ostringstream s;
    s << h.render();
    write_eval_rows(s, r.records);
    return s.str();
}

std::string confusion_csv(const ReportHeader& h, const audit::ConfusionReport& r) {
    std::ostringstream s;
    s << h.render();
    audit::write_confusion_csv(s, r);
    return s.str();
}

void print_accuracy(std::ostream& out, const EvalResult& r) {
    const std::size_t correct = r.true_positive + r.true_negative;
    out << "test accuracy: " << fixed(r.accuracy, 4) << " (" << correct << '/' << r.total() << ")\n";
}

void report_written(std::ostream& out, const std::vector<std::string>& paths) {
    for (const auto& p : paths) out << "wrote " << p << '\n';
}

int cmd_train_cnn(Context& ctx) {
    auto& cfg = ctx.config;
    cfg.set_default("epochs", "15");
    TrainConfig tc;
    tc.learning_rate = cfg.get_real("lr");
    tc.momentum = cfg.get_real("momentum");
    tc.batch_size = cfg.get_size("batch-size");
    tc.epochs = cfg.get_size("epochs");
    tc.seed = cfg.get_u64("seed");
    tc.dropout_rate = cfg.get_real("dropout");
    tc.eval_every = cfg.get_size("eval-every");
    tc.validate();
    const InputSize input{cfg.get_size("channels"), cfg.get_size("img-size"), cfg.get_size("img-size")};
    if (input.channels != 1 && input.channels != 3) throw ConfigError("channels must be 1 or 3");

    const AttributeTable table = load_attributes(ctx);
    const std::size_t target = table.attribute_index(cfg.get("attr"));
    const std::string root = existing_dir(cfg, "images");
    const Split split = split_from_config(ctx, table);
    for (const auto* ids : {&split.train_ids, &split.test_ids})
        for (const auto& id : *ids)
            if (!fs::is_regular_file(fs::path(root) / id))
                throw IoError((fs::path(root) / id).string(), "image file not found");
    init_model<float>(input, tc.seed);  // validates the input size

    if (ctx.dry_run) {
        ctx.out << "dry run: inputs valid (" << split.train_ids.size() << " train, " << split.test_ids.size()
                << " test, target " << table.names()[target] << ")\n";
        return 0;
    }

    std::vector<std::string> all_ids = split.train_ids;
    all_ids.insert(all_ids.end(), split.test_ids.begin(), split.test_ids.end());
    ctx.inputs.push_back({"images", root, sha256_files(root, all_ids)});

    LabeledImages train_set{split.train_ids,
                            load_images(root, split.train_ids, input.height, input.width, input.channels),
                            classes_for(table, target, split.train_ids)};
    LabeledImages test_set{split.test_ids,
                           load_images(root, split.test_ids, input.height, input.width, input.channels),
                           classes_for(table, target, split.test_ids)};

    TrainOutcome outcome = train(init_model<float>(input, tc.seed), train_set, tc, &test_set);
    const EvalResult result = evaluate(outcome.model, test_set);

    const ReportHeader h = ctx.header({"attributes", "images", "attr", "train-n", "test-n", "balance", "seed",
                                       "img-size", "channels", "epochs", "batch-size", "lr", "momentum", "dropout",
                                       "eval-every"});
    OutputWriter writer(cfg.get("out"));
    writer.add_text("history.csv", history_csv(h, outcome.history));
    writer.add_text("eval.csv", eval_csv(h, result));
    writer.add_text("confusion.csv",
                    confusion_csv(h, audit::confusion_report(result.records, 0.5, table.names()[target])));
    writer.add_file("model.ckpt", [&](const std::string& p) { save_checkpoint(outcome.model, p); });
    const auto written = writer.commit();
    print_accuracy(ctx.out, result);
    report_written(ctx.out, written);
    return 0;
}

int cmd_train_probe(Context& ctx) {
    auto& cfg = ctx.config;
    cfg.set_default("epochs", "30");
    ProbeConfig pc;
    pc.learning_rate = cfg.get_real("lr");
    pc.momentum = cfg.get_real("momentum");
    pc.batch_size = cfg.get_size("batch-size");
    pc.epochs = cfg.get_size("epochs");
    pc.l2 = cfg.get_real("l2");
    pc.seed = cfg.get_u64("seed");
    pc.eval_every = cfg.get_size("eval-every");
    pc.validate();

    AttributeTable table = load_attributes(ctx);
    const std::size_t target = table.attribute_index(cfg.get("attr"));
    const std::string emb_path = existing_file(cfg, "embeddings");
    const EmbeddingTable embeddings = load_embeddings(emb_path);
    ctx.inputs.push_back({"embeddings", emb_path, sha256_file(emb_path)});
    if (cfg.get_bool("restrict"))
        table = table.filtered([&](const AttributeRecord& r) { return embeddings.find(r.image_id) != EmbeddingTable::npos; });

    const Split split = split_from_config(ctx, table);
    for (const auto* ids : {&split.train_ids, &split.test_ids}) {
        const std::string missing = first_missing_id(embeddings, table, *ids);
        if (!missing.empty())
            throw ArgumentError("image id '" + missing + "' is missing from the embedding table " + emb_path);
    }

    if (ctx.dry_run) {
        ctx.out << "dry run: inputs valid (" << split.train_ids.size() << " train, " << split.test_ids.size()
                << " test, " << embeddings.dim() << "-dimensional embeddings, target " << table.names()[target]
                << ")\n";
        return 0;
    }

    const ProbeOutcome outcome = train_probe(embeddings, table, split, pc);
    const EvalResult result = evaluate_probe(outcome.probe, embeddings, table, table.names()[target], split.test_ids);

    const ReportHeader h = ctx.header({"attributes", "embeddings", "attr", "train-n", "test-n", "balance", "seed",
                                       "restrict", "epochs", "batch-size", "lr", "momentum", "l2", "eval-every"});
    OutputWriter writer(cfg.get("out"));
    writer.add_text("history.csv", history_csv(h, outcome.history));
    writer.add_text("eval.csv", eval_csv(h, result));
    writer.add_text("confusion.csv",
                    confusion_csv(h, audit::confusion_report(result.records, 0.5, table.names()[target])));
    const auto written = writer.commit();
    print_accuracy(ctx.out, result);
    report_written(ctx.out, written);
    return 0;
}

int audit_cooccur(Context& ctx) {
    const auto& cfg = ctx.config;
    const auto metric = audit::parse_metric(cfg.get("metric"));
    const std::size_t cell = cfg.get_size("heatmap-cell");
    if (cell == 0) throw ConfigError("heatmap-cell must be positive");
    const AttributeTable table = load_attributes(ctx);
    if (table.empty()) throw ArgumentError("attribute table has no records");
    if (ctx.dry_run) {
        ctx.out << "dry run: inputs valid (" << table.size() << " records, " << table.attribute_count()
                << " attributes)\n";
        return 0;
    }
    const auto m = audit::cooccurrence(table, metric);
    const ReportHeader h = ctx.header({"attributes", "metric", "heatmap-cell"});
    std::ostringstream csv;
    csv << h.render() << "# metric: " << audit::to_string(metric) << '\n';
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m.empty_attribute[i]) csv << "# empty attribute (no positive labels): " << m.names[i] << '\n';
    audit::write_cooccurrence_csv(csv, m);

    OutputWriter writer(cfg.get("out"));
    writer.add_text("cooccur.csv", csv.str());
    writer.add_file("cooccur.pgm", [&](const std::string& p) {
        audit::write_cooccurrence_pgm(p, m, cell, h.render() + "# metric: " + audit::to_string(metric));
    });
    const auto written = writer.commit();

    ctx.out << "metric: " << audit::to_string(metric) << ", " << m.size() << " attributes\n";
    if (m.size() >= 2) ctx.out << "90th percentile pairwise value: " << fixed(audit::pairwise_percentile(m, 90.0), 4) << '\n';
    if (const auto idx = table.find_attribute(cfg.get("attr")); idx && m.size() >= 2) {
        std::size_t best = *idx == 0 ? 1 : 0;
        for (std::size_t j = 0; j < m.size(); ++j)
            if (j != *idx && m.at(*idx, j) > m.at(*idx, best)) best = j;
        ctx.out << m.names[*idx] << ": max off-diagonal " << fixed(m.at(*idx, best), 4) << " (with " << m.names[best]
                << ")\n";
    }
    report_written(ctx.out, written);
    return 0;
}

int audit_tree(Context& ctx) {
    const auto& cfg = ctx.config;
    const std::size_t max_depth = cfg.get_size("max-depth");
    const std::size_t min_leaf = cfg.get_size("min-leaf");
    const std::size_t tree_n = cfg.get_size("tree-n");
    AttributeTable table = load_attributes(ctx);
    const std::size_t target = table.attribute_index(cfg.get("attr"));
    if (table.empty()) throw ArgumentError("attribute table has no records");
    if (tree_n > table.size())
        throw ArgumentError("tree-n is " + std::to_string(tree_n) + " but the table has only " +
                            std::to_string(table.size()) + " records");
    if (ctx.dry_run) {
        ctx.out << "dry run: inputs valid (" << table.size() << " records, target " << table.names()[target] << ")\n";
        return 0;
    }
    if (tree_n > 0) {
        std::vector<std::size_t> order(table.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng rng = Rng::substream(cfg.get_u64("seed"), "tree-subset");
        rng.shuffle(order);
        order.resize(tree_n);
        std::sort(order.begin(), order.end());
        AttributeTable subset(table.names());
        for (auto i : order) subset.add(table.records()[i]);
        table = std::move(subset);
    }
    const auto tree = audit::fit_tree(table, table.names()[target], max_depth, min_leaf);
    const double acc = audit::tree_accuracy(tree, table);

    const ReportHeader h = ctx.header({"attributes", "attr", "max-depth", "min-leaf", "tree-n", "seed"});
    std::string body = h.render();
    body += "# target: " + table.names()[target] + "\n";
    body += "# records: " + std::to_string(table.size()) + "\n";
    body += "# depth: " + std::to_string(tree.depth()) + "\n";
    body += "# train_accuracy: " + fixed(acc, 6) + "\n";
    body += audit::format_tree(tree);

    OutputWriter writer(cfg.get("out"));
    writer.add_text("tree.txt", body);
    const auto written = writer.commit();
    ctx.out << "tree depth " << tree.depth() << ", train accuracy " << fixed(acc, 4) << '\n';
    report_written(ctx.out, written);
    return 0;
}

int audit_confusion(Context& ctx) {
    const auto& cfg = ctx.config;
    const double threshold = cfg.get_real("threshold");
    const auto records = load_eval(ctx);
    if (ctx.dry_run) {
        ctx.out << "dry run: inputs valid (" << records.size() << " evaluation records)\n";
        return 0;
    }
    const auto report = audit::confusion_report(records, threshold, cfg.get("attr"));
    OutputWriter writer(cfg.get("out"));
    writer.add_text("confusion.csv", confusion_csv(ctx.header({"eval", "attr", "threshold"}), report));
    const auto written = writer.commit();
    ctx.out << "TP " << report.true_positive << ", FP " << report.false_positive << ", TN " << report.true_negative
            << ", FN " << report.false_negative << '\n';
    report_written(ctx.out, written);
    return 0;
}

int audit_noise(Context& ctx) {
    const auto& cfg = ctx.config;
    const double threshold = cfg.get_real("threshold");
    const long long top_k = static_cast<long long>(cfg.get_u64("top-k"));
    if (top_k <= 0) throw ConfigError("top-k must be positive");
    const auto records = load_eval(ctx);
    if (ctx.dry_run) {
        ctx.out << "dry run: inputs valid (" << records.size() << " evaluation records)\n";
        return 0;
    }
    const auto candidates = audit::mine_label_noise(records, top_k, threshold);
    std::ostringstream body;
    body << ctx.header({"eval", "attr", "threshold", "top-k"}).render();
    audit::write_noise_csv(body, candidates);
    OutputWriter writer(cfg.get("out"));
    writer.add_text("noise.csv", body.str());
    const auto written = writer.commit();
    ctx.out << candidates.size() << " label-noise candidates\n";
    report_written(ctx.out, written);
    return 0;
}

int audit_workload(Context& ctx) {
    const auto& cfg = ctx.config;
    std::string text;
    std::string body;
    if (cfg.has("images-per-hour")) {
        text = audit::format_rate(cfg.get_real("images-per-hour"), cfg.get_real("n-features"));
        body = ctx.header({"images-per-hour", "n-features"}).render();
    } else {
        audit::WorkloadInputs in{cfg.get_real("n-images"), cfg.get_real("n-features"), cfg.get_real("n-workers"),
                                 cfg.get_real("days"),     cfg.get_real("hours-per-day"), cfg.get_real("redundancy")};
        text = audit::format_workload(audit::workload_estimate(in));
        body = ctx.header({"n-images", "n-features", "n-workers", "days", "hours-per-day", "redundancy"}).render();
    }
    if (ctx.dry_run) {
        ctx.out << "dry run: inputs valid\n";
        return 0;
    }
    OutputWriter writer(cfg.get("out"));
    writer.add_text("workload.txt", body + text);
    const auto written = writer.commit();
    ctx.out << text;
    report_written(ctx.out, written);
    return 0;
}

int cmd_inspect(Context& ctx) {
    const auto& cfg = ctx.config;
    const AttributeTable table = load_attributes(ctx);
    auto& out = ctx.out;
    out << "records: " << table.size() << "\nattributes: " << table.attribute_count() << '\n';
    for (std::size_t a = 0; a < table.attribute_count(); ++a) {
        const std::size_t pos = table.positive_count(a);
        const double pct = table.empty() ? 0.0 : 100.0 * static_cast<double>(pos) / static_cast<double>(table.size());
        char buf[160];
        std::snprintf(buf, sizeof buf, "  %-20s %8zu positive (%5.1f%%)\n", table.names()[a].c_str(), pos, pct);
        out << buf;
    }
    if (cfg.has("embeddings")) {
        const EmbeddingTable emb = load_embeddings(existing_file(cfg, "embeddings"));
        std::size_t covered = 0;
        for (const auto& r : table.records()) covered += emb.find(r.image_id) != EmbeddingTable::npos;
        out << "embeddings: " << emb.size() << " x " << emb.dim() << ", covering " << covered << " of "
            << table.size() << " records\n";
    }
    if (cfg.has("images")) {
        const std::string root = existing_dir(cfg, "images");
        std::size_t present = 0;
        for (const auto& r : table.records()) present += fs::is_regular_file(fs::path(root) / r.image_id);
        out << "images: " << present << " of " << table.size() << " present under " << root << '\n';
    }
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Facial-attribute classifiers and dataset audits", "faceattr"};
    app.require_subcommand(1);
    app.set_version_flag("--version", FACEATTR_VERSION);

    std::string config_path;
    bool dry_run = false;
    std::map<std::string, std::string> flags;
    app.add_option("--config", config_path, "key = value run configuration file");
    app.add_flag("--dry-run", dry_run, "validate inputs and exit without training or writing");
    for (const auto& key : config_keys()) {
        std::string help = key.help;
        if (*key.default_value) help += std::string(" [default: ") + key.default_value + "]";
        app.add_option(std::string("--") + key.name, flags[key.name], help)->group("Settings");
    }

    auto* train_cnn = app.add_subcommand("train-cnn", "train the convolutional network on images");
    auto* train_probe = app.add_subcommand("train-probe", "train a linear probe on embeddings");
    auto* audit = app.add_subcommand("audit", "dataset audits");
    std::string which;
    audit->add_option("analysis", which, "cooccur | tree | confusion | noise | workload")
        ->required()
        ->check(CLI::IsMember({"cooccur", "tree", "confusion", "noise", "workload"}));
    auto* inspect = app.add_subcommand("inspect", "print dataset statistics");
    for (auto* sub : {train_cnn, train_probe, audit, inspect}) sub->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << FACEATTR_VERSION << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "faceattr: " << e.what() << "\nRun with --help for usage.\n";
        return 2;
    }

    try {
        Context ctx{"", RunConfig{}, dry_run, out, {}};
        if (!config_path.empty()) ctx.config.merge_file(config_path);
        for (const auto& key : config_keys())
            if (app.count(std::string("--") + key.name)) ctx.config.set(key.name, flags[key.name]);

        if (train_cnn->parsed()) {
            ctx.command = "train-cnn";
            return cmd_train_cnn(ctx);
        }
        if (train_probe->parsed()) {
            ctx.command = "train-probe";
            return cmd_train_probe(ctx);
        }
        if (inspect->parsed()) {
            ctx.command = "inspect";
            return cmd_inspect(ctx);
        }
        ctx.command = "audit " + which;
        if (which == "cooccur") return audit_cooccur(ctx);
        if (which == "tree") return audit_tree(ctx);
        if (which == "confusion") return audit_confusion(ctx);
        if (which == "noise") return audit_noise(ctx);
        return audit_workload(ctx);
    } catch (const std::exception& e) {
        err << "faceattr: error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace faceattr

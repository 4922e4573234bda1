// wobias: audits sentence-pair datasets and model predictions for
// word-overlap bias, and runs the debiasing / sampling / prompting loops on
// the built-in bag-of-words model.

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "wobias/audit.hpp"
#include "wobias/corpus.hpp"
#include "wobias/debias.hpp"
#include "wobias/errors.hpp"
#include "wobias/model.hpp"
#include "wobias/overlap.hpp"
#include "wobias/promptgen.hpp"
#include "wobias/sampler.hpp"
#include "wobias/synth.hpp"

#include "runmeta.hpp"

namespace {

using namespace wobias;
using cli::RunMeta;

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    return out;
}

DatasetFormat format_from(const std::string& name) {
    if (name == "jsonl") return DatasetFormat::json_lines;
    if (name == "tsv") return DatasetFormat::tsv;
    throw UsageError("unknown format \"" + name + "\" (expected jsonl or tsv)");
}

Dataset load_dataset(const std::string& path, const std::string& format) {
    auto in = open_input(path);
    ParseResult result = parse_dataset(in, format_from(format), path);
    if (result.diagnostics.rejected > 0) {
        std::cerr << "warning: rejected " << result.diagnostics.rejected << " record(s) from "
                  << path << "\n";
        const std::size_t shown = std::min<std::size_t>(result.diagnostics.reasons.size(), 20);
        for (std::size_t i = 0; i < shown; ++i)
            std::cerr << "  " << result.diagnostics.reasons[i] << "\n";
        if (shown < result.diagnostics.reasons.size())
            std::cerr << "  ... and " << result.diagnostics.reasons.size() - shown
                      << " more\n";
    }
    return std::move(result.dataset);
}

LabelSpace space_from(int labels) {
    if (labels == 2) return LabelSpace::collapsed;
    if (labels == 3) return LabelSpace::three_way;
    throw UsageError("--labels must be 2 or 3");
}

CollapsedLabel label_arg(const std::string& name) {
    if (name == "ent" || name == "entailment") return CollapsedLabel::entailment;
    if (name == "nonent" || name == "non-entailment") return CollapsedLabel::non_entailment;
    throw UsageError("unknown label \"" + name + "\" (expected ent or nonent)");
}

std::string quote_csv(const std::string& s) {
    return "\"" + s + "\"";
}

// Shared flags for the training-style subcommands.
struct TrainFlags {
    std::string in;
    std::string format = "jsonl";
    TrainConfig config;
    int labels = 2;
    std::string optimizer = "sgd";
    std::string out;
    std::string trace_out;
    std::string eval_in;
    std::string preds_out;

    void add_common(CLI::App* cmd, int default_epochs) {
        config.epochs = default_epochs;
        cmd->add_option("--in", in, "training dataset")->required();
        cmd->add_option("--format", format, "dataset format: jsonl or tsv");
        cmd->add_option("--epochs", config.epochs, "training epochs");
        cmd->add_option("--lr", config.lr, "learning rate");
        cmd->add_option("--batch", config.batch, "mini-batch size");
        cmd->add_option("--seed", config.seed, "master seed for this run");
        cmd->add_option("--dim", config.dim, "embedding dimension");
        cmd->add_option("--labels", labels, "label space: 2 (collapsed) or 3");
        cmd->add_option("--optimizer", optimizer, "sgd or adam");
        cmd->add_option("--out", out, "model checkpoint path")->required();
        cmd->add_option("--trace", trace_out, "learning trace output (jsonl)");
        cmd->add_option("--eval", eval_in, "dataset to predict after training");
        cmd->add_option("--preds-out", preds_out, "prediction output for --eval");
    }

    TrainConfig resolved_config() const {
        TrainConfig c = config;
        c.optimizer = optimizer == "adam" ? TrainConfig::Optimizer::adam
                                          : TrainConfig::Optimizer::sgd;
        if (optimizer != "adam" && optimizer != "sgd")
            throw UsageError("--optimizer must be sgd or adam");
        return c;
    }
};

void emit_model_outputs(const ModelParams& params, const LearningTrace* trace,
                        const TrainFlags& flags, RunMeta& meta) {
    {
        auto out = open_output(flags.out);
        save_model(params, out);
    }
    meta.outputs.push_back(flags.out);
    if (!flags.trace_out.empty()) {
        if (!trace) throw UsageError("--trace is not available for this subcommand");
        auto out = open_output(flags.trace_out);
        write_trace(*trace, out);
        meta.outputs.push_back(flags.trace_out);
    }
    if (!flags.eval_in.empty()) {
        if (flags.preds_out.empty())
            throw UsageError("--eval requires --preds-out");
        Dataset eval = load_dataset(flags.eval_in, flags.format);
        meta.inputs.push_back(flags.eval_in);
        auto preds = predict(eval, params);
        auto out = open_output(flags.preds_out);
        write_predictions(preds, out);
        meta.outputs.push_back(flags.preds_out);
    }
}

int run(int argc, char** argv) {
    CLI::App app{"word-overlap bias audit toolkit"};
    app.set_version_flag("--version", cli::kToolVersion);
    // key=value config files supply per-subcommand defaults under a
    // [subcommand] section; command-line flags override
    app.set_config("--config");
    app.require_subcommand(1);

    std::vector<std::string> raw_args(argv, argv + argc);
    std::function<void(RunMeta&)> action;

    // ---- bins ----------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("bins", "per-instance overlap ratios and bins (CSV)");
        auto in = std::make_shared<std::string>();
        auto format = std::make_shared<std::string>("jsonl");
        auto scheme = std::make_shared<std::string>("seven");
        auto out = std::make_shared<std::string>();
        cmd->add_option("--in", *in, "dataset")->required();
        cmd->add_option("--format", *format, "jsonl or tsv");
        cmd->add_option("--scheme", *scheme, "bin scheme: seven or four");
        cmd->add_option("--out", *out, "output CSV")->required();
        cmd->callback([=, &action] {
            action = [=](RunMeta& meta) {
                Dataset data = load_dataset(*in, *format);
                BinScheme s = scheme_by_name(*scheme);
                auto os = open_output(*out);
                os << "id,overlap_num,overlap_den,overlap,bin,label\n";
                char buf[32];
                for (const auto& inst : data.instances) {
                    auto ratio = word_overlap(tokenize(inst.premise), tokenize(inst.hypothesis));
                    const BinId& bin = assign_bin(ratio, s);
                    std::snprintf(buf, sizeof(buf), "%.6f", ratio.value());
                    os << quote_csv(inst.id) << "," << ratio.shared << "," << ratio.hyp_len
                       << "," << buf << "," << quote_csv(bin.label) << ","
                       << to_string(collapse_label(inst.gold)) << "\n";
                }
                meta.inputs.push_back(*in);
                meta.outputs.push_back(*out);
                meta.extra["scheme"] = s.name;
                meta.extra["instances"] = data.size();
                std::cout << "wrote " << *out << " (" << data.size() << " rows)\n";
            };
        });
    }

    // ---- audit / profile -------------------------------------------------
    {
        auto* cmd = app.add_subcommand("audit", "per-bin per-label accuracy report");
        auto in = std::make_shared<std::string>();
        auto format = std::make_shared<std::string>("jsonl");
        auto preds = std::make_shared<std::string>();
        auto scheme = std::make_shared<std::string>("seven");
        auto out = std::make_shared<std::string>();
        cmd->add_option("--in", *in, "dataset")->required();
        cmd->add_option("--format", *format, "jsonl or tsv");
        cmd->add_option("--preds", *preds, "prediction file (jsonl)")->required();
        cmd->add_option("--scheme", *scheme, "bin scheme");
        cmd->add_option("--out", *out, "report CSV")->required();
        cmd->callback([=, &action] {
            action = [=](RunMeta& meta) {
                Dataset data = load_dataset(*in, *format);
                auto pin = open_input(*preds);
                PredictionFile pf = read_predictions(pin);
                BinReport report = evaluate(data, pf, scheme_by_name(*scheme));
                {
                    auto os = open_output(*out);
                    write_bin_report_csv(report, os);
                }
                {
                    auto os = open_output(*out + ".summary.json");
                    write_bin_report_summary(report, os);
                }
                meta.inputs = {*in, *preds};
                meta.outputs = {*out, *out + ".summary.json"};
                meta.extra["overall_accuracy"] = report.overall_accuracy();
                std::cout << "overall accuracy " << report.overall_accuracy() << " over "
                          << report.total << " instances\n";
            };
        });
    }
    {
        auto* cmd = app.add_subcommand("profile", "per-bin mean confidence profile");
        auto in = std::make_shared<std::string>();
        auto format = std::make_shared<std::string>("jsonl");
        auto preds = std::make_shared<std::string>();
        auto scheme = std::make_shared<std::string>("seven");
        auto out = std::make_shared<std::string>();
        cmd->add_option("--in", *in, "dataset")->required();
        cmd->add_option("--format", *format, "jsonl or tsv");
        cmd->add_option("--preds", *preds, "prediction file (jsonl)")->required();
        cmd->add_option("--scheme", *scheme, "bin scheme");
        cmd->add_option("--out", *out, "profile CSV")->required();
        cmd->callback([=, &action] {
            action = [=](RunMeta& meta) {
                Dataset data = load_dataset(*in, *format);
                auto pin = open_input(*preds);
                PredictionFile pf = read_predictions(pin);
                ProfileReport profile = confidence_profile(data, pf, scheme_by_name(*scheme));
                auto os = open_output(*out);
                write_profile_csv(profile, os);
                meta.inputs = {*in, *preds};
                meta.outputs = {*out};
                std::cout << "wrote " << *out << "\n";
            };
        });
    }

    // ---- compare ---------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("compare", "delta between two reports (b minus a)");
        auto a = std::make_shared<std::string>();
        auto b = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        cmd->add_option("--a", *a, "baseline report CSV")->required();
        cmd->add_option("--b", *b, "comparison report CSV")->required();
        cmd->add_option("--out", *out, "delta CSV")->required();
        cmd->callback([=, &action] {
            action = [=](RunMeta& meta) {
                auto ia = open_input(*a);
                auto ib = open_input(*b);
                BinReport ra = read_bin_report_csv(ia);
                BinReport rb = read_bin_report_csv(ib);
                ReportComparison cmpres = compare(ra, rb);
                {
                    auto os = open_output(*out);
                    write_comparison_csv(cmpres, os);
                }
                {
                    auto os = open_output(*out + ".summary.json");
                    write_comparison_summary(cmpres, os);
                }
                meta.inputs = {*a, *b};
                meta.outputs = {*out, *out + ".summary.json"};
                std::cout << "overall delta " << cmpres.overall_delta << "\n";
            };
        });
    }

    // ---- train / long-tune ------------------------------------------------
    auto add_train_like = [&](const char* name, const char* help, int default_epochs,
                              bool is_long_tune) {
        auto* cmd = app.add_subcommand(name, help);
        auto flags = std::make_shared<TrainFlags>();
        flags->add_common(cmd, default_epochs);
        cmd->callback([=, &action] {
            action = [=](RunMeta& meta) {
                Dataset data = load_dataset(flags->in, flags->format);
                meta.inputs.push_back(flags->in);
                TrainConfig cfg = flags->resolved_config();
                TrainResult result =
                    is_long_tune
                        ? long_tune(data, cfg, space_from(flags->labels), cfg.epochs)
                        : train(data, cfg, space_from(flags->labels));
                emit_model_outputs(result.params, &result.trace, *flags, meta);
                meta.extra["seed"] = cfg.seed;
                meta.extra["epochs"] = result.params.config.epochs;
                meta.extra["preset"] = result.params.config.preset;
                std::cout << "trained " << result.params.config.preset << " model on "
                          << data.size() << " instances -> " << flags->out << "\n";
            };
        });
    };
    add_train_like("train", "train the bag-of-words model", 3, false);
    add_train_like("long-tune", "train with the long-tuning preset", 20, true);

    // ---- forgettables ------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("forgettables",
                                       "select never-learned / forgotten examples from a trace");
        auto trace_in = std::make_shared<std::string>();
        auto ids_out = std::make_shared<std::string>();
        auto stats_out = std::make_shared<std::string>();
        cmd->add_option("--trace", *trace_in, "learning trace (jsonl)")->required();
        cmd->add_option("--ids-out", *ids_out, "selected id list")->required();
        cmd->add_option("--stats-out", *stats_out, "per-id stats CSV");
        cmd->callback([=, &action] {
            action = [=](RunMeta& meta) {
                auto in = open_input(*trace_in);
                LearningTrace trace = read_trace(in);
                ForgettableSet set = find_forgettables(trace);
                {
                    auto os = open_output(*ids_out);
                    for (const auto& id : set.ids) os << id << '\n';
                }
                meta.inputs = {*trace_in};
                meta.outputs = {*ids_out};
                if (!stats_out->empty()) {
                    auto os = open_output(*stats_out);
                    write_forgettable_stats_csv(set, os);
                    meta.outputs.push_back(*stats_out);
                }
                meta.extra["selected"] = set.ids.size();
                meta.extra["traced"] = set.stats.size();
                std::cout << "selected " << set.ids.size() << " of " << set.stats.size()
                          << " traced examples\n";
            };
        });
    }

    // ---- finetune -----------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("finetune", "continue training a checkpoint on a subset");
        auto flags = std::make_shared<TrainFlags>();
        auto model_in = std::make_shared<std::string>();
        auto ids_in = std::make_shared<std::string>();
        cmd->add_option("--model", *model_in, "base model checkpoint")->required();
        cmd->add_option("--ids", *ids_in, "restrict --in to these ids (one per line)");
        flags->add_common(cmd, 3);
        cmd->callback([=, &action] {
            action = [=](RunMeta& meta) {
                auto min = open_input(*model_in);
                ModelParams base = load_model(min);
                Dataset data = load_dataset(flags->in, flags->format);
                meta.inputs.push_back(*model_in);
                meta.inputs.push_back(flags->in);
                if (!ids_in->empty()) {
                    auto is = open_input(*ids_in);
                    std::vector<std::string> ids;
                    std::string line;
                    while (std::getline(is, line)) {
                        if (!line.empty() && line.back() == '\r') line.pop_back();
                        if (!line.empty()) ids.push_back(line);
                    }
                    data = subset_by_ids(data, ids);
                    meta.inputs.push_back(*ids_in);
                }
                TrainConfig cfg = flags->resolved_config();
                cfg.dim = base.embedding.dim;
                cfg.preset = "finetune";
                ModelParams tuned = finetune_on_subset(base, data, cfg);
                emit_model_outputs(tuned, nullptr, *flags, meta);
                meta.extra["seed"] = cfg.seed;
                meta.extra["subset_size"] = data.size();
                std::cout << "fine-tuned on " << data.size() << " instances -> " << flags->out
                          << "\n";
            };
        });
    }

    // ---- eliminate -----------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("eliminate",
                                       "remove an overlap-range x label slice from a dataset");
        auto in = std::make_shared<std::string>();
        auto format = std::make_shared<std::string>("jsonl");
        auto bin = std::make_shared<std::string>();
        auto label = std::make_shared<std::string>();
        auto scheme = std::make_shared<std::string>("seven");
        auto out = std::make_shared<std::string>();
        cmd->add_option("--in", *in, "dataset")->required();
        cmd->add_option("--format", *format, "jsonl or tsv");
        cmd->add_option("--bin", *bin, "bin name (e.g. Full) or closed range lo:hi")->required();
        cmd->add_option("--label", *label, "ent or nonent")->required();
        cmd->add_option("--scheme", *scheme, "bin scheme for named bins");
        cmd->add_option("--out", *out, "remaining instances (jsonl)")->required();
        cmd->callback([=, &action] {
            action = [=](RunMeta& meta) {
                Dataset data = load_dataset(*in, *format);
                CollapsedLabel l = label_arg(*label);
                EliminationFilter filter;
                auto colon = bin->find(':');
                if (colon != std::string::npos) {
                    filter = EliminationFilter::from_range(
                        rational_from_decimal(bin->substr(0, colon)),
                        rational_from_decimal(bin->substr(colon + 1)), l);
                } else {
                    filter = EliminationFilter::from_bin(*bin, scheme_by_name(*scheme), l);
                }
                EliminationResult result = eliminate(data, filter);
                auto os = open_output(*out);
                serialize_dataset(result.remaining, os);
                meta.inputs = {*in};
                meta.outputs = {*out};
                meta.extra["filter"] = filter.describe();
                meta.extra["removed"] = result.removed;
                meta.extra["remaining"] = result.remaining.size();
                std::cout << "removed " << result.removed << ", kept "
                          << result.remaining.size() << " -> " << *out << "\n";
            };
        });
    }

    // ---- poe-train -------------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("poe-train",
                                       "train the main model against a frozen weak learner");
        auto flags = std::make_shared<TrainFlags>();
        auto weak_in = std::make_shared<std::string>();
        cmd->add_option("--weak-checkpoint", *weak_in, "frozen weak model")->required();
        flags->add_common(cmd, 3);
        cmd->callback([=, &action] {
            action = [=](RunMeta& meta) {
                auto win = open_input(*weak_in);
                ModelParams weak = load_model(win);
                Dataset data = load_dataset(flags->in, flags->format);
                meta.inputs.push_back(*weak_in);
                meta.inputs.push_back(flags->in);
                TrainConfig cfg = flags->resolved_config();
                cfg.preset = "poe";
                ModelParams main_model = poe_train(data, weak, cfg);
                emit_model_outputs(main_model, nullptr, *flags, meta);
                meta.extra["seed"] = cfg.seed;
                meta.extra["weak_preset"] = weak.config.preset;
                std::cout << "poe-trained main model on " << data.size() << " instances -> "
                          << flags->out << "\n";
            };
        });
    }

    // ---- train-weak ---------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("train-weak",
                                       "train the reduced-capacity weak learner");
        auto flags = std::make_shared<TrainFlags>();
        flags->config.dim = 8;
        flags->add_common(cmd, 3);
        cmd->callback([=, &action] {
            action = [=](RunMeta& meta) {
                Dataset data = load_dataset(flags->in, flags->format);
                meta.inputs.push_back(flags->in);
                TrainConfig cfg = flags->resolved_config();
                TrainResult result =
                    train_weak(data, cfg, space_from(flags->labels), cfg.dim);
                emit_model_outputs(result.params, &result.trace, *flags, meta);
                meta.extra["seed"] = cfg.seed;
                meta.extra["preset"] = result.params.config.preset;
                std::cout << "trained " << result.params.config.preset << " -> " << flags->out
                          << "\n";
            };
        });
    }

    // ---- sample -----------------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("sample", "seeded per-label (optionally overlap-balanced) sampling");
        auto in = std::make_shared<std::string>();
        auto format = std::make_shared<std::string>("jsonl");
        auto k = std::make_shared<int>(16);
        auto balanced = std::make_shared<bool>(false);
        auto seed = std::make_shared<std::uint64_t>(0);
        auto labels = std::make_shared<int>(2);
        auto scheme = std::make_shared<std::string>("four");
        auto out = std::make_shared<std::string>();
        cmd->add_option("--in", *in, "dataset")->required();
        cmd->add_option("--format", *format, "jsonl or tsv");
        cmd->add_option("--k", *k, "instances per label");
        cmd->add_flag("--balanced", *balanced, "balance across overlap categories");
        cmd->add_option("--seed", *seed, "sampling seed");
        cmd->add_option("--labels", *labels, "label space: 2 or 3");
        cmd->add_option("--scheme", *scheme, "category scheme for --balanced");
        cmd->add_option("--out", *out, "sampled subset (jsonl)")->required();
        cmd->callback([=, &action] {
            action = [=](RunMeta& meta) {
                Dataset data = load_dataset(*in, *format);
                Dataset subset =
                    *balanced
                        ? balanced_sample(data, *k, scheme_by_name(*scheme),
                                          space_from(*labels), *seed)
                        : fewshot_sample(data, *k, space_from(*labels), *seed);
                auto os = open_output(*out);
                serialize_dataset(subset, os);
                meta.inputs = {*in};
                meta.outputs = {*out};
                meta.extra["seed"] = *seed;
                meta.extra["k"] = *k;
                meta.extra["balanced"] = *balanced;
                std::cout << "sampled " << subset.size() << " instances -> " << *out << "\n";
            };
        });
    }

    // ---- promptize / score-mask ----------------------------------------------------
    {
        auto* cmd = app.add_subcommand("promptize", "emit masked prompts for external scoring");
        auto in = std::make_shared<std::string>();
        auto format = std::make_shared<std::string>("jsonl");
        auto out = std::make_shared<std::string>();
        cmd->add_option("--in", *in, "dataset")->required();
        cmd->add_option("--format", *format, "jsonl or tsv");
        cmd->add_option("--out", *out, "prompts (jsonl)")->required();
        cmd->callback([=, &action] {
            action = [=](RunMeta& meta) {
                Dataset data = load_dataset(*in, *format);
                auto os = open_output(*out);
                write_prompts(data, os);
                meta.inputs = {*in};
                meta.outputs = {*out};
                std::cout << "wrote " << data.size() << " prompts -> " << *out << "\n";
            };
        });
    }
    {
        auto* cmd = app.add_subcommand("score-mask",
                                       "verbalizer-token scores -> prediction file");
        auto scores = std::make_shared<std::string>();
        auto collapse = std::make_shared<bool>(false);
        auto out = std::make_shared<std::string>();
        cmd->add_option("--scores", *scores, "mask scores (jsonl)")->required();
        cmd->add_flag("--collapse", *collapse, "emit 2-way probabilities");
        cmd->add_option("--out", *out, "prediction file (jsonl)")->required();
        cmd->callback([=, &action] {
            action = [=](RunMeta& meta) {
                auto is = open_input(*scores);
                auto records = read_mask_scores(is);
                PredictionFile preds = score_mask(records, Verbalizer::standard(), *collapse);
                auto os = open_output(*out);
                write_predictions(preds, os);
                meta.inputs = {*scores};
                meta.outputs = {*out};
                std::cout << "scored " << preds.records.size() << " records -> " << *out
                          << "\n";
            };
        });
    }

    // ---- synth ------------------------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("synth",
                                       "generate a corpus with a controlled overlap/label table");
        auto n = std::make_shared<std::size_t>(0);
        auto rho = std::make_shared<double>(0.0);
        auto cells = std::make_shared<std::vector<std::string>>();
        auto scheme = std::make_shared<std::string>("seven");
        auto seed = std::make_shared<std::uint64_t>(0);
        auto vocab = std::make_shared<int>(500);
        auto pmin = std::make_shared<int>(8);
        auto pmax = std::make_shared<int>(12);
        auto hmin = std::make_shared<int>(8);
        auto hmax = std::make_shared<int>(12);
        auto cues = std::make_shared<int>(3);
        auto out = std::make_shared<std::string>();
        cmd->add_option("--n", *n, "total instances (auto-filled cells from --rho)");
        cmd->add_option("--rho", *rho, "overlap-label correlation strength in [0,1]");
        cmd->add_option("--cell,--cells", *cells,
                        "explicit cell \"bin,label,count\" (repeatable; overrides --n)");
        cmd->add_option("--scheme", *scheme, "bin scheme");
        cmd->add_option("--seed", *seed, "generation seed");
        cmd->add_option("--vocab", *vocab, "filler vocabulary size");
        cmd->add_option("--premise-min", *pmin, "min premise filler tokens");
        cmd->add_option("--premise-max", *pmax, "max premise filler tokens");
        cmd->add_option("--hyp-min", *hmin, "min hypothesis tokens");
        cmd->add_option("--hyp-max", *hmax, "max hypothesis tokens");
        cmd->add_option("--cue-variants", *cues, "content cue tokens per side and class");
        cmd->add_option("--out", *out, "dataset (jsonl)")->required();
        cmd->callback([=, &action] {
            action = [=](RunMeta& meta) {
                SynthConfig cfg;
                cfg.scheme = scheme_by_name(*scheme);
                cfg.seed = *seed;
                cfg.vocab_size = *vocab;
                cfg.premise_len_min = *pmin;
                cfg.premise_len_max = *pmax;
                cfg.hyp_len_min = *hmin;
                cfg.hyp_len_max = *hmax;
                cfg.cue_variants = *cues;
                if (!cells->empty()) {
                    cfg.cells.assign(cfg.scheme.bins.size(), {0, 0});
                    for (const auto& spec : *cells) {
                        auto c1 = spec.find(',');
                        auto c2 = spec.rfind(',');
                        if (c1 == std::string::npos || c2 == c1)
                            throw UsageError("--cell expects \"bin,label,count\", got \"" +
                                             spec + "\"");
                        std::string bin = spec.substr(0, c1);
                        CollapsedLabel l = label_arg(spec.substr(c1 + 1, c2 - c1 - 1));
                        int bi = cfg.scheme.index_of(bin);
                        if (bi < 0)
                            throw UsageError("--cell names unknown bin \"" + bin + "\"");
                        cfg.cells[bi][static_cast<int>(l)] +=
                            std::stoull(spec.substr(c2 + 1));
                    }
                } else {
                    if (*n == 0) throw UsageError("synth needs --n (with --rho) or --cell");
                    cfg.cells = auto_fill_cells(cfg.scheme, *n, *rho);
                }
                Dataset data = generate(cfg);
                auto os = open_output(*out);
                serialize_dataset(data, os);
                meta.outputs = {*out};
                meta.extra["seed"] = *seed;
                meta.extra["rho"] = *rho;
                meta.extra["instances"] = data.size();
                std::cout << "generated " << data.size() << " instances -> " << *out << "\n";
            };
        });
    }

    // ---- report --------------------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("report",
                                       "merge labeled report CSVs into one comparison table");
        auto ins = std::make_shared<std::vector<std::string>>();
        auto out = std::make_shared<std::string>();
        cmd->add_option("--in", *ins, "method=report.csv (repeatable)")->required();
        cmd->add_option("--out", *out, "merged CSV")->required();
        cmd->callback([=, &action] {
            action = [=](RunMeta& meta) {
                auto os = open_output(*out);
                os << "method,bin,label,n,accuracy,mean_confidence\n";
                char buf[32];
                for (const auto& spec : *ins) {
                    auto eq = spec.find('=');
                    if (eq == std::string::npos)
                        throw UsageError("--in expects method=path, got \"" + spec + "\"");
                    std::string method = spec.substr(0, eq);
                    std::string path = spec.substr(eq + 1);
                    auto is = open_input(path);
                    BinReport report = read_bin_report_csv(is);
                    meta.inputs.push_back(path);
                    for (std::size_t i = 0; i < report.bins.size(); ++i) {
                        for (int l = 0; l < 2; ++l) {
                            const BinCell& cell = report.cells[i][l];
                            os << quote_csv(method) << "," << quote_csv(report.bins[i])
                               << "," << to_string(static_cast<CollapsedLabel>(l)) << ","
                               << cell.n << ",";
                            if (cell.empty()) {
                                os << ",";
                            } else {
                                std::snprintf(buf, sizeof(buf), "%.6f", cell.accuracy());
                                os << buf << ",";
                                std::snprintf(buf, sizeof(buf), "%.6f",
                                              cell.mean_confidence());
                                os << buf;
                            }
                            os << "\n";
                        }
                    }
                }
                meta.outputs = {*out};
                std::cout << "merged " << ins->size() << " reports -> " << *out << "\n";
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // unify usage errors on exit 1
    }

    try {
        RunMeta meta;
        meta.subcommand = app.get_subcommands().front()->get_name();
        meta.argv = raw_args;
        if (auto* copt = app.get_config_ptr(); copt && copt->count() > 0)
            meta.inputs.push_back(copt->as<std::string>());
        action(meta);
        // primary output = first recorded output
        if (!meta.outputs.empty()) meta.write(meta.outputs.front());
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    return run(argc, argv);
}

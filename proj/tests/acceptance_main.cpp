// Acceptance suite: one pass/fail line per criterion, exit 0 only when all
// criteria hold. Each criterion carries its runtime budget; exceeding the
// budget fails the criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <json.hpp>

#include "wobias/audit.hpp"
#include "wobias/corpus.hpp"
#include "wobias/debias.hpp"
#include "wobias/errors.hpp"
#include "wobias/model.hpp"
#include "wobias/overlap.hpp"
#include "wobias/promptgen.hpp"
#include "wobias/rng.hpp"
#include "wobias/sampler.hpp"
#include "wobias/synth.hpp"

using namespace wobias;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string note;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            note = what;
        }
    }
    void info(const std::string& text) {
        if (ok) note = text;
    }
};

int g_failures = 0;

void criterion(int number, const std::string& title, double budget_seconds,
               const std::function<void(Check&)>& body) {
    Check check;
    auto start = std::chrono::steady_clock::now();
    try {
        body(check);
    } catch (const std::exception& e) {
        check.ok = false;
        check.note = std::string("exception: ") + e.what();
    }
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (check.ok && seconds > budget_seconds) {
        check.ok = false;
        check.note = "runtime budget exceeded";
    }
    if (!check.ok) ++g_failures;
    std::printf("%s  criterion %2d: %s [%.2fs]%s%s\n", check.ok ? "PASS" : "FAIL", number,
                title.c_str(), seconds, check.note.empty() ? "" : " -- ",
                check.note.c_str());
    std::fflush(stdout);
}

OverlapRatio wo(const std::string& premise, const std::string& hypothesis) {
    return word_overlap(tokenize(premise), tokenize(hypothesis));
}

double median3(double a, double b, double c) {
    std::vector<double> v{a, b, c};
    std::sort(v.begin(), v.end());
    return v[1];
}

double cell_accuracy(const BinReport& report, const char* bin, CollapsedLabel label) {
    const BinCell* cell = report.find(bin, label);
    return cell && !cell->empty() ? cell->accuracy() : -1.0;
}

double low_bin_accuracy(const BinReport& report, CollapsedLabel label) {
    auto pooled = report.pooled_accuracy({{"(0.0,0.2)", label}, {"None", label}});
    return pooled ? *pooled : -1.0;
}

// ---- criterion 5 helpers: random tiny configurations ------------------

struct TinyCase {
    Dataset data;
    ModelParams params;
    ModelParams weak;
    std::vector<const RawInstance*> batch;
};

TinyCase make_tiny_case(Rng& rng) {
    TinyCase tc;
    const char* vocab[] = {"aa", "bb", "cc", "dd", "ee", "ff", "gg", "hh"};
    int batch_size = 1 + static_cast<int>(rng.below(4));
    for (int i = 0; i < batch_size; ++i) {
        std::string prem, hyp;
        int plen = 2 + static_cast<int>(rng.below(3));
        int hlen = 1 + static_cast<int>(rng.below(3));
        for (int j = 0; j < plen; ++j) prem += std::string(vocab[rng.below(4)]) + " ";
        for (int j = 0; j < hlen; ++j) hyp += std::string(vocab[4 + rng.below(4)]) + " ";
        tc.data.instances.push_back({"g" + std::to_string(i), prem, hyp,
                                     static_cast<ThreeWayLabel>(rng.below(3)), ""});
    }
    LabelSpace space = rng.below(2) ? LabelSpace::three_way : LabelSpace::collapsed;
    TrainConfig cfg;
    cfg.dim = 1 + static_cast<int>(rng.below(4));
    cfg.seed = rng.next_u64();
    tc.params = init_params(tc.data, cfg, space);
    Rng head(rng.next_u64());
    for (auto& w : tc.params.head_w) w = head.uniform(-0.5, 0.5);
    for (auto& b : tc.params.head_b) b = head.uniform(-0.5, 0.5);

    TrainConfig wcfg;
    wcfg.dim = 1 + static_cast<int>(rng.below(3));
    wcfg.seed = rng.next_u64();
    tc.weak = init_params(tc.data, wcfg, space);
    for (auto& w : tc.weak.head_w) w = head.uniform(-0.5, 0.5);
    for (const auto& inst : tc.data.instances) tc.batch.push_back(&inst);
    return tc;
}

double max_relative_gradient_error(TinyCase& tc, const ModelParams* weak) {
    Gradients grads;
    batch_loss_and_gradient(tc.batch, tc.params, grads, weak);
    const double step = 1e-5;
    double worst = 0.0;
    auto check_block = [&](std::vector<double>& theta, const std::vector<double>& analytic) {
        for (std::size_t i = 0; i < theta.size(); ++i) {
            double saved = theta[i];
            theta[i] = saved + step;
            double up = batch_loss(tc.batch, tc.params, weak);
            theta[i] = saved - step;
            double down = batch_loss(tc.batch, tc.params, weak);
            theta[i] = saved;
            double numeric = (up - down) / (2 * step);
            double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-8});
            worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
        }
    };
    check_block(tc.params.embedding.vectors, grads.d_emb);
    check_block(tc.params.head_w, grads.d_w);
    check_block(tc.params.head_b, grads.d_b);
    return worst;
}

// ---- criteria 6/7 shared setup ------------------------------------------

// Desk-scale bias study: a rho=0.9 synthetic corpus, a three-epoch
// baseline, the d=8 weak learner, and a PoE run. Transformer-scale numbers
// are out of scope here; these runs check the qualitative signatures only.
struct BiasRun {
    Dataset train_data, eval_data;
    TrainResult baseline;
    BinReport base_report;
    ModelParams poe_model;
    BinReport poe_report;
};

std::vector<BiasRun>& bias_runs() {
    static std::vector<BiasRun> runs = [] {
        std::vector<BiasRun> out;
        BinScheme scheme = seven_bin_scheme();
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            BiasRun run;
            SynthConfig syn;
            syn.scheme = scheme;
            syn.cells = auto_fill_cells(scheme, 4000, 0.9);
            syn.seed = 1000 + seed;
            run.train_data = generate(syn);
            syn.cells = auto_fill_cells(scheme, 2000, 0.9);
            syn.seed = 2000 + seed;
            run.eval_data = generate(syn);

            TrainConfig base_cfg;
            base_cfg.epochs = 3;
            base_cfg.lr = 1e-3;
            base_cfg.optimizer = TrainConfig::Optimizer::adam;
            base_cfg.dim = 32;
            base_cfg.seed = seed;
            base_cfg.preset = "bias-baseline";
            run.baseline = train(run.train_data, base_cfg, LabelSpace::collapsed);
            run.base_report =
                evaluate(run.eval_data, predict(run.eval_data, run.baseline.params), scheme);

            TrainConfig weak_cfg = base_cfg;
            weak_cfg.epochs = 1;
            weak_cfg.lr = 0.05;
            auto weak = train_weak(run.train_data, weak_cfg, LabelSpace::collapsed);

            TrainConfig poe_cfg = base_cfg;
            poe_cfg.epochs = 120;
            poe_cfg.lr = 2e-3;
            poe_cfg.preset = "poe";
            run.poe_model = poe_train(run.train_data, weak.params, poe_cfg);
            run.poe_report =
                evaluate(run.eval_data, predict(run.eval_data, run.poe_model), scheme);
            out.push_back(std::move(run));
        }
        return out;
    }();
    return runs;
}

// ---- criterion 10 helpers -----------------------------------------------

struct Sandbox {
    fs::path dir;

    Sandbox() {
        std::string tmpl = (fs::temp_directory_path() / "wobias-acc-XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (!mkdtemp(buf.data())) throw DataError("mkdtemp failed");
        dir = buf.data();
    }
    ~Sandbox() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run_cli(const std::vector<std::string>& args, const std::string& log) {
    std::string cmd = WOBIAS_CLI_PATH;
    for (const auto& a : args) cmd += " " + a;
    cmd += " >" + log + " 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    criterion(1, "overlap golden values on the curated example pairs", 1.0, [](Check& c) {
        auto r = wo("A woman in a blue shirt and green hat looks up at the camera.",
                    "A woman wearing a blue shirt and green hat looks at the camera");
        c.require(r.ratio() == Rational{12, 13}, "12/13 pair mismatch");
        r = wo("Two men in wheelchairs are reaching in the air for a basketball.",
               "Two women in wheelchairs are reaching in the air for a basketball.");
        c.require(r.ratio() == Rational{11, 12}, "11/12 pair mismatch");
        r = wo("A blond woman in a white dress sits in a flowering tree while holding a "
               "white bird.",
               "The woman beats two eggs to make breakfast for her husband.");
        c.require(r.ratio() == Rational{1, 11}, "1/11 pair mismatch");
        r = wo("A little kid in blue is sledding down a snowy hill.",
               "A little kid in blue sledding.");
        c.require(r.ratio() == Rational{1, 1}, "full-overlap entailment row is not 1");
        r = wo("The young lady is giving the old man a hug.",
               "The young man is giving the old man a hug.");
        c.require(r.ratio() == Rational{1, 1}, "full-overlap non-entailment row is not 1");
        r = wo("A couple sits in the grass.", "People are outside.");
        c.require(r.ratio() == Rational{0, 1}, "none entailment row is not 0");
        r = wo("An older women tending to a garden.", "The lady is cooking dinner.");
        c.require(r.ratio() == Rational{0, 1}, "none non-entailment row is not 0");
        // the repeated shared "a" counts once per occurrence, so 2/14
        r = wo("Several young people sit at a table playing poker.",
               "Youthful Human beings are gathered around a flat surface to play a card "
               "game.");
        c.require(r.shared == 2 && r.hyp_len == 14, "occurrence-based count is not 2/14");
    });

    criterion(2, "bin schemes partition [0,1], closed-lower boundaries", 1.0, [](Check& c) {
        auto seven = seven_bin_scheme();
        auto four = four_category_scheme();
        Rng rng(20240);
        for (int i = 0; i < 100000 && c.ok; ++i) {
            long long den = 1 + static_cast<long long>(rng.below(9999));
            long long num = static_cast<long long>(rng.below(den + 1));
            Rational v{num, den};
            for (const auto* scheme : {&seven, &four}) {
                int hits = 0;
                for (const auto& b : scheme->bins)
                    if (b.contains(v)) ++hits;
                c.require(hits == 1, "value " + std::to_string(num) + "/" +
                                         std::to_string(den) + " hit " +
                                         std::to_string(hits) + " bins in " + scheme->name);
            }
        }
        c.require(assign_bin({1, 5}, seven).label == "[0.2,0.4)", "0.2 boundary open");
        c.require(assign_bin({2, 5}, seven).label == "[0.4,0.6)", "0.4 boundary open");
        c.require(assign_bin({3, 5}, seven).label == "[0.6,0.8)", "0.6 boundary open");
        c.require(assign_bin({4, 5}, seven).label == "[0.8,1.0)", "0.8 boundary open");
        c.require(assign_bin({1, 2}, four).label == "[0.5,1.0)", "0.5 boundary open");
    });

    criterion(3, "PoE combination equals the renormalized product", 5.0, [](Check& c) {
        for (int i = 0; i <= 100; ++i) {
            for (int j = 0; j <= 100; ++j) {
                std::vector<double> pw = {i / 100.0, 1.0 - i / 100.0};
                std::vector<double> pm = {j / 100.0, 1.0 - j / 100.0};
                auto y = poe_combine(pw, pm);
                double p0 = std::max(pw[0], 1e-12) * std::max(pm[0], 1e-12);
                double p1 = std::max(pw[1], 1e-12) * std::max(pm[1], 1e-12);
                double z = p0 + p1;
                c.require(std::abs(y[0] - p0 / z) <= 1e-9 && std::abs(y[1] - p1 / z) <= 1e-9,
                          "product mismatch at grid " + std::to_string(i) + "," +
                              std::to_string(j));
                auto yx = poe_combine(pm, pw);
                c.require(std::abs(y[0] - yx[0]) <= 1e-12 && std::abs(y[1] - yx[1]) <= 1e-12,
                          "symmetry violated");
                // identity at 1e-12 needs strictly positive entries (exact
                // zeros sit below the documented clamp)
                if (j > 0 && j < 100) {
                    auto id = poe_combine({0.5, 0.5}, pm);
                    c.require(std::abs(id[0] - pm[0]) <= 1e-12 &&
                                  std::abs(id[1] - pm[1]) <= 1e-12,
                              "uniform-weak identity violated");
                }
                if (!c.ok) return;
            }
        }
        auto id3 = poe_combine({1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.6, 0.3, 0.1});
        c.require(std::abs(id3[0] - 0.6) <= 1e-12 && std::abs(id3[2] - 0.1) <= 1e-12,
                  "three-way uniform identity violated");
    });

    criterion(4, "forgettables match brute force over all short traces", 1.0, [](Check& c) {
        for (int checkpoints = 1; checkpoints <= 6; ++checkpoints) {
            LearningTrace trace;
            trace.checkpoints = checkpoints;
            for (int mask = 0; mask < (1 << checkpoints); ++mask) {
                std::vector<std::uint8_t> bits(checkpoints);
                for (int t = 0; t < checkpoints; ++t) bits[t] = (mask >> t) & 1;
                trace.entries.emplace_back("m" + std::to_string(mask), bits);
            }
            auto set = find_forgettables(trace);
            for (const auto& [id, bits] : trace.entries) {
                std::string s;
                for (auto b : bits) s.push_back(b ? '1' : '0');
                bool expected =
                    s.find('1') == std::string::npos || s.find("10") != std::string::npos;
                bool got = std::find(set.ids.begin(), set.ids.end(), id) != set.ids.end();
                c.require(got == expected, "trace " + s + " disagrees with brute force");
            }
        }
    });

    criterion(5, "analytic gradients match finite differences (plain and PoE)", 10.0,
              [](Check& c) {
                  Rng rng(424242);
                  double worst = 0.0;
                  for (int draw = 0; draw < 20; ++draw) {
                      TinyCase tc = make_tiny_case(rng);
                      bool with_weak = draw % 2 == 1;
                      double err =
                          max_relative_gradient_error(tc, with_weak ? &tc.weak : nullptr);
                      worst = std::max(worst, err);
                  }
                  c.require(worst < 1e-4, "max relative error " + std::to_string(worst));
                  char note[64];
                  std::snprintf(note, sizeof(note), "max rel err %.2e over 20 draws", worst);
                  c.info(note);
              });

    criterion(6, "bias emergence and PoE mitigation on the rho=0.9 corpus", 180.0,
              [](Check& c) {
                  const auto& runs = bias_runs();
                  std::vector<double> full_gap, low_gap, base_fullN, poe_fullN, base_all,
                      poe_all;
                  for (const auto& run : runs) {
                      double fe =
                          cell_accuracy(run.base_report, "Full", CollapsedLabel::entailment);
                      double fn = cell_accuracy(run.base_report, "Full",
                                                CollapsedLabel::non_entailment);
                      double le =
                          low_bin_accuracy(run.base_report, CollapsedLabel::entailment);
                      double ln =
                          low_bin_accuracy(run.base_report, CollapsedLabel::non_entailment);
                      full_gap.push_back(fe - fn);
                      low_gap.push_back(ln - le);
                      base_fullN.push_back(fn);
                      poe_fullN.push_back(cell_accuracy(run.poe_report, "Full",
                                                        CollapsedLabel::non_entailment));
                      base_all.push_back(run.base_report.overall_accuracy());
                      poe_all.push_back(run.poe_report.overall_accuracy());
                  }
                  double med_full_gap = median3(full_gap[0], full_gap[1], full_gap[2]);
                  double med_low_gap = median3(low_gap[0], low_gap[1], low_gap[2]);
                  double delta_fullN = median3(poe_fullN[0], poe_fullN[1], poe_fullN[2]) -
                                       median3(base_fullN[0], base_fullN[1], base_fullN[2]);
                  double overall_drop = median3(base_all[0], base_all[1], base_all[2]) -
                                        median3(poe_all[0], poe_all[1], poe_all[2]);
                  c.require(med_full_gap >= 0.20,
                            "full-bin entailment lead only " + std::to_string(med_full_gap));
                  c.require(med_low_gap >= 0.20, "low-bin non-entailment lead only " +
                                                     std::to_string(med_low_gap));
                  c.require(delta_fullN >= 0.05, "PoE full-bin non-entailment gain only " +
                                                     std::to_string(delta_fullN));
                  c.require(overall_drop < 0.10,
                            "overall accuracy dropped " + std::to_string(overall_drop));
                  char note[160];
                  std::snprintf(note, sizeof(note),
                                "gaps full %.2f low %.2f; PoE fullN %+.2f overall %+.2f",
                                med_full_gap, med_low_gap, delta_fullN, -overall_drop);
                  c.info(note);
              });

    criterion(7, "removing full-overlap minorities barely moves the finetuned model", 120.0,
              [](Check& c) {
                  std::vector<double> deltas;
                  auto scheme = seven_bin_scheme();
                  for (const auto& run : bias_runs()) {
                      auto forgettables = find_forgettables(run.baseline.trace);
                      Dataset subset = subset_by_ids(run.train_data, forgettables.ids);
                      TrainConfig ft;
                      ft.epochs = 3;
                      ft.lr = 1e-4;
                      ft.optimizer = TrainConfig::Optimizer::adam;
                      ft.dim = run.baseline.params.embedding.dim;
                      ft.seed = run.baseline.params.config.seed;
                      ft.preset = "finetune";
                      auto filter = EliminationFilter::from_bin("Full", scheme,
                                                                CollapsedLabel::non_entailment);
                      auto pruned = eliminate(subset, filter);
                      auto tuned_all = finetune_on_subset(run.baseline.params, subset, ft);
                      auto tuned_cut =
                          finetune_on_subset(run.baseline.params, pruned.remaining, ft);
                      double full_all = cell_accuracy(
                          evaluate(run.eval_data, predict(run.eval_data, tuned_all), scheme),
                          "Full", CollapsedLabel::non_entailment);
                      double full_cut = cell_accuracy(
                          evaluate(run.eval_data, predict(run.eval_data, tuned_cut), scheme),
                          "Full", CollapsedLabel::non_entailment);
                      deltas.push_back(std::abs(full_all - full_cut));
                  }
                  double med = median3(deltas[0], deltas[1], deltas[2]);
                  c.require(med < 0.10, "median delta " + std::to_string(med));
                  char note[64];
                  std::snprintf(note, sizeof(note), "median |delta| %.3f", med);
                  c.info(note);
              });

    criterion(8, "balanced sampling: exact cells, byte-exact reruns", 30.0, [](Check& c) {
        auto scheme = four_category_scheme();
        SynthConfig syn;
        syn.scheme = scheme;
        syn.cells = auto_fill_cells(scheme, 400, 0.0);
        syn.seed = 77;
        Dataset pool = generate(syn);
        Dataset sample = balanced_sample(pool, 16, scheme, LabelSpace::collapsed, 123);
        c.require(sample.size() == 32, "expected 32 instances");
        std::map<std::pair<std::string, CollapsedLabel>, int> cells;
        for (const auto& inst : sample.instances) {
            auto ratio = word_overlap(tokenize(inst.premise), tokenize(inst.hypothesis));
            cells[{assign_bin(ratio, scheme).label, collapse_label(inst.gold)}] += 1;
        }
        c.require(cells.size() == 8, "expected 8 occupied cells");
        for (const auto& [key, count] : cells)
            c.require(count == 4, "cell " + key.first + " has " + std::to_string(count));
        std::ostringstream a, b;
        serialize_dataset(sample, a);
        serialize_dataset(balanced_sample(pool, 16, scheme, LabelSpace::collapsed, 123), b);
        c.require(a.str() == b.str(), "same-seed rerun differs");
    });

    criterion(9, "prompt template byte-exactness and mask scoring", 1.0, [](Check& c) {
        RawInstance inst{"t", "A couple sits in the grass.", "People are outside.",
                         ThreeWayLabel::entailment, ""};
        std::string prompt = to_prompt(inst);
        c.require(prompt == "A couple sits in the grass. ? [MASK], People are outside.",
                  "canonical prompt mismatch: " + prompt);
        auto first = prompt.find("[MASK]");
        c.require(first != std::string::npos &&
                      prompt.find("[MASK]", first + 1) == std::string::npos,
                  "prompt must contain exactly one [MASK]");
        MaskScores scores{"t", {{"yes", 1.0}, {"maybe", 0.5}, {"no", 0.2}}};
        auto preds = score_mask({scores}, Verbalizer::standard(), false);
        double e0 = std::exp(1.0), e1 = std::exp(0.5), e2 = std::exp(0.2);
        double z = e0 + e1 + e2;
        const auto& p = preds.records[0].probs;
        c.require(std::abs(p[0] - e0 / z) <= 1e-9 && std::abs(p[1] - e1 / z) <= 1e-9 &&
                      std::abs(p[2] - e2 / z) <= 1e-9,
                  "softmax mismatch against the independent computation");
        auto collapsed = score_mask({scores}, Verbalizer::standard(), true);
        c.require(std::abs(collapsed.records[0].probs[1] - (e1 + e2) / z) <= 1e-9,
                  "collapsed mass mismatch");
    });

    criterion(10, "pipeline outputs re-run bit-identically from their metadata", 60.0,
              [](Check& c) {
                  Sandbox sb;
                  auto corpus = sb.path("corpus.jsonl");
                  auto model = sb.path("model.json");
                  auto trace = sb.path("trace.jsonl");
                  auto preds = sb.path("preds.jsonl");
                  auto report = sb.path("report.csv");
                  auto merged = sb.path("merged.csv");
                  auto log = sb.path("cli.log");

                  c.require(run_cli({"synth", "--n", "200", "--rho", "0.8", "--seed", "9",
                                     "--out", corpus},
                                    log) == 0,
                            "synth failed");
                  c.require(run_cli({"train", "--in", corpus, "--epochs", "2", "--seed", "4",
                                     "--out", model, "--trace", trace, "--eval", corpus,
                                     "--preds-out", preds},
                                    log) == 0,
                            "train failed");
                  c.require(
                      run_cli({"audit", "--in", corpus, "--preds", preds, "--out", report},
                              log) == 0,
                      "audit failed");
                  c.require(run_cli({"report", "--in", std::string("baseline=") + report,
                                     "--out", merged},
                                    log) == 0,
                            "report failed");
                  if (!c.ok) return;

                  std::vector<std::string> outputs = {corpus, model,  trace,
                                                      preds,  report, merged};
                  std::vector<std::string> snapshots;
                  for (const auto& path : outputs) snapshots.push_back(slurp(path));

                  // re-run every step from its own metadata record
                  for (const auto& primary : {corpus, model, report, merged}) {
                      auto meta = nlohmann::ordered_json::parse(slurp(primary + ".meta.json"));
                      std::vector<std::string> argv =
                          meta.at("argv").get<std::vector<std::string>>();
                      argv.erase(argv.begin());  // the recorded binary path
                      c.require(run_cli(argv, log) == 0,
                                "re-run from " + primary + ".meta.json failed");
                  }
                  for (std::size_t i = 0; i < outputs.size(); ++i)
                      c.require(slurp(outputs[i]) == snapshots[i],
                                outputs[i] + " changed across the metadata re-run");
              });

    if (g_failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criteria failed\n", g_failures);
    return 1;
}

#include "wobias/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <ostream>

#include "wobias/errors.hpp"
#include "wobias/rng.hpp"

#include <json.hpp>

namespace wobias {

namespace {

using ordered_json = nlohmann::ordered_json;

void validate_config(const TrainConfig& c, bool allow_zero_epochs) {
    if (c.epochs < (allow_zero_epochs ? 0 : 1))
        throw DataError("train config: epochs must be >= 1");
    if (!(c.lr > 0.0)) throw DataError("train config: lr must be > 0");
    if (c.batch < 1) throw DataError("train config: batch must be >= 1");
    if (c.dim < 1) throw DataError("train config: dim must be >= 1");
}

double logsumexp(const std::vector<double>& z) {
    double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
}

std::vector<double> softmax(std::vector<double> z) {
    double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double& v : z) {
        v = std::exp(v - m);
        s += v;
    }
    for (double& v : z) v /= s;
    return z;
}

struct ForwardState {
    std::vector<int> prem_rows, hyp_rows;  // in-vocab occurrences
    std::vector<double> u, v, feat, logits;
};

void run_forward(const TokenSeq& premise, const TokenSeq& hypothesis,
                 const ModelParams& p, const ModelParams* weak, ForwardState& st) {
    const int d = p.embedding.dim;
    const int k = p.n_labels();
    st.prem_rows.clear();
    st.hyp_rows.clear();
    for (const auto& t : premise) {
        int r = p.embedding.lookup(t);
        if (r >= 0) st.prem_rows.push_back(r);
    }
    for (const auto& t : hypothesis) {
        int r = p.embedding.lookup(t);
        if (r >= 0) st.hyp_rows.push_back(r);
    }
    st.u.assign(d, 0.0);
    st.v.assign(d, 0.0);
    for (int r : st.prem_rows) {
        const double* e = p.embedding.row(r);
        for (int j = 0; j < d; ++j) st.u[j] += e[j];
    }
    if (!st.prem_rows.empty())
        for (double& x : st.u) x /= static_cast<double>(st.prem_rows.size());
    for (int r : st.hyp_rows) {
        const double* e = p.embedding.row(r);
        for (int j = 0; j < d; ++j) st.v[j] += e[j];
    }
    if (!st.hyp_rows.empty())
        for (double& x : st.v) x /= static_cast<double>(st.hyp_rows.size());

    st.feat.resize(4 * d);
    for (int j = 0; j < d; ++j) {
        st.feat[j] = st.u[j];
        st.feat[d + j] = st.v[j];
        st.feat[2 * d + j] = std::abs(st.u[j] - st.v[j]);
        st.feat[3 * d + j] = st.u[j] * st.v[j];
    }
    st.logits.assign(k, 0.0);
    for (int c = 0; c < k; ++c) {
        const double* wrow = p.head_w.data() + static_cast<std::size_t>(c) * 4 * d;
        double z = p.head_b[c];
        for (int j = 0; j < 4 * d; ++j) z += wrow[j] * st.feat[j];
        st.logits[c] = z;
    }
    if (weak) {
        // Frozen weak expert: shift by its centered log-probs. Centering is a
        // no-op under softmax, so a uniform weak learner leaves the main
        // model's trajectory bit-identical to plain training.
        std::vector<double> pw = forward(premise, hypothesis, *weak);
        double mean = 0.0;
        std::vector<double> logpw(k);
        for (int c = 0; c < k; ++c) {
            logpw[c] = std::log(std::max(pw[c], 1e-12));
            mean += logpw[c];
        }
        mean /= k;
        for (int c = 0; c < k; ++c) st.logits[c] += logpw[c] - mean;
    }
}

}  // namespace

std::string_view to_string(TrainConfig::Optimizer o) {
    return o == TrainConfig::Optimizer::sgd ? "sgd" : "adam";
}

std::vector<double> embed_avg(const TokenSeq& tokens, const EmbeddingTable& table) {
    std::vector<double> out(table.dim, 0.0);
    int hits = 0;
    for (const auto& t : tokens) {
        int r = table.lookup(t);
        if (r < 0) continue;
        const double* e = table.row(r);
        for (int j = 0; j < table.dim; ++j) out[j] += e[j];
        ++hits;
    }
    if (hits > 0)
        for (double& x : out) x /= hits;
    return out;
}

std::vector<double> forward(const TokenSeq& premise, const TokenSeq& hypothesis,
                            const ModelParams& params) {
    ForwardState st;
    run_forward(premise, hypothesis, params, nullptr, st);
    return softmax(st.logits);
}

void Gradients::init_like(const ModelParams& p) {
    d_emb.assign(p.embedding.vectors.size(), 0.0);
    d_w.assign(p.head_w.size(), 0.0);
    d_b.assign(p.head_b.size(), 0.0);
}

namespace {

double instance_loss_grad(const RawInstance& inst, const ModelParams& p,
                          const ModelParams* weak, double scale, Gradients* grads,
                          ForwardState& st) {
    const int d = p.embedding.dim;
    const int k = p.n_labels();
    TokenSeq prem = tokenize(inst.premise);
    TokenSeq hyp = tokenize(inst.hypothesis);
    run_forward(prem, hyp, p, weak, st);
    int gold = gold_index(inst.gold, p.space);
    double loss = logsumexp(st.logits) - st.logits[gold];
    if (!grads) return loss;

    std::vector<double> dlogits = softmax(st.logits);
    dlogits[gold] -= 1.0;
    for (double& g : dlogits) g *= scale;

    std::vector<double> dfeat(4 * d, 0.0);
    for (int c = 0; c < k; ++c) {
        const double* wrow = p.head_w.data() + static_cast<std::size_t>(c) * 4 * d;
        double* dwrow = grads->d_w.data() + static_cast<std::size_t>(c) * 4 * d;
        grads->d_b[c] += dlogits[c];
        for (int j = 0; j < 4 * d; ++j) {
            dwrow[j] += dlogits[c] * st.feat[j];
            dfeat[j] += dlogits[c] * wrow[j];
        }
    }
    std::vector<double> du(d), dv(d);
    for (int j = 0; j < d; ++j) {
        double diff = st.u[j] - st.v[j];
        double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        du[j] = dfeat[j] + sgn * dfeat[2 * d + j] + st.v[j] * dfeat[3 * d + j];
        dv[j] = dfeat[d + j] - sgn * dfeat[2 * d + j] + st.u[j] * dfeat[3 * d + j];
    }
    if (!st.prem_rows.empty()) {
        double inv = 1.0 / static_cast<double>(st.prem_rows.size());
        for (int r : st.prem_rows) {
            double* g = grads->d_emb.data() + static_cast<std::size_t>(r) * d;
            for (int j = 0; j < d; ++j) g[j] += du[j] * inv;
        }
    }
    if (!st.hyp_rows.empty()) {
        double inv = 1.0 / static_cast<double>(st.hyp_rows.size());
        for (int r : st.hyp_rows) {
            double* g = grads->d_emb.data() + static_cast<std::size_t>(r) * d;
            for (int j = 0; j < d; ++j) g[j] += dv[j] * inv;
        }
    }
    return loss;
}

}  // namespace

double batch_loss(const std::vector<const RawInstance*>& batch, const ModelParams& params,
                  const ModelParams* weak) {
    ForwardState st;
    double total = 0.0;
    for (const RawInstance* inst : batch)
        total += instance_loss_grad(*inst, params, weak, 0.0, nullptr, st);
    return total / static_cast<double>(batch.size());
}

double batch_loss_and_gradient(const std::vector<const RawInstance*>& batch,
                               const ModelParams& params, Gradients& grads,
                               const ModelParams* weak) {
    grads.init_like(params);
    ForwardState st;
    double total = 0.0;
    double scale = 1.0 / static_cast<double>(batch.size());
    for (const RawInstance* inst : batch)
        total += instance_loss_grad(*inst, params, weak, scale, &grads, st);
    return total * scale;
}

ModelParams init_params(const Dataset& dataset, const TrainConfig& config, LabelSpace space) {
    ModelParams p;
    p.space = space;
    p.config = config;
    p.embedding.dim = config.dim;
    for (const auto& inst : dataset.instances) {
        for (const auto& text : {std::cref(inst.premise), std::cref(inst.hypothesis)}) {
            for (auto& tok : tokenize(text.get())) {
                if (p.embedding.index.emplace(tok, static_cast<int>(p.embedding.tokens.size()))
                        .second)
                    p.embedding.tokens.push_back(tok);
            }
        }
    }
    Rng rng = Rng::derive(config.seed, "embeddings");
    p.embedding.vectors.resize(p.embedding.tokens.size() *
                               static_cast<std::size_t>(config.dim));
    for (double& x : p.embedding.vectors) x = rng.uniform(-0.1, 0.1);
    int k = label_count(space);
    p.head_w.assign(static_cast<std::size_t>(k) * 4 * config.dim, 0.0);
    p.head_b.assign(k, 0.0);
    return p;
}

namespace {

struct AdamState {
    std::vector<double> m_emb, v_emb, m_w, v_w, m_b, v_b;
    long long t = 0;

    void init_like(const ModelParams& p) {
        m_emb.assign(p.embedding.vectors.size(), 0.0);
        v_emb.assign(p.embedding.vectors.size(), 0.0);
        m_w.assign(p.head_w.size(), 0.0);
        v_w.assign(p.head_w.size(), 0.0);
        m_b.assign(p.head_b.size(), 0.0);
        v_b.assign(p.head_b.size(), 0.0);
    }
};

void apply_update(std::vector<double>& theta, const std::vector<double>& grad,
                  std::vector<double>& m, std::vector<double>& v, double lr,
                  TrainConfig::Optimizer opt, long long t) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    if (opt == TrainConfig::Optimizer::sgd) {
        for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr * grad[i];
        return;
    }
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
        theta[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
}

}  // namespace

TrainResult train_from(const Dataset& dataset, const TrainConfig& config, ModelParams init,
                       const ModelParams* weak, std::vector<double>* record_loss) {
    validate_config(config, /*allow_zero_epochs=*/true);
    if (dataset.empty()) throw DataError("train: dataset is empty");
    if (weak && weak->space != init.space)
        throw DataError("train: weak learner label space differs from main model");

    TrainResult result;
    result.trace.checkpoints = config.epochs;
    for (const auto& inst : dataset.instances)
        result.trace.entries.emplace_back(inst.id, std::vector<std::uint8_t>{});

    Rng shuffle_rng = Rng::derive(config.seed, "shuffle");
    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    AdamState adam;
    if (config.optimizer == TrainConfig::Optimizer::adam) adam.init_like(init);
    Gradients grads;
    std::vector<const RawInstance*> batch;
    ForwardState st;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += config.batch) {
            batch.clear();
            std::size_t end = std::min(order.size(), start + config.batch);
            for (std::size_t i = start; i < end; ++i)
                batch.push_back(&dataset.instances[order[i]]);
            double loss = batch_loss_and_gradient(batch, init, grads, weak);
            if (!std::isfinite(loss))
                throw DataError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                ", aborting");
            if (record_loss) record_loss->push_back(loss);
            ++adam.t;
            apply_update(init.embedding.vectors, grads.d_emb, adam.m_emb, adam.v_emb,
                         config.lr, config.optimizer, adam.t);
            apply_update(init.head_w, grads.d_w, adam.m_w, adam.v_w, config.lr,
                         config.optimizer, adam.t);
            apply_update(init.head_b, grads.d_b, adam.m_b, adam.v_b, config.lr,
                         config.optimizer, adam.t);
        }
        // epoch-end checkpoint: correctness of the main model alone
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            const auto& inst = dataset.instances[i];
            run_forward(tokenize(inst.premise), tokenize(inst.hypothesis), init, nullptr, st);
            int argmax = static_cast<int>(
                std::max_element(st.logits.begin(), st.logits.end()) - st.logits.begin());
            result.trace.entries[i].second.push_back(
                argmax == gold_index(inst.gold, init.space) ? 1 : 0);
        }
    }
    init.config = config;
    result.params = std::move(init);
    return result;
}

TrainResult train(const Dataset& dataset, const TrainConfig& config, LabelSpace space) {
    validate_config(config, /*allow_zero_epochs=*/false);
    if (dataset.empty()) throw DataError("train: dataset is empty");
    return train_from(dataset, config, init_params(dataset, config, space));
}

PredictionFile predict(const Dataset& dataset, const ModelParams& params) {
    PredictionFile preds;
    preds.space = params.space;
    preds.records.reserve(dataset.size());
    for (const auto& inst : dataset.instances)
        preds.records.push_back(
            {inst.id, forward(tokenize(inst.premise), tokenize(inst.hypothesis), params)});
    return preds;
}

void write_trace(const LearningTrace& trace, std::ostream& out) {
    for (const auto& [id, bits] : trace.entries) {
        ordered_json j;
        j["id"] = id;
        j["correct"] = bits;
        out << j.dump() << '\n';
    }
}

LearningTrace read_trace(std::istream& in) {
    LearningTrace trace;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ordered_json rec = ordered_json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.contains("id") || !rec.contains("correct") ||
            !rec["correct"].is_array())
            throw DataError("trace line " + std::to_string(lineno) +
                            ": expected {\"id\":.., \"correct\":[0,1,..]}");
        std::vector<std::uint8_t> bits;
        for (const auto& b : rec["correct"]) {
            int v = b.get<int>();
            if (v != 0 && v != 1)
                throw DataError("trace line " + std::to_string(lineno) +
                                ": correctness bits must be 0 or 1");
            bits.push_back(static_cast<std::uint8_t>(v));
        }
        if (trace.entries.empty())
            trace.checkpoints = static_cast<int>(bits.size());
        else if (static_cast<int>(bits.size()) != trace.checkpoints)
            throw DataError("trace line " + std::to_string(lineno) +
                            ": checkpoint count differs from previous entries");
        trace.entries.emplace_back(rec["id"].get<std::string>(), std::move(bits));
    }
    return trace;
}

void save_model(const ModelParams& params, std::ostream& out) {
    ordered_json j;
    j["format"] = "wobias-model";
    j["format_version"] = 1;
    j["label_space"] = label_names(params.space);
    j["dim"] = params.embedding.dim;
    j["vocab"] = params.embedding.tokens;
    j["embeddings"] = params.embedding.vectors;
    j["head_w"] = params.head_w;
    j["head_b"] = params.head_b;
    ordered_json cfg;
    cfg["epochs"] = params.config.epochs;
    cfg["lr"] = params.config.lr;
    cfg["batch"] = params.config.batch;
    cfg["seed"] = params.config.seed;
    cfg["optimizer"] = std::string(to_string(params.config.optimizer));
    cfg["dim"] = params.config.dim;
    cfg["preset"] = params.config.preset;
    j["config"] = std::move(cfg);
    out << j.dump() << '\n';
}

ModelParams load_model(std::istream& in) {
    ordered_json j = ordered_json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.value("format", "") != "wobias-model")
        throw DataError("not a wobias model checkpoint");
    ModelParams p;
    auto names = j.at("label_space").get<std::vector<std::string>>();
    if (names == label_names(LabelSpace::three_way))
        p.space = LabelSpace::three_way;
    else if (names == label_names(LabelSpace::collapsed))
        p.space = LabelSpace::collapsed;
    else
        throw DataError("model checkpoint: unrecognized label space");
    p.embedding.dim = j.at("dim").get<int>();
    p.embedding.tokens = j.at("vocab").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < p.embedding.tokens.size(); ++i)
        p.embedding.index[p.embedding.tokens[i]] = static_cast<int>(i);
    p.embedding.vectors = j.at("embeddings").get<std::vector<double>>();
    p.head_w = j.at("head_w").get<std::vector<double>>();
    p.head_b = j.at("head_b").get<std::vector<double>>();
    if (p.embedding.vectors.size() !=
        p.embedding.tokens.size() * static_cast<std::size_t>(p.embedding.dim))
        throw DataError("model checkpoint: embedding shape mismatch");
    if (p.head_w.size() != p.head_b.size() * static_cast<std::size_t>(4 * p.embedding.dim))
        throw DataError("model checkpoint: head shape mismatch");
    const auto& cfg = j.at("config");
    p.config.epochs = cfg.at("epochs").get<int>();
    p.config.lr = cfg.at("lr").get<double>();
    p.config.batch = cfg.at("batch").get<int>();
    p.config.seed = cfg.at("seed").get<std::uint64_t>();
    p.config.optimizer = cfg.at("optimizer").get<std::string>() == "adam"
                             ? TrainConfig::Optimizer::adam
                             : TrainConfig::Optimizer::sgd;
    p.config.dim = cfg.at("dim").get<int>();
    p.config.preset = cfg.at("preset").get<std::string>();
    return p;
}

}  // namespace wobias

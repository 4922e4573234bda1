#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "wobias/audit.hpp"
#include "wobias/corpus.hpp"

namespace wobias {

struct EmbeddingTable {
    std::vector<std::string> tokens;               // row -> token
    std::unordered_map<std::string, int> index;    // token -> row
    std::vector<double> vectors;                   // |V| x dim, row-major
    int dim = 0;

    int lookup(const std::string& token) const {
        auto it = index.find(token);
        return it == index.end() ? -1 : it->second;  // OOV tokens are skipped
    }
    double* row(int i) { return vectors.data() + static_cast<std::size_t>(i) * dim; }
    const double* row(int i) const {
        return vectors.data() + static_cast<std::size_t>(i) * dim;
    }
};

struct TrainConfig {
    int epochs = 3;
    double lr = 0.05;
    int batch = 32;
    std::uint64_t seed = 0;
    enum class Optimizer { sgd, adam } optimizer = Optimizer::sgd;
    int dim = 32;
    std::string preset = "base";

    // The paper-style transformer fine-tuning preset, kept for documentation
    // parity; desk-scale runs use the defaults above.
    static TrainConfig plm_finetune() {
        TrainConfig c;
        c.epochs = 3;
        c.lr = 2e-5;
        c.batch = 32;
        c.optimizer = Optimizer::adam;
        c.preset = "plm-finetune";
        return c;
    }
};

std::string_view to_string(TrainConfig::Optimizer o);

// Sentence embedding averaged over in-vocabulary tokens; empty or all-OOV
// input yields the zero vector.
std::vector<double> embed_avg(const TokenSeq& tokens, const EmbeddingTable& table);

struct ModelParams {
    EmbeddingTable embedding;
    LabelSpace space = LabelSpace::collapsed;
    std::vector<double> head_w;  // k x 4*dim, row-major
    std::vector<double> head_b;  // k
    TrainConfig config;          // provenance: how these params were produced

    int n_labels() const { return static_cast<int>(head_b.size()); }
    int feature_dim() const { return 4 * embedding.dim; }
};

// softmax(W [u; v; |u-v|; u*v] + b) with u, v the averaged premise and
// hypothesis embeddings.
std::vector<double> forward(const TokenSeq& premise, const TokenSeq& hypothesis,
                            const ModelParams& params);

// Per-example correctness at every epoch-end checkpoint, in dataset order.
struct LearningTrace {
    std::vector<std::pair<std::string, std::vector<std::uint8_t>>> entries;
    int checkpoints = 0;
};

void write_trace(const LearningTrace& trace, std::ostream& out);
LearningTrace read_trace(std::istream& in);

struct TrainResult {
    ModelParams params;
    LearningTrace trace;
};

// Vocabulary from the dataset in first-seen order; embeddings uniform in
// [-0.1, 0.1] from the seed, head zero-initialized.
ModelParams init_params(const Dataset& dataset, const TrainConfig& config, LabelSpace space);

// Mini-batch gradient descent on the cross-entropy; per-example correctness
// recorded at each epoch end. Bit-identical results for a fixed seed.
TrainResult train(const Dataset& dataset, const TrainConfig& config, LabelSpace space);

PredictionFile predict(const Dataset& dataset, const ModelParams& params);

void save_model(const ModelParams& params, std::ostream& out);
ModelParams load_model(std::istream& in);

// --- training internals shared with the debias module and the gradient
// --- check oracle

struct Gradients {
    std::vector<double> d_emb;  // matches embedding.vectors
    std::vector<double> d_w;
    std::vector<double> d_b;
    void init_like(const ModelParams& p);
};

// Mean cross-entropy over the batch. When `weak` is given, the per-example
// logits are shifted by the centered log-probabilities of the frozen weak
// model before the softmax (product-of-experts combination; centering is a
// softmax-invariant that keeps the combined logits in the main model's
// scale). Gradients flow to `params` only.
double batch_loss(const std::vector<const RawInstance*>& batch, const ModelParams& params,
                  const ModelParams* weak = nullptr);
double batch_loss_and_gradient(const std::vector<const RawInstance*>& batch,
                               const ModelParams& params, Gradients& grads,
                               const ModelParams* weak = nullptr);

// Continues training from `init`; used by the fine-tuning and PoE paths.
// `record_loss`, when non-null, receives the mean batch loss per step.
TrainResult train_from(const Dataset& dataset, const TrainConfig& config, ModelParams init,
                       const ModelParams* weak = nullptr,
                       std::vector<double>* record_loss = nullptr);

}  // namespace wobias

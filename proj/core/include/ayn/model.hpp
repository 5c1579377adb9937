#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ayn/data.hpp"
#include "ayn/decoders.hpp"
#include "ayn/embedding.hpp"
#include "ayn/encoders.hpp"
#include "ayn/fusion.hpp"
#include "ayn/metrics.hpp"
#include "ayn/optim.hpp"
#include "ayn/rng.hpp"

namespace ayn {

enum class EncoderKind { bow, cnn, lstm, gru };
enum class DecoderKind { classify, generate };

EncoderKind encoder_kind_from_string(const std::string& name);
std::string to_string(EncoderKind kind);
DecoderKind decoder_kind_from_string(const std::string& name);
std::string to_string(DecoderKind kind);

/// Everything a run needs. The seed is copied into every artifact the
/// run writes (checkpoint, log, predictions, report).
struct RunConfig {
    EncoderKind encoder = EncoderKind::lstm;
    DecoderKind decoder = DecoderKind::classify;

    EmbeddingMode embedding_mode = EmbeddingMode::learned;
    std::string embedding_path;  // pretrained modes only
    std::size_t embed_dim = 300;
    std::size_t hidden_dim = 500;

    std::size_t cnn_views = 3;
    std::size_t cnn_feature_maps = 500;
    CnnActivation cnn_activation = CnnActivation::tanh;
    CnnAggregation cnn_aggregation = CnnAggregation::sum_pool;

    FusionMode fusion = FusionMode::concat;
    bool normalize_visual = false;

    std::size_t top_k = 2000;
    AnswerSelection answer_selection = AnswerSelection::random;
    GenerationConfig generation;

    OptimizerConfig optimizer;
    std::size_t epochs = 20;
    std::size_t batch_size = 128;
    double validation_fraction = 0.1;
    std::size_t smoothing_window = 3;  // must be odd
    std::uint64_t seed = 7;
};

/// Rejects inconsistent settings up front (zero dims, even smoothing
/// windows, generation with a non-lstm encoder or a pretrained table).
void validate(const RunConfig& config);

/// One trained (or freshly initialized) model plus everything needed to
/// run it: vocabulary, answer classes and the expected feature width.
struct VqaModel {
    RunConfig config;
    std::size_t feature_dim = 0;

    EmbeddingTable embedding;
    AnswerVocabulary answers;

    std::optional<LstmParams> lstm;  // encoder (classify) or shared cell (generate)
    std::optional<GruParams> gru;
    std::optional<TextCnnParams> cnn;
    std::optional<FusionParams> fusion;
    Tensor head_w;
    Tensor head_b;

    /// Stable, named listing; optimizer and checkpoint both rely on it.
    std::vector<std::pair<std::string, Tensor*>> named_parameters();
    std::vector<Tensor*> parameters();
};

/// Glorot-initialized model sized for the given corpus: vocabulary and
/// answer classes come from `train`, the feature width from `features`.
VqaModel build_model(const RunConfig& config, const std::vector<QAInstance>& train,
                     const VisualFeatureStore& features);

struct EpochStats {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_accuracy = 0.0;   // fraction in [0, 1]
    double smoothed_accuracy = 0.0;
};

struct TrainLog {
    std::uint64_t seed = 0;
    std::vector<EpochStats> epochs;
    std::size_t best_epoch = 0;  // 1-based
    std::size_t skipped_out_of_vocabulary = 0;  // answers outside the class list
    std::size_t skipped_missing_feature = 0;    // images without feature vectors
};

/// Full training run: shuffled minibatches on the head split, one
/// validation pass per epoch, box-filter smoothing, and a rollback to
/// the best epoch's parameters. Deterministic given config.seed.
TrainLog train_model(VqaModel& model, const std::vector<QAInstance>& train,
                     const VisualFeatureStore& features);

/// Loss of one instance under the current parameters (no update); the
/// same computation the trainer differentiates. With
/// `accumulate_gradients` the backward pass also runs, adding into each
/// parameter's grad buffer — the shape finite-difference checks expect.
double instance_loss(VqaModel& model, const std::vector<std::string>& question_tokens,
                     const std::vector<double>& feature, const AnswerSet& target,
                     bool accumulate_gradients = false);

struct Prediction {
    std::string id;
    std::string answer;  // canonical "a, b" form; empty when unanswerable
};

/// Runs the model on one question + feature vector.
AnswerSet predict_instance(VqaModel& model, const std::vector<std::string>& question_tokens,
                           const std::vector<double>& feature);

/// Batch prediction; instances whose image has no feature vector get an
/// empty answer and are counted in `missing_features`.
std::vector<Prediction> predict_corpus(VqaModel& model, const std::vector<QAInstance>& instances,
                                       const VisualFeatureStore& features,
                                       std::size_t* missing_features = nullptr);

// --- artifacts ---

void save_checkpoint(const VqaModel& model, const std::string& path);
VqaModel load_checkpoint(const std::string& path);

void save_train_log(const TrainLog& log, const std::string& path);
TrainLog load_train_log(const std::string& path);

void save_predictions_jsonl(const std::vector<Prediction>& predictions, const std::string& path);
std::vector<Prediction> load_predictions_jsonl(const std::string& path);

/// Centered box filter with radius (window-1)/2; the window clips at
/// the ends. Window must be odd.
std::vector<double> box_filter(const std::vector<double>& values, std::size_t window);

}  // namespace ayn

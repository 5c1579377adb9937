#include "ayn/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "ayn/error.hpp"
#include "ayn/graph.hpp"
#include "json.hpp"

namespace ayn {

using ordered_json = nlohmann::ordered_json;

EncoderKind encoder_kind_from_string(const std::string& name) {
    if (name == "bow") return EncoderKind::bow;
    if (name == "cnn") return EncoderKind::cnn;
    if (name == "lstm") return EncoderKind::lstm;
    if (name == "gru") return EncoderKind::gru;
    throw Error("invalid-value", "unknown encoder '" + name + "' (expected bow, cnn, lstm or gru)");
}

std::string to_string(EncoderKind kind) {
    switch (kind) {
        case EncoderKind::bow: return "bow";
        case EncoderKind::cnn: return "cnn";
        case EncoderKind::lstm: return "lstm";
        case EncoderKind::gru: return "gru";
    }
    throw Error("invalid-value", "unrepresentable encoder kind");
}

DecoderKind decoder_kind_from_string(const std::string& name) {
    if (name == "classify") return DecoderKind::classify;
    if (name == "generate") return DecoderKind::generate;
    throw Error("invalid-value", "unknown decoder '" + name + "' (expected classify or generate)");
}

std::string to_string(DecoderKind kind) {
    return kind == DecoderKind::classify ? "classify" : "generate";
}

void validate(const RunConfig& c) {
    if (c.embed_dim == 0) throw Error("invalid-value", "config: embed_dim must be positive");
    if (c.batch_size == 0) throw Error("invalid-value", "config: batch_size must be positive");
    if (c.smoothing_window == 0 || c.smoothing_window % 2 == 0) {
        throw Error("invalid-value", "config: smoothing_window must be odd");
    }
    const bool recurrent = c.encoder == EncoderKind::lstm || c.encoder == EncoderKind::gru ||
                           c.decoder == DecoderKind::generate ||
                           (c.encoder == EncoderKind::cnn && c.cnn_aggregation == CnnAggregation::rnn);
    if (recurrent && c.hidden_dim == 0) throw Error("invalid-value", "config: hidden_dim must be positive");
    if (c.encoder == EncoderKind::cnn && (c.cnn_views == 0 || c.cnn_feature_maps == 0)) {
        throw Error("invalid-value", "config: cnn needs at least one view and one feature map");
    }
    if (c.decoder == DecoderKind::classify && c.top_k == 0) {
        throw Error("invalid-value", "config: top_k must be positive");
    }
    if (c.decoder == DecoderKind::generate) {
        if (c.encoder != EncoderKind::lstm) {
            throw Error("invalid-value",
                        "config: the generation decoder shares one lstm cell with the question reader; "
                        "encoder must be lstm");
        }
        if (c.embedding_mode != EmbeddingMode::learned) {
            throw Error("invalid-value",
                        "config: generation emits words from the learned vocabulary; "
                        "embedding mode must be learned");
        }
        if (c.generation.max_length == 0) {
            throw Error("invalid-value", "config: generation max_length must be positive");
        }
    }
    if (c.embedding_mode != EmbeddingMode::learned && c.embedding_path.empty()) {
        throw Error("invalid-value", "config: pretrained embedding modes need embedding_path");
    }
}

std::vector<std::pair<std::string, Tensor*>> VqaModel::named_parameters() {
    std::vector<std::pair<std::string, Tensor*>> out;
    if (embedding.vocab_size() > 0 && embedding.trainable()) {
        out.emplace_back("embedding.weights", &embedding.weights());
    }
    auto add_gate = [&](const std::string& prefix, GateParams& gate) {
        out.emplace_back(prefix + ".w_input", &gate.w_input);
        out.emplace_back(prefix + ".w_hidden", &gate.w_hidden);
        out.emplace_back(prefix + ".bias", &gate.bias);
    };
    auto add_lstm = [&](const std::string& prefix, LstmParams& p) {
        add_gate(prefix + ".input_gate", p.input_gate);
        add_gate(prefix + ".forget_gate", p.forget_gate);
        add_gate(prefix + ".output_gate", p.output_gate);
        add_gate(prefix + ".candidate", p.candidate);
    };
    if (lstm) {
        add_lstm(config.decoder == DecoderKind::generate ? "decoder.lstm" : "encoder.lstm", *lstm);
    }
    if (gru) {
        add_gate("encoder.gru.reset_gate", gru->reset_gate);
        add_gate("encoder.gru.update_gate", gru->update_gate);
        add_gate("encoder.gru.candidate", gru->candidate);
    }
    if (cnn) {
        for (std::size_t i = 0; i < cnn->views.size(); ++i) {
            const std::string prefix = "encoder.cnn.view" + std::to_string(i);
            out.emplace_back(prefix + ".kernel", &cnn->views[i].kernel);
            out.emplace_back(prefix + ".bias", &cnn->views[i].bias);
            if (cnn->views[i].rnn) add_lstm(prefix + ".rnn", *cnn->views[i].rnn);
        }
    }
    if (fusion && fusion->w_ve) out.emplace_back("fusion.w_ve", &*fusion->w_ve);
    out.emplace_back("head.w", &head_w);
    out.emplace_back("head.b", &head_b);
    return out;
}

std::vector<Tensor*> VqaModel::parameters() {
    std::vector<Tensor*> out;
    for (auto& [name, tensor] : named_parameters()) out.push_back(tensor);
    return out;
}

namespace {

/// Sorted unique word list; generation also needs the answer labels and
/// the end marker as emittable vocabulary entries.
std::vector<std::string> collect_vocabulary(const std::vector<QAInstance>& train, bool with_answers) {
    std::set<std::string> words;
    for (const auto& inst : train) {
        words.insert(inst.question_tokens.begin(), inst.question_tokens.end());
        if (with_answers) {
            for (const auto& set : inst.answers) words.insert(set.begin(), set.end());
        }
    }
    if (with_answers) words.insert(kEndToken);
    return {words.begin(), words.end()};
}

/// Allocates and glorot-initializes every parameter tensor for the
/// configured architecture. Consumes rng in a fixed order so runs with
/// the same seed produce identical weights.
void init_parameters(VqaModel& m, Rng& rng) {
    const RunConfig& c = m.config;
    auto glorot_matrix = [&](std::size_t rows, std::size_t cols) {
        Tensor t = Tensor::zeros({rows, cols});
        init_uniform_glorot(t, cols, rows, rng);
        return t;
    };
    if (c.decoder == DecoderKind::classify) {
        if (m.answers.size() == 0) throw Error("state", "model: classify decoder has no answer classes");
        std::size_t q_dim = 0;
        switch (c.encoder) {
            case EncoderKind::bow:
                q_dim = m.embedding.dim();
                break;
            case EncoderKind::lstm:
                m.lstm = LstmParams::init(m.embedding.dim(), c.hidden_dim, rng);
                q_dim = c.hidden_dim;
                break;
            case EncoderKind::gru:
                m.gru = GruParams::init(m.embedding.dim(), c.hidden_dim, rng);
                q_dim = c.hidden_dim;
                break;
            case EncoderKind::cnn:
                m.cnn = TextCnnParams::init(m.embedding.dim(), c.cnn_views, c.cnn_feature_maps,
                                            c.cnn_aggregation, rng);
                m.cnn->activation = c.cnn_activation;
                q_dim = m.cnn->output_dim();
                break;
        }
        m.fusion = FusionParams::init(c.fusion, q_dim, m.feature_dim, c.normalize_visual, rng);
        const std::size_t fused_dim = m.fusion->output_dim(q_dim, m.feature_dim);
        m.head_w = glorot_matrix(m.answers.size(), fused_dim);
        m.head_b = Tensor::zeros({m.answers.size()});
    } else {
        m.lstm = LstmParams::init(m.feature_dim + m.embedding.dim(), c.hidden_dim, rng);
        m.head_w = glorot_matrix(m.embedding.vocab_size(), c.hidden_dim);
        m.head_b = Tensor::zeros({m.embedding.vocab_size()});
    }
}

/// Differentiable loss of one example. Empty only when a classify
/// target falls outside the class vocabulary.
std::optional<NodeId> forward_loss(Graph& g, VqaModel& m, const std::vector<std::string>& tokens,
                                   const std::vector<double>& feature, const AnswerSet& target) {
    if (feature.size() != m.feature_dim) {
        throw Error("shape", "model: feature has " + std::to_string(feature.size()) +
                                 " dimensions, expected " + std::to_string(m.feature_dim));
    }
    const NodeId visual = g.input(Tensor::vector(feature));
    const bool train_embedding = m.embedding.trainable();

    if (m.config.decoder == DecoderKind::classify) {
        const auto target_index = m.answers.index_of(answer_set_to_string(target));
        if (!target_index) return std::nullopt;
        const NodeId emb =
            train_embedding ? g.param(m.embedding.weights()) : g.input(m.embedding.weights());
        std::vector<NodeId> rows;
        rows.reserve(tokens.size());
        for (const auto& tok : tokens) rows.push_back(g.row(emb, m.embedding.index_of(tok)));
        NodeId q = 0;
        switch (m.config.encoder) {
            case EncoderKind::bow:
                q = encode_bow(g, rows);
                break;
            case EncoderKind::lstm: {
                const LstmParamIds ids = add_to_graph(g, *m.lstm, true);
                q = encode_sequence(g, rows, CellKind::lstm, &ids, nullptr);
                break;
            }
            case EncoderKind::gru: {
                const GruParamIds ids = add_to_graph(g, *m.gru, true);
                q = encode_sequence(g, rows, CellKind::gru, nullptr, &ids);
                break;
            }
            case EncoderKind::cnn:
                q = encode_cnn(g, rows, *m.cnn, true);
                break;
        }
        const FusionParamIds fusion_ids = add_to_graph(g, *m.fusion, true);
        const NodeId fused = fuse(g, q, visual, fusion_ids);
        const NodeId logits = g.add(g.matvec(g.param(m.head_w), fused), g.param(m.head_b));
        return g.cross_entropy(logits, *target_index);
    }

    // Generation: one shared cell reads [question, answer, $], every step
    // seeing [visual ; embedding(current word)]; loss covers the answer
    // positions and the end marker.
    const TrainingSequence seq = training_targets(tokens, target);
    const NodeId emb = g.param(m.embedding.weights());
    const LstmParamIds ids = add_to_graph(g, *m.lstm, true);
    const NodeId head_w = g.param(m.head_w);
    const NodeId head_b = g.param(m.head_b);
    RecurrentStateIds state = zero_recurrent_state(g, m.config.hidden_dim);
    std::vector<NodeId> losses;
    for (std::size_t t = 0; t + 1 < seq.input.size(); ++t) {
        const std::vector<NodeId> parts{visual, g.row(emb, m.embedding.index_of(seq.input[t]))};
        state = lstm_step(g, g.concat(parts), state, ids);
        if (seq.mask[t + 1] == 1) {
            const NodeId logits = g.add(g.matvec(head_w, state.h), head_b);
            losses.push_back(g.cross_entropy(logits, m.embedding.index_of(seq.input[t + 1])));
        }
    }
    return g.sum(losses);
}

}  // namespace

VqaModel build_model(const RunConfig& config, const std::vector<QAInstance>& train,
                     const VisualFeatureStore& features) {
    validate(config);
    if (train.empty()) throw Error("invalid-value", "build_model: no training instances");
    VqaModel m;
    m.config = config;
    m.feature_dim = features.dim();
    Rng rng(config.seed);
    if (config.embedding_mode == EmbeddingMode::learned) {
        m.embedding = EmbeddingTable::learned(
            collect_vocabulary(train, config.decoder == DecoderKind::generate), config.embed_dim, rng);
    } else {
        m.embedding = EmbeddingTable::pretrained(config.embedding_path, config.embedding_mode);
        m.config.embed_dim = m.embedding.dim();
    }
    if (config.decoder == DecoderKind::classify) {
        m.answers = build_answer_classes(train, config.top_k);
    }
    init_parameters(m, rng);
    return m;
}

double instance_loss(VqaModel& model, const std::vector<std::string>& question_tokens,
                     const std::vector<double>& feature, const AnswerSet& target,
                     bool accumulate_gradients) {
    Graph g;
    const auto loss = forward_loss(g, model, question_tokens, feature, target);
    if (!loss) throw Error("invalid-value", "instance_loss: answer is not in the class vocabulary");
    if (accumulate_gradients) g.backward(*loss);
    return g.scalar_value(*loss);
}

std::vector<double> box_filter(const std::vector<double>& values, std::size_t window) {
    if (window == 0 || window % 2 == 0) throw Error("invalid-value", "box filter window must be odd");
    const std::size_t radius = (window - 1) / 2;
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::size_t lo = i > radius ? i - radius : 0;
        const std::size_t hi = std::min(values.size() - 1, i + radius);
        double sum = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) sum += values[k];
        out[i] = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
}

TrainLog train_model(VqaModel& model, const std::vector<QAInstance>& train,
                     const VisualFeatureStore& features) {
    const RunConfig& c = model.config;
    validate(c);
    if (c.epochs == 0) throw Error("invalid-value", "train: epochs must be positive");
    if (features.dim() != model.feature_dim) {
        throw Error("shape", "train: feature store has dimension " + std::to_string(features.dim()) +
                                 ", model expects " + std::to_string(model.feature_dim));
    }
    auto [head, tail] = split_validation(train, c.validation_fraction);

    TrainLog log;
    log.seed = c.seed;
    Optimizer optimizer(c.optimizer);
    const std::vector<Tensor*> params = model.parameters();

    Rng select_rng = Rng::derive(c.seed, 101);
    const std::size_t radius = (c.smoothing_window - 1) / 2;
    std::vector<double> accuracies;
    // The smoothed score of epoch j is final once epoch j+radius exists,
    // so only radius+1 parameter snapshots are alive at any time.
    std::deque<std::vector<std::vector<double>>> snapshots;
    std::vector<std::vector<double>> best_params;
    double best_smoothed = -1.0;
    std::size_t best_epoch = 0;

    auto finalize = [&](std::size_t j) {
        const std::size_t lo = j > radius ? j - radius : 0;
        const std::size_t hi = std::min(accuracies.size() - 1, j + radius);
        double sum = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) sum += accuracies[k];
        const double smoothed = sum / static_cast<double>(hi - lo + 1);
        if (smoothed > best_smoothed) {
            best_smoothed = smoothed;
            best_epoch = j + 1;
            best_params = snapshots.front();
        }
        snapshots.pop_front();
    };

    struct Example {
        const QAInstance* instance;
        const std::vector<double>* feature;
        AnswerSet target;
    };

    for (std::size_t epoch = 1; epoch <= c.epochs; ++epoch) {
        Rng shuffle_rng = Rng::derive(c.seed, 1000 + epoch);
        std::vector<std::size_t> order(head.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        for (std::size_t start = 0; start < order.size(); start += c.batch_size) {
            const std::size_t end = std::min(order.size(), start + c.batch_size);
            std::vector<Example> batch;
            for (std::size_t k = start; k < end; ++k) {
                const QAInstance& inst = head[order[k]];
                if (!features.has(inst.image_id)) {
                    ++log.skipped_missing_feature;
                    continue;
                }
                for (auto& set : select_training_answer(inst, c.answer_selection, select_rng)) {
                    if (c.decoder == DecoderKind::classify &&
                        !model.answers.index_of(answer_set_to_string(set))) {
                        ++log.skipped_out_of_vocabulary;
                        continue;
                    }
                    batch.push_back({&inst, &features.get(inst.image_id), std::move(set)});
                }
            }
            if (batch.empty()) continue;
            const double inverse_count = 1.0 / static_cast<double>(batch.size());
            for (const auto& example : batch) {
                Graph g;
                const auto loss =
                    forward_loss(g, model, example.instance->question_tokens, *example.feature,
                                 example.target);
                const double raw = g.scalar_value(*loss);
                if (!std::isfinite(raw)) {
                    throw Error("diverged", "train: non-finite loss at epoch " + std::to_string(epoch) +
                                                " on instance " + example.instance->id +
                                                "; lower the learning rate or check the features");
                }
                loss_sum += raw;
                ++loss_count;
                g.backward(g.scalar_affine(*loss, inverse_count, 0.0));
            }
            optimizer.step(params);
            for (Tensor* t : params) t->zero_grad();
        }

        std::size_t correct = 0;
        for (const auto& inst : tail) {
            if (!features.has(inst.image_id)) continue;
            const AnswerSet predicted =
                predict_instance(model, inst.question_tokens, features.get(inst.image_id));
            if (answer_set_to_string(predicted) == answer_set_to_string(inst.answers[0])) ++correct;
        }
        const double accuracy =
            tail.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(tail.size());
        accuracies.push_back(accuracy);
        log.epochs.push_back({epoch, loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0,
                              accuracy, 0.0});

        std::vector<std::vector<double>> snap;
        snap.reserve(params.size());
        for (const Tensor* t : params) snap.push_back(t->data);
        snapshots.push_back(std::move(snap));
        if (epoch >= 1 + radius) finalize(epoch - 1 - radius);
    }
    for (std::size_t j = c.epochs > radius ? c.epochs - radius : 0; j < c.epochs; ++j) finalize(j);

    for (std::size_t i = 0; i < params.size(); ++i) params[i]->data = best_params[i];
    log.best_epoch = best_epoch;
    const std::vector<double> smoothed = box_filter(accuracies, c.smoothing_window);
    for (std::size_t i = 0; i < log.epochs.size(); ++i) log.epochs[i].smoothed_accuracy = smoothed[i];
    return log;
}

AnswerSet predict_instance(VqaModel& model, const std::vector<std::string>& question_tokens,
                           const std::vector<double>& feature) {
    if (feature.size() != model.feature_dim) {
        throw Error("shape", "predict: feature has " + std::to_string(feature.size()) +
                                 " dimensions, checkpoint expects " + std::to_string(model.feature_dim));
    }
    if (model.config.decoder == DecoderKind::classify) {
        Tensor q;
        switch (model.config.encoder) {
            case EncoderKind::bow:
                q = encode_bow(model.embedding.embed_tokens(question_tokens));
                break;
            case EncoderKind::lstm:
                q = encode_sequence(question_tokens, model.embedding, CellKind::lstm, &*model.lstm,
                                    nullptr);
                break;
            case EncoderKind::gru:
                q = encode_sequence(question_tokens, model.embedding, CellKind::gru, nullptr,
                                    &*model.gru);
                break;
            case EncoderKind::cnn:
                q = encode_cnn(model.embedding.embed_tokens(question_tokens), *model.cnn);
                break;
        }
        const Tensor fused = fuse(q, Tensor::vector(feature), *model.fusion);
        const ClassifierOutput out = classify_answer(fused, model.head_w, model.head_b);
        return normalize_answer_set(model.answers.class_at(out.class_index));
    }
    GenerationModel generator;
    generator.table = &model.embedding;
    generator.lstm = &*model.lstm;
    generator.head_w = &model.head_w;
    generator.head_b = &model.head_b;
    const GeneratedAnswer out =
        generate_answer_sequence(question_tokens, Tensor::vector(feature), generator,
                                 model.config.generation);
    AnswerSet set = out.words;
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    return set;
}

std::vector<Prediction> predict_corpus(VqaModel& model, const std::vector<QAInstance>& instances,
                                       const VisualFeatureStore& features,
                                       std::size_t* missing_features) {
    if (features.dim() != model.feature_dim) {
        throw Error("shape", "predict: feature store has dimension " + std::to_string(features.dim()) +
                                 ", checkpoint expects " + std::to_string(model.feature_dim));
    }
    std::vector<Prediction> out;
    out.reserve(instances.size());
    std::size_t missing = 0;
    for (const auto& inst : instances) {
        if (!features.has(inst.image_id)) {
            ++missing;
            out.push_back({inst.id, ""});
            continue;
        }
        const AnswerSet set =
            predict_instance(model, inst.question_tokens, features.get(inst.image_id));
        out.push_back({inst.id, answer_set_to_string(set)});
    }
    if (missing_features) *missing_features = missing;
    return out;
}

// --- artifact serialization ---

namespace {

ordered_json tensor_to_json(const Tensor& t) {
    return ordered_json{{"shape", t.shape}, {"data", t.data}};
}

Tensor tensor_from_json(const ordered_json& j) {
    return Tensor(j.at("shape").get<std::vector<std::size_t>>(),
                  j.at("data").get<std::vector<double>>());
}

ordered_json config_to_json(const RunConfig& c) {
    ordered_json j;
    j["encoder"] = to_string(c.encoder);
    j["decoder"] = to_string(c.decoder);
    j["embedding_mode"] = to_string(c.embedding_mode);
    j["embedding_path"] = c.embedding_path;
    j["embed_dim"] = c.embed_dim;
    j["hidden_dim"] = c.hidden_dim;
    j["cnn_views"] = c.cnn_views;
    j["cnn_feature_maps"] = c.cnn_feature_maps;
    j["cnn_activation"] = to_string(c.cnn_activation);
    j["cnn_aggregation"] = to_string(c.cnn_aggregation);
    j["fusion"] = to_string(c.fusion);
    j["normalize_visual"] = c.normalize_visual;
    j["top_k"] = c.top_k;
    j["answer_selection"] = to_string(c.answer_selection);
    j["generation"] = ordered_json{{"max_length", c.generation.max_length}, {"dedup", c.generation.dedup}};
    j["optimizer"] = ordered_json{{"kind", to_string(c.optimizer.kind)},
                                  {"learning_rate", c.optimizer.learning_rate},
                                  {"beta1", c.optimizer.beta1},
                                  {"beta2", c.optimizer.beta2},
                                  {"epsilon", c.optimizer.epsilon},
                                  {"momentum", c.optimizer.momentum}};
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["validation_fraction"] = c.validation_fraction;
    j["smoothing_window"] = c.smoothing_window;
    j["seed"] = c.seed;
    return j;
}

RunConfig config_from_json(const ordered_json& j) {
    RunConfig c;
    c.encoder = encoder_kind_from_string(j.at("encoder").get<std::string>());
    c.decoder = decoder_kind_from_string(j.at("decoder").get<std::string>());
    c.embedding_mode = embedding_mode_from_string(j.at("embedding_mode").get<std::string>());
    c.embedding_path = j.at("embedding_path").get<std::string>();
    c.embed_dim = j.at("embed_dim").get<std::size_t>();
    c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    c.cnn_views = j.at("cnn_views").get<std::size_t>();
    c.cnn_feature_maps = j.at("cnn_feature_maps").get<std::size_t>();
    c.cnn_activation = cnn_activation_from_string(j.at("cnn_activation").get<std::string>());
    c.cnn_aggregation = cnn_aggregation_from_string(j.at("cnn_aggregation").get<std::string>());
    c.fusion = fusion_mode_from_string(j.at("fusion").get<std::string>());
    c.normalize_visual = j.at("normalize_visual").get<bool>();
    c.top_k = j.at("top_k").get<std::size_t>();
    c.answer_selection = answer_selection_from_string(j.at("answer_selection").get<std::string>());
    c.generation.max_length = j.at("generation").at("max_length").get<std::size_t>();
    c.generation.dedup = j.at("generation").at("dedup").get<bool>();
    const auto& opt = j.at("optimizer");
    c.optimizer.kind = optimizer_kind_from_string(opt.at("kind").get<std::string>());
    c.optimizer.learning_rate = opt.at("learning_rate").get<double>();
    c.optimizer.beta1 = opt.at("beta1").get<double>();
    c.optimizer.beta2 = opt.at("beta2").get<double>();
    c.optimizer.epsilon = opt.at("epsilon").get<double>();
    c.optimizer.momentum = opt.at("momentum").get<double>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.validation_fraction = j.at("validation_fraction").get<double>();
    c.smoothing_window = j.at("smoothing_window").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

ordered_json parse_json_file(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", std::string("cannot open ") + what + ": " + path);
    try {
        return ordered_json::parse(in);
    } catch (const ordered_json::exception& e) {
        throw Error("format", path + ": " + e.what());
    }
}

void write_json_file(const ordered_json& j, const std::string& path, const char* what) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", std::string("cannot write ") + what + ": " + path);
    out << j.dump() << '\n';
    if (!out) throw Error("io", std::string("failed writing ") + what + ": " + path);
}

}  // namespace

void save_checkpoint(const VqaModel& model, const std::string& path) {
    ordered_json j;
    j["format"] = "ayn-checkpoint-v1";
    j["rng"] = Rng::kName;
    j["init"] = "uniform-glorot";
    j["seed"] = model.config.seed;
    j["feature_dim"] = model.feature_dim;
    j["config"] = config_to_json(model.config);
    j["embedding"] = ordered_json{{"mode", to_string(model.embedding.mode())},
                                  {"words", model.embedding.words()},
                                  {"weights", tensor_to_json(model.embedding.weights())}};
    j["answer_classes"] = model.answers.classes();
    ordered_json params = ordered_json::object();
    // Read-only parameter walk; the listing API is non-const because the
    // optimizer mutates through it.
    for (auto& [name, tensor] : const_cast<VqaModel&>(model).named_parameters()) {
        if (name == "embedding.weights") continue;  // already in the embedding section
        params[name] = tensor_to_json(*tensor);
    }
    j["parameters"] = params;
    write_json_file(j, path, "checkpoint");
}

VqaModel load_checkpoint(const std::string& path) {
    const ordered_json j = parse_json_file(path, "checkpoint");
    if (j.value("format", std::string{}) != "ayn-checkpoint-v1") {
        throw Error("format", path + ": not an ayn checkpoint (missing format marker)");
    }
    VqaModel m;
    m.config = config_from_json(j.at("config"));
    validate(m.config);
    m.feature_dim = j.at("feature_dim").get<std::size_t>();
    const auto& je = j.at("embedding");
    m.embedding = EmbeddingTable::restore(je.at("words").get<std::vector<std::string>>(),
                                          tensor_from_json(je.at("weights")),
                                          embedding_mode_from_string(je.at("mode").get<std::string>()));
    const auto classes = j.at("answer_classes").get<std::vector<std::string>>();
    if (!classes.empty()) m.answers = AnswerVocabulary(classes);
    Rng scratch(0);
    init_parameters(m, scratch);
    const auto& stored = j.at("parameters");
    for (auto& [name, tensor] : m.named_parameters()) {
        if (name == "embedding.weights") continue;
        if (!stored.contains(name)) {
            throw Error("format", path + ": checkpoint is missing parameter " + name);
        }
        Tensor loaded = tensor_from_json(stored.at(name));
        if (!loaded.same_shape(*tensor)) {
            throw Error("shape", path + ": parameter " + name + " has shape " +
                                     shape_to_string(loaded.shape) + ", expected " +
                                     shape_to_string(tensor->shape));
        }
        *tensor = std::move(loaded);
    }
    return m;
}

void save_train_log(const TrainLog& log, const std::string& path) {
    ordered_json j;
    j["format"] = "ayn-train-log-v1";
    j["seed"] = log.seed;
    j["best_epoch"] = log.best_epoch;
    j["skipped_out_of_vocabulary"] = log.skipped_out_of_vocabulary;
    j["skipped_missing_feature"] = log.skipped_missing_feature;
    ordered_json epochs = ordered_json::array();
    for (const auto& e : log.epochs) {
        epochs.push_back(ordered_json{{"epoch", e.epoch},
                                      {"train_loss", e.train_loss},
                                      {"val_accuracy", e.val_accuracy},
                                      {"smoothed_accuracy", e.smoothed_accuracy}});
    }
    j["epochs"] = epochs;
    write_json_file(j, path, "training log");
}

TrainLog load_train_log(const std::string& path) {
    const ordered_json j = parse_json_file(path, "training log");
    if (j.value("format", std::string{}) != "ayn-train-log-v1") {
        throw Error("format", path + ": not an ayn training log");
    }
    TrainLog log;
    log.seed = j.at("seed").get<std::uint64_t>();
    log.best_epoch = j.at("best_epoch").get<std::size_t>();
    log.skipped_out_of_vocabulary = j.at("skipped_out_of_vocabulary").get<std::size_t>();
    log.skipped_missing_feature = j.at("skipped_missing_feature").get<std::size_t>();
    for (const auto& e : j.at("epochs")) {
        log.epochs.push_back({e.at("epoch").get<std::size_t>(), e.at("train_loss").get<double>(),
                              e.at("val_accuracy").get<double>(),
                              e.at("smoothed_accuracy").get<double>()});
    }
    return log;
}

void save_predictions_jsonl(const std::vector<Prediction>& predictions, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot write predictions: " + path);
    for (const auto& p : predictions) {
        out << ordered_json{{"id", p.id}, {"answer", p.answer}}.dump() << '\n';
    }
    if (!out) throw Error("io", "failed writing predictions: " + path);
}

std::vector<Prediction> load_predictions_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open predictions: " + path);
    std::vector<Prediction> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const ordered_json::exception& e) {
            throw Error("format", path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.contains("id") || !j.at("id").is_string() || !j.contains("answer") ||
            !j.at("answer").is_string()) {
            throw Error("format", path + ":" + std::to_string(line_no) +
                                      ": prediction lines need string fields \"id\" and \"answer\"");
        }
        out.push_back({j.at("id").get<std::string>(), j.at("answer").get<std::string>()});
    }
    return out;
}

}  // namespace ayn

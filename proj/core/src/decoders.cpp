#include "ayn/decoders.hpp"

#include <unordered_set>

#include "ayn/error.hpp"
#include "ayn/math.hpp"

namespace ayn {

AnswerVocabulary::AnswerVocabulary(std::vector<std::string> classes) : classes_(std::move(classes)) {
    if (classes_.empty()) throw Error("invalid-value", "answer vocabulary must not be empty");
    index_.reserve(classes_.size());
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        if (classes_[i].empty()) throw Error("invalid-value", "answer class must not be an empty string");
        if (!index_.emplace(classes_[i], i).second) {
            throw Error("invalid-value", "duplicate answer class: " + classes_[i]);
        }
    }
}

const std::string& AnswerVocabulary::class_at(std::size_t index) const {
    if (index >= classes_.size()) throw Error("range", "answer class index out of range");
    return classes_[index];
}

std::optional<std::size_t> AnswerVocabulary::index_of(const std::string& answer) const {
    auto it = index_.find(answer);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t argmax_lowest(const std::vector<double>& values) {
    if (values.empty()) throw Error("invalid-value", "argmax of an empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

ClassifierOutput classify_answer(const Tensor& fused, const Tensor& head_w, const Tensor& head_b) {
    Tensor logits = matvec_value(head_w, fused);
    if (head_b.numel() != logits.numel()) {
        throw Error("shape", "classify_answer: bias length does not match class count");
    }
    for (std::size_t i = 0; i < logits.data.size(); ++i) logits.data[i] += head_b.data[i];
    ClassifierOutput out;
    out.probabilities = softmax(logits.data);
    out.class_index = argmax_lowest(out.probabilities);
    return out;
}

namespace {

Tensor step_input(const Tensor& visual, const EmbeddingTable& table, const std::string& word) {
    const std::size_t d = table.dim();
    const std::size_t row = table.index_of(word);
    Tensor v = Tensor::zeros({visual.numel() + d});
    for (std::size_t i = 0; i < visual.numel(); ++i) v.data[i] = visual.data[i];
    const Tensor& w = table.weights();
    for (std::size_t c = 0; c < d; ++c) v.data[visual.numel() + c] = w.data[row * d + c];
    return v;
}

}  // namespace

GeneratedAnswer generate_answer_sequence(const std::vector<std::string>& question_tokens,
                                         const Tensor& visual, const GenerationModel& model,
                                         const GenerationConfig& config) {
    if (!model.table || !model.lstm || !model.head_w || !model.head_b) {
        throw Error("state", "generation model is missing components");
    }
    if (question_tokens.empty()) throw Error("invalid-value", "generation: empty question");
    if (config.max_length == 0) throw Error("invalid-value", "generation: max_length must be at least 1");
    if (!model.table->contains(kEndToken)) {
        throw Error("state", "generation vocabulary lacks the end token");
    }
    const std::size_t end_index = model.table->index_of(kEndToken);

    RecurrentState state = zero_state(model.lstm->hidden_dim());
    for (const auto& tok : question_tokens) {
        state = lstm_step(step_input(visual, *model.table, tok), state, *model.lstm);
    }

    GeneratedAnswer answer;
    std::unordered_set<std::size_t> banned;
    for (std::size_t step = 0; step < config.max_length; ++step) {
        Tensor logits = matvec_value(*model.head_w, state.h);
        for (std::size_t i = 0; i < logits.data.size(); ++i) logits.data[i] += model.head_b->data[i];

        std::size_t best = end_index;
        bool found = false;
        for (std::size_t i = 0; i < logits.data.size(); ++i) {
            if (banned.count(i)) continue;
            if (!found || logits.data[i] > logits.data[best]) {
                best = i;
                found = true;
            }
        }
        if (best == end_index) return answer;

        const std::string& word = model.table->word_at(best);
        answer.words.push_back(word);
        if (config.dedup) banned.insert(best);
        state = lstm_step(step_input(visual, *model.table, word), state, *model.lstm);
    }
    answer.truncated = true;
    return answer;
}

TrainingSequence training_targets(const std::vector<std::string>& question_tokens,
                                  const std::vector<std::string>& answer_tokens) {
    if (question_tokens.empty()) throw Error("invalid-value", "training_targets: empty question");
    if (answer_tokens.empty()) throw Error("invalid-value", "training_targets: empty answer");
    TrainingSequence seq;
    seq.input.reserve(question_tokens.size() + answer_tokens.size() + 1);
    seq.input.insert(seq.input.end(), question_tokens.begin(), question_tokens.end());
    seq.input.insert(seq.input.end(), answer_tokens.begin(), answer_tokens.end());
    seq.input.push_back(kEndToken);
    seq.mask.assign(seq.input.size(), 1);
    for (std::size_t i = 0; i < question_tokens.size(); ++i) seq.mask[i] = 0;
    return seq;
}

}  // namespace ayn

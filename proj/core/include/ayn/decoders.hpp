#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ayn/embedding.hpp"
#include "ayn/encoders.hpp"
#include "ayn/tensor.hpp"

namespace ayn {

/// Reserved end-of-answer marker for the generation decoder.
inline constexpr const char* kEndToken = "$";

/// Ordered set of answer classes; a class may be a multi-word string and
/// is treated as one atomic label.
class AnswerVocabulary {
public:
    AnswerVocabulary() = default;
    explicit AnswerVocabulary(std::vector<std::string> classes);

    std::size_t size() const { return classes_.size(); }
    const std::string& class_at(std::size_t index) const;
    std::optional<std::size_t> index_of(const std::string& answer) const;
    const std::vector<std::string>& classes() const { return classes_; }

private:
    std::vector<std::string> classes_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct GenerationConfig {
    std::size_t max_length = 10;
    bool dedup = false;  // mask words already emitted in this answer
};

/// Ties break toward the lowest index, so decoding is reproducible.
std::size_t argmax_lowest(const std::vector<double>& values);

struct ClassifierOutput {
    std::size_t class_index = 0;
    std::vector<double> probabilities;
};

/// softmax(head_w . fused + head_b) and its argmax.
ClassifierOutput classify_answer(const Tensor& fused, const Tensor& head_w, const Tensor& head_b);

/// Generation decoder: one recurrent cell shared between reading the
/// question and emitting the answer; every step consumes
/// [visual ; embedding(previous word)].
struct GenerationModel {
    EmbeddingTable* table = nullptr;  // vocabulary must contain kEndToken
    LstmParams* lstm = nullptr;       // input dim = |visual| + embed dim
    Tensor* head_w = nullptr;         // |V| x hidden
    Tensor* head_b = nullptr;         // |V|
};

struct GeneratedAnswer {
    std::vector<std::string> words;  // never contains kEndToken
    bool truncated = false;          // max_length hit before the end token
};

GeneratedAnswer generate_answer_sequence(const std::vector<std::string>& question_tokens,
                                         const Tensor& visual, const GenerationModel& model,
                                         const GenerationConfig& config);

/// Teacher-forcing layout: input = [question, answer, end token]; the
/// mask marks which target positions contribute to the loss (everything
/// after the final question token).
struct TrainingSequence {
    std::vector<std::string> input;
    std::vector<int> mask;  // same length as input; 0 or 1
};

TrainingSequence training_targets(const std::vector<std::string>& question_tokens,
                                  const std::vector<std::string>& answer_tokens);

}  // namespace ayn

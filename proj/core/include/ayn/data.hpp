#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ayn/decoders.hpp"
#include "ayn/metrics.hpp"
#include "ayn/rng.hpp"

namespace ayn {

/// One question/answer record. `answers` holds one normalized answer set
/// per human annotator (K >= 1); `confident` is empty or K flags long.
struct QAInstance {
    std::string id;
    std::string image_id;
    std::vector<std::string> question_tokens;
    std::vector<AnswerSet> answers;
    std::vector<bool> confident;

    bool operator==(const QAInstance&) const = default;
};

/// Lowercase, drop '?', split on whitespace, strip punctuation from token
/// edges. Throws if nothing survives cleaning.
std::vector<std::string> preprocess_question(const std::string& raw);

/// Alternating question/answer lines; the question names its image via an
/// `image<N>` token. Answers are comma-separated phrases. Ids are
/// synthesized as q1, q2, ... in file order.
std::vector<QAInstance> load_daquar_txt(const std::string& path);

/// One JSON object per line: {"id","image","question","answers":[...]} with
/// an optional "confident":[bool...] parallel to answers.
std::vector<QAInstance> load_qa_jsonl(const std::string& path);
void save_qa_jsonl(const std::vector<QAInstance>& instances, const std::string& path);

enum class FeatureFormat { tsv, binary };

/// Image id -> fixed-length feature vector, uniform dimension, finite
/// values. Binary layout: "AYNF", u32 count, u32 dim (little-endian), then
/// per record u16 id length, id bytes, dim float32 values.
class VisualFeatureStore {
public:
    explicit VisualFeatureStore(std::size_t dim);
    static VisualFeatureStore load(const std::string& path, FeatureFormat format);

    void insert(const std::string& image_id, const std::vector<double>& values);
    void save(const std::string& path, FeatureFormat format) const;

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    bool has(const std::string& image_id) const;
    const std::vector<double>& get(const std::string& image_id) const;
    /// Insertion (= file) order.
    const std::vector<std::string>& ids() const { return ids_; }

private:
    std::size_t dim_;
    std::vector<std::string> ids_;
    std::vector<std::vector<double>> vectors_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Classes = the top_k most frequent canonical answer strings over every
/// reference set of every instance; frequency ties broken lexicographically.
AnswerVocabulary build_answer_classes(const std::vector<QAInstance>& train, std::size_t top_k);

enum class AnswerSelection { random, confident_random, all, most_frequent };
AnswerSelection answer_selection_from_string(const std::string& name);
std::string to_string(AnswerSelection s);

/// Picks training target(s) among the K reference sets. "all" yields all K;
/// the others yield exactly one. confident_random falls back to plain
/// random when nothing is flagged.
std::vector<AnswerSet> select_training_answer(const QAInstance& instance, AnswerSelection strategy, Rng& rng);

/// Tail split in file order: validation = last ceil(fraction * N).
std::pair<std::vector<QAInstance>, std::vector<QAInstance>> split_validation(
    const std::vector<QAInstance>& train, double fraction);

}  // namespace ayn

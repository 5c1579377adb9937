#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "ayn/data.hpp"
#include "ayn/embedding.hpp"

namespace ayn {

/// Question categories, decided by an ordered regex cascade on the
/// lowercased question; the first matching rule wins and "other" catches
/// the rest.
enum class QuestionType { color, count, size, spatial, other };
std::string to_string(QuestionType t);
const std::vector<QuestionType>& all_question_types();

QuestionType classify_question_type(const std::string& question);

/// Always answers the training mode (ties broken lexicographically).
class ConstantBaseline {
public:
    static ConstantBaseline fit(const std::vector<QAInstance>& train);
    const std::string& answer() const { return answer_; }
    std::string predict(const std::string& question) const;

private:
    std::string answer_;
};

/// Training mode per question type; empty buckets fall back to the
/// global mode.
class PerTypeConstantBaseline {
public:
    static PerTypeConstantBaseline fit(const std::vector<QAInstance>& train);
    const std::string& answer_for(QuestionType t) const;
    std::string predict(const std::string& question) const;

private:
    std::unordered_map<int, std::string> answers_;
};

/// Exact-question replay: normalized question -> its per-question modal
/// answer; unseen questions get the empty answer (scored zero downstream).
class LookupTableBaseline {
public:
    static LookupTableBaseline fit(const std::vector<QAInstance>& train, bool strip_articles);
    std::string predict(const std::string& question) const;
    std::size_t table_size() const { return table_.size(); }

private:
    bool strip_articles_ = false;
    std::unordered_map<std::string, std::string> table_;
};

/// Nearest-neighbour baselines over summed word-embedding question
/// vectors under cosine similarity.
class NearestNeighborBaseline {
public:
    /// Question vectors are precomputed at fit time.
    static NearestNeighborBaseline fit(const std::vector<QAInstance>& train, const EmbeddingTable& table);

    /// Answer of the single most similar training question; cosine ties
    /// go to the lowest training index.
    std::string predict_question_only(const std::string& question) const;

    /// Two-stage search: the k most similar training questions propose
    /// candidate images, and the candidate whose image feature is most
    /// similar to the test image wins. Candidates without features are
    /// skipped (counted via skipped); if every candidate is skipped the
    /// answer is empty.
    std::string predict_visual(const std::string& question, const std::string& image_id,
                               const VisualFeatureStore& features, std::size_t k = 4,
                               std::size_t* skipped = nullptr) const;

    std::size_t size() const { return items_.size(); }

private:
    struct Item {
        std::vector<double> question_vector;
        std::string image_id;
        std::string answer;
    };
    const EmbeddingTable* table_ = nullptr;
    std::vector<Item> items_;

    std::vector<double> vectorize(const std::string& question) const;
    std::vector<std::size_t> nearest_questions(const std::vector<double>& vec, std::size_t k) const;
};

}  // namespace ayn

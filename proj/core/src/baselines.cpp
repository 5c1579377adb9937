#include "ayn/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>

#include "ayn/encoders.hpp"
#include "ayn/error.hpp"
#include "ayn/math.hpp"

namespace ayn {

namespace {

std::string lowercase(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

/// The canonical training answer of an instance: its first reference set.
std::string training_answer(const QAInstance& inst) {
    if (inst.answers.empty()) throw Error("invalid-value", "instance '" + inst.id + "' has no answers");
    return answer_set_to_string(inst.answers[0]);
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out += ' ';
        out += tokens[i];
    }
    return out;
}

/// Mode of a multiset of answers; lexicographically first among ties.
std::string modal_answer(const std::map<std::string, std::size_t>& counts) {
    std::string best;
    std::size_t best_count = 0;
    for (const auto& [answer, count] : counts) {
        if (count > best_count) {
            best = answer;
            best_count = count;
        }
    }
    return best;
}

}  // namespace

std::string to_string(QuestionType t) {
    switch (t) {
        case QuestionType::color: return "color";
        case QuestionType::count: return "count";
        case QuestionType::size: return "size";
        case QuestionType::spatial: return "spatial";
        case QuestionType::other: return "other";
    }
    throw Error("invalid-value", "unrepresentable question type");
}

const std::vector<QuestionType>& all_question_types() {
    static const std::vector<QuestionType> types{QuestionType::color, QuestionType::count, QuestionType::size,
                                                 QuestionType::spatial, QuestionType::other};
    return types;
}

QuestionType classify_question_type(const std::string& question) {
    if (question.empty()) throw Error("invalid-value", "empty question");
    // Evaluated in order; the first hit wins.
    static const std::regex color_re("what (is |the )?(the )?colou?r");
    static const std::regex count_re("how many");
    static const std::regex size_re(
        "\\blargest\\b|\\bsmallest\\b|\\blarge\\b|\\bsmall\\b|\\bbig\\b|\\bbiggest\\b");
    static const std::regex spatial_re(
        "\\bfront\\b|\\bleft\\b|\\bright\\b|\\bbelow\\b|\\babove\\b|\\bbeneath\\b|\\bunder\\b|\\bbehind\\b|"
        "\\bbeside\\b|\\bacross\\b|\\bahead\\b|\\baround\\b");

    const std::string q = lowercase(question);
    if (std::regex_search(q, color_re)) return QuestionType::color;
    if (std::regex_search(q, count_re)) return QuestionType::count;
    if (std::regex_search(q, size_re)) return QuestionType::size;
    if (std::regex_search(q, spatial_re)) return QuestionType::spatial;
    return QuestionType::other;
}

ConstantBaseline ConstantBaseline::fit(const std::vector<QAInstance>& train) {
    if (train.empty()) throw Error("invalid-value", "constant baseline needs a non-empty training set");
    std::map<std::string, std::size_t> counts;
    for (const auto& inst : train) ++counts[training_answer(inst)];
    ConstantBaseline b;
    b.answer_ = modal_answer(counts);
    return b;
}

std::string ConstantBaseline::predict(const std::string&) const { return answer_; }

PerTypeConstantBaseline PerTypeConstantBaseline::fit(const std::vector<QAInstance>& train) {
    if (train.empty()) throw Error("invalid-value", "per-type baseline needs a non-empty training set");
    std::map<std::string, std::size_t> global;
    std::unordered_map<int, std::map<std::string, std::size_t>> buckets;
    for (const auto& inst : train) {
        std::string answer = training_answer(inst);
        QuestionType type = classify_question_type(join_tokens(inst.question_tokens));
        ++buckets[static_cast<int>(type)][answer];
        ++global[std::move(answer)];
    }
    PerTypeConstantBaseline b;
    const std::string fallback = modal_answer(global);
    for (QuestionType t : all_question_types()) {
        auto it = buckets.find(static_cast<int>(t));
        b.answers_[static_cast<int>(t)] = it == buckets.end() ? fallback : modal_answer(it->second);
    }
    return b;
}

const std::string& PerTypeConstantBaseline::answer_for(QuestionType t) const {
    return answers_.at(static_cast<int>(t));
}

std::string PerTypeConstantBaseline::predict(const std::string& question) const {
    return answer_for(classify_question_type(question));
}

namespace {

std::string lookup_key(const std::vector<std::string>& tokens, bool strip_articles) {
    if (!strip_articles) return join_tokens(tokens);
    std::vector<std::string> kept;
    for (const auto& t : tokens) {
        if (t == "the" || t == "a") continue;
        kept.push_back(t);
    }
    return join_tokens(kept);
}

}  // namespace

LookupTableBaseline LookupTableBaseline::fit(const std::vector<QAInstance>& train, bool strip_articles) {
    // Per-question answer histograms, then the mode of each.
    std::unordered_map<std::string, std::map<std::string, std::size_t>> histograms;
    for (const auto& inst : train) {
        histograms[lookup_key(inst.question_tokens, strip_articles)][training_answer(inst)]++;
    }
    LookupTableBaseline b;
    b.strip_articles_ = strip_articles;
    for (const auto& [key, counts] : histograms) b.table_[key] = modal_answer(counts);
    return b;
}

std::string LookupTableBaseline::predict(const std::string& question) const {
    const std::string key = lookup_key(preprocess_question(question), strip_articles_);
    auto it = table_.find(key);
    return it == table_.end() ? std::string() : it->second;
}

NearestNeighborBaseline NearestNeighborBaseline::fit(const std::vector<QAInstance>& train,
                                                     const EmbeddingTable& table) {
    if (train.empty()) throw Error("invalid-value", "nearest-neighbour baseline needs a non-empty training set");
    NearestNeighborBaseline b;
    b.table_ = &table;
    b.items_.reserve(train.size());
    for (const auto& inst : train) {
        Item item;
        Tensor bow = encode_bow(table.embed_tokens(inst.question_tokens));
        item.question_vector = bow.data;
        item.image_id = inst.image_id;
        item.answer = training_answer(inst);
        b.items_.push_back(std::move(item));
    }
    return b;
}

std::vector<double> NearestNeighborBaseline::vectorize(const std::string& question) const {
    return encode_bow(table_->embed_tokens(preprocess_question(question))).data;
}

std::vector<std::size_t> NearestNeighborBaseline::nearest_questions(const std::vector<double>& vec,
                                                                    std::size_t k) const {
    // Stable sort on descending similarity keeps ties in index order.
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i) scored.emplace_back(cosine_similarity(vec, items_[i].question_vector), i);
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(scored[i].second);
    return out;
}

std::string NearestNeighborBaseline::predict_question_only(const std::string& question) const {
    auto nearest = nearest_questions(vectorize(question), 1);
    return items_[nearest.front()].answer;
}

std::string NearestNeighborBaseline::predict_visual(const std::string& question, const std::string& image_id,
                                                    const VisualFeatureStore& features, std::size_t k,
                                                    std::size_t* skipped) const {
    if (k == 0) throw Error("invalid-value", "candidate count must be positive");
    auto candidates = nearest_questions(vectorize(question), k);
    std::size_t skip_count = 0;
    std::string best_answer;
    double best = -2.0;  // below any cosine
    bool found = false;

    if (!features.has(image_id)) {
        if (skipped) *skipped = candidates.size();
        return "";
    }
    const auto& test_feature = features.get(image_id);

    for (std::size_t idx : candidates) {
        const Item& item = items_[idx];
        if (!features.has(item.image_id)) {
            ++skip_count;
            continue;
        }
        double sim = cosine_similarity(test_feature, features.get(item.image_id));
        if (!found || sim > best) {
            best = sim;
            best_answer = item.answer;
            found = true;
        }
    }
    if (skipped) *skipped = skip_count;
    return found ? best_answer : std::string();
}

}  // namespace ayn

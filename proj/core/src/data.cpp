#include "ayn/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "ayn/error.hpp"
#include "json.hpp"

namespace ayn {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<std::string> preprocess_question(const std::string& raw) {
    std::string cleaned;
    cleaned.reserve(raw.size());
    for (char c : raw) {
        if (c == '?') continue;
        cleaned.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    std::vector<std::string> tokens;
    std::stringstream ss(cleaned);
    std::string token;
    while (ss >> token) {
        std::size_t b = 0, e = token.size();
        while (b < e && is_punct(token[b])) ++b;
        while (e > b && is_punct(token[e - 1])) --e;
        if (e > b) tokens.push_back(token.substr(b, e - b));
    }
    if (tokens.empty()) throw Error("format", "question empty after cleaning: '" + raw + "'");
    return tokens;
}

std::vector<QAInstance> load_daquar_txt(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot open qa file: " + path);

    std::vector<std::pair<std::string, std::size_t>> lines;  // text, line number
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (!t.empty()) lines.emplace_back(std::move(t), line_no);
    }
    if (lines.size() % 2 != 0) {
        throw Error("format", path + ": odd number of lines; expected question/answer pairs");
    }

    static const std::regex image_token(R"(^image\d+$)");
    std::vector<QAInstance> out;
    out.reserve(lines.size() / 2);
    for (std::size_t i = 0; i < lines.size(); i += 2) {
        const auto& [question_line, q_no] = lines[i];
        const auto& [answer_line, a_no] = lines[i + 1];

        QAInstance inst;
        inst.id = "q" + std::to_string(out.size() + 1);
        inst.question_tokens = preprocess_question(question_line);
        for (const auto& token : inst.question_tokens) {
            if (std::regex_match(token, image_token)) {
                inst.image_id = token;
                break;
            }
        }
        if (inst.image_id.empty()) {
            throw Error("format", path + ":" + std::to_string(q_no) + ": question lacks an image<N> token");
        }
        AnswerSet answers = normalize_answer_set(answer_line);
        if (answers.empty()) {
            throw Error("format", path + ":" + std::to_string(a_no) + ": empty answer");
        }
        inst.answers.push_back(std::move(answers));
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<QAInstance> load_qa_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot open qa file: " + path);

    std::vector<QAInstance> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);

        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(t);
        } catch (const nlohmann::json::exception& e) {
            throw Error("format", where + ": " + e.what());
        }
        if (!obj.is_object()) throw Error("format", where + ": expected a JSON object");

        QAInstance inst;
        try {
            inst.id = obj.at("id").get<std::string>();
            inst.image_id = obj.at("image").get<std::string>();
            inst.question_tokens = preprocess_question(obj.at("question").get<std::string>());
            if (!obj.at("answers").is_array() || obj.at("answers").empty()) {
                throw Error("format", where + ": \"answers\" must be a non-empty array");
            }
            for (const auto& a : obj.at("answers")) {
                AnswerSet set = normalize_answer_set(a.get<std::string>());
                if (set.empty()) throw Error("format", where + ": answer empty after normalization");
                inst.answers.push_back(std::move(set));
            }
            if (obj.contains("confident")) {
                for (const auto& c : obj.at("confident")) inst.confident.push_back(c.get<bool>());
                if (inst.confident.size() != inst.answers.size()) {
                    throw Error("format", where + ": \"confident\" length differs from \"answers\"");
                }
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error("format", where + ": " + e.what());
        }
        out.push_back(std::move(inst));
    }
    return out;
}

void save_qa_jsonl(const std::vector<QAInstance>& instances, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("io", "cannot write qa file: " + path);
    for (const auto& inst : instances) {
        nlohmann::ordered_json obj;
        obj["id"] = inst.id;
        obj["image"] = inst.image_id;
        std::string question;
        for (std::size_t i = 0; i < inst.question_tokens.size(); ++i) {
            if (i > 0) question += ' ';
            question += inst.question_tokens[i];
        }
        obj["question"] = question;
        std::vector<std::string> answers;
        for (const auto& set : inst.answers) answers.push_back(answer_set_to_string(set));
        obj["answers"] = answers;
        if (!inst.confident.empty()) obj["confident"] = inst.confident;
        out << obj.dump() << '\n';
    }
}

// --------------------------------------------------------------------------
// Visual features

namespace {

void write_u16(std::ostream& out, std::uint16_t v) {
    char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
    out.write(b, 2);
}

void write_u32(std::ostream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

void write_f32(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(out, bits);
}

bool read_u16(std::istream& in, std::uint16_t& v) {
    unsigned char b[2];
    if (!in.read(reinterpret_cast<char*>(b), 2)) return false;
    v = static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    return true;
}

bool read_u32(std::istream& in, std::uint32_t& v) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
    v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
        (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    return true;
}

bool read_f32(std::istream& in, float& v) {
    std::uint32_t bits;
    if (!read_u32(in, bits)) return false;
    std::memcpy(&v, &bits, 4);
    return true;
}

constexpr char kFeatureMagic[4] = {'A', 'Y', 'N', 'F'};

}  // namespace

VisualFeatureStore::VisualFeatureStore(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw Error("invalid-value", "feature dimension must be positive");
}

void VisualFeatureStore::insert(const std::string& image_id, const std::vector<double>& values) {
    if (values.size() != dim_) {
        throw Error("shape", "feature for '" + image_id + "' has dimension " + std::to_string(values.size()) +
                                 ", store expects " + std::to_string(dim_));
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw Error("invalid-value", "non-finite feature value for '" + image_id + "'");
    }
    if (image_id.empty()) throw Error("invalid-value", "empty image id");
    auto [it, inserted] = index_.emplace(image_id, ids_.size());
    if (!inserted) {
        vectors_[it->second] = values;  // last record wins
        return;
    }
    ids_.push_back(image_id);
    vectors_.push_back(values);
}

bool VisualFeatureStore::has(const std::string& image_id) const { return index_.count(image_id) > 0; }

const std::vector<double>& VisualFeatureStore::get(const std::string& image_id) const {
    auto it = index_.find(image_id);
    if (it == index_.end()) throw Error("range", "no feature vector for image '" + image_id + "'");
    return vectors_[it->second];
}

VisualFeatureStore VisualFeatureStore::load(const std::string& path, FeatureFormat format) {
    if (format == FeatureFormat::tsv) {
        std::ifstream in(path);
        if (!in) throw Error("io", "cannot open feature file: " + path);
        std::vector<std::pair<std::string, std::vector<double>>> records;
        std::string line;
        std::size_t line_no = 0;
        std::size_t dim = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::string t = trim(line);
            if (t.empty()) continue;
            const std::string where = path + ":" + std::to_string(line_no);
            std::size_t tab = t.find('\t');
            if (tab == std::string::npos) throw Error("format", where + ": expected image_id<TAB>values");
            std::string id = trim(t.substr(0, tab));
            if (id.empty()) throw Error("format", where + ": empty image id");
            std::vector<double> values;
            std::stringstream rest(t.substr(tab + 1));
            std::string field;
            while (std::getline(rest, field, ',')) {
                field = trim(field);
                if (field.empty()) throw Error("format", where + ": empty feature value");
                try {
                    std::size_t used = 0;
                    values.push_back(std::stod(field, &used));
                    if (used != field.size()) throw std::invalid_argument(field);
                } catch (const std::exception&) {
                    throw Error("format", where + ": bad feature value '" + field + "'");
                }
            }
            if (values.empty()) throw Error("format", where + ": no feature values");
            if (dim == 0) {
                dim = values.size();
            } else if (values.size() != dim) {
                throw Error("format", where + ": dimension " + std::to_string(values.size()) +
                                          " differs from first record's " + std::to_string(dim));
            }
            records.emplace_back(std::move(id), std::move(values));
        }
        if (records.empty()) throw Error("format", path + ": no feature records");
        VisualFeatureStore store(dim);
        for (auto& [id, values] : records) store.insert(id, values);
        return store;
    }

    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open feature file: " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kFeatureMagic, 4) != 0) {
        throw Error("format", path + ": bad magic; not a feature file");
    }
    std::uint32_t count = 0, dim = 0;
    if (!read_u32(in, count) || !read_u32(in, dim)) throw Error("format", path + ": truncated header");
    if (dim == 0) throw Error("format", path + ": zero feature dimension");
    VisualFeatureStore store(dim);
    for (std::uint32_t r = 0; r < count; ++r) {
        const std::string where = path + ": record " + std::to_string(r + 1);
        std::uint16_t id_len = 0;
        if (!read_u16(in, id_len)) throw Error("format", where + ": truncated");
        std::string id(id_len, '\0');
        if (!in.read(id.data(), id_len)) throw Error("format", where + ": truncated id");
        std::vector<double> values(dim);
        for (std::uint32_t j = 0; j < dim; ++j) {
            float f = 0.0f;
            if (!read_f32(in, f)) throw Error("format", where + ": truncated values");
            values[j] = static_cast<double>(f);
        }
        store.insert(id, values);
    }
    return store;
}

void VisualFeatureStore::save(const std::string& path, FeatureFormat format) const {
    if (format == FeatureFormat::tsv) {
        std::ofstream out(path);
        if (!out) throw Error("io", "cannot write feature file: " + path);
        out.precision(17);
        for (std::size_t i = 0; i < ids_.size(); ++i) {
            out << ids_[i] << '\t';
            for (std::size_t j = 0; j < dim_; ++j) {
                if (j > 0) out << ',';
                out << vectors_[i][j];
            }
            out << '\n';
        }
        return;
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot write feature file: " + path);
    out.write(kFeatureMagic, 4);
    write_u32(out, static_cast<std::uint32_t>(ids_.size()));
    write_u32(out, static_cast<std::uint32_t>(dim_));
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (ids_[i].size() > 0xffff) throw Error("format", "image id too long for binary format: " + ids_[i]);
        write_u16(out, static_cast<std::uint16_t>(ids_[i].size()));
        out.write(ids_[i].data(), static_cast<std::streamsize>(ids_[i].size()));
        for (std::size_t j = 0; j < dim_; ++j) write_f32(out, static_cast<float>(vectors_[i][j]));
    }
}

// --------------------------------------------------------------------------
// Training-set preparation

AnswerVocabulary build_answer_classes(const std::vector<QAInstance>& train, std::size_t top_k) {
    if (top_k == 0) throw Error("invalid-value", "top_k must be at least 1");
    std::map<std::string, std::size_t> counts;  // ordered: ties resolve lexicographically
    for (const auto& inst : train) {
        for (const auto& set : inst.answers) ++counts[answer_set_to_string(set)];
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> classes;
    for (const auto& [answer, count] : ranked) {
        if (classes.size() == top_k) break;
        classes.push_back(answer);
    }
    if (classes.empty()) throw Error("invalid-value", "no answers to build classes from");
    return AnswerVocabulary(classes);
}

AnswerSelection answer_selection_from_string(const std::string& name) {
    if (name == "random") return AnswerSelection::random;
    if (name == "confident-random" || name == "confident_random") return AnswerSelection::confident_random;
    if (name == "all") return AnswerSelection::all;
    if (name == "most-frequent" || name == "most_frequent") return AnswerSelection::most_frequent;
    throw Error("invalid-value", "unknown answer selection strategy: " + name);
}

std::string to_string(AnswerSelection s) {
    switch (s) {
        case AnswerSelection::random: return "random";
        case AnswerSelection::confident_random: return "confident-random";
        case AnswerSelection::all: return "all";
        case AnswerSelection::most_frequent: return "most-frequent";
    }
    throw Error("invalid-value", "unrepresentable answer selection");
}

std::vector<AnswerSet> select_training_answer(const QAInstance& instance, AnswerSelection strategy, Rng& rng) {
    const std::size_t k = instance.answers.size();
    if (k == 0) throw Error("invalid-value", "instance '" + instance.id + "' has no answers");

    switch (strategy) {
        case AnswerSelection::all:
            return instance.answers;
        case AnswerSelection::random:
            return {instance.answers[rng.index(k)]};
        case AnswerSelection::confident_random: {
            std::vector<std::size_t> flagged;
            for (std::size_t i = 0; i < instance.confident.size() && i < k; ++i) {
                if (instance.confident[i]) flagged.push_back(i);
            }
            if (flagged.empty()) return {instance.answers[rng.index(k)]};
            return {instance.answers[flagged[rng.index(flagged.size())]]};
        }
        case AnswerSelection::most_frequent: {
            std::map<std::string, std::size_t> counts;
            for (const auto& set : instance.answers) ++counts[answer_set_to_string(set)];
            std::string best;
            std::size_t best_count = 0;
            for (const auto& [answer, count] : counts) {
                if (count > best_count) {  // first (lexicographically least) among ties
                    best = answer;
                    best_count = count;
                }
            }
            return {normalize_answer_set(best)};
        }
    }
    throw Error("invalid-value", "unrepresentable answer selection");
}

std::pair<std::vector<QAInstance>, std::vector<QAInstance>> split_validation(
    const std::vector<QAInstance>& train, double fraction) {
    if (!(fraction > 0.0) || !(fraction < 1.0)) {
        throw Error("range", "validation fraction must lie strictly between 0 and 1");
    }
    if (train.empty()) throw Error("invalid-value", "cannot split an empty training set");
    auto val_count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(train.size())));
    val_count = std::min(val_count, train.size());
    const std::size_t cut = train.size() - val_count;
    std::vector<QAInstance> head(train.begin(), train.begin() + static_cast<std::ptrdiff_t>(cut));
    std::vector<QAInstance> tail(train.begin() + static_cast<std::ptrdiff_t>(cut), train.end());
    return {std::move(head), std::move(tail)};
}

}  // namespace ayn

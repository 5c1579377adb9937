#include "ayn/embedding.hpp"

#include <fstream>
#include <sstream>

#include "ayn/error.hpp"

namespace ayn {

EmbeddingMode embedding_mode_from_string(const std::string& name) {
    if (name == "learned") return EmbeddingMode::learned;
    if (name == "pretrained-frozen") return EmbeddingMode::pretrained_frozen;
    if (name == "pretrained-finetuned") return EmbeddingMode::pretrained_finetuned;
    throw Error("invalid-value", "unknown embedding mode '" + name + "'");
}

std::string to_string(EmbeddingMode mode) {
    switch (mode) {
        case EmbeddingMode::learned: return "learned";
        case EmbeddingMode::pretrained_frozen: return "pretrained-frozen";
        case EmbeddingMode::pretrained_finetuned: return "pretrained-finetuned";
    }
    throw Error("invalid-value", "unrepresentable embedding mode");
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> words, Tensor weights, EmbeddingMode mode)
    : words_(std::move(words)), weights_(std::move(weights)), mode_(mode) {
    if (words_.empty() || words_[0] != kUnkToken) {
        throw Error("state", "embedding table must reserve row 0 for " + std::string(kUnkToken));
    }
    index_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
        if (!index_.emplace(words_[i], i).second) {
            throw Error("format", "duplicate word in embedding vocabulary: " + words_[i]);
        }
    }
}

EmbeddingTable EmbeddingTable::learned(const std::vector<std::string>& words, std::size_t dim, Rng& rng) {
    if (dim == 0) throw Error("invalid-value", "embedding dim must be positive");
    std::vector<std::string> vocab;
    vocab.reserve(words.size() + 1);
    vocab.push_back(kUnkToken);
    for (const auto& w : words) {
        if (w != kUnkToken) vocab.push_back(w);
    }
    Tensor weights = Tensor::zeros({vocab.size(), dim});
    init_uniform_glorot(weights, dim, vocab.size(), rng);
    return EmbeddingTable(std::move(vocab), std::move(weights), EmbeddingMode::learned);
}

EmbeddingTable EmbeddingTable::restore(std::vector<std::string> words, Tensor weights, EmbeddingMode mode) {
    if (weights.rank() != 2 || weights.rows() != words.size()) {
        throw Error("shape", "embedding restore: weights must be |vocabulary| x dim");
    }
    return EmbeddingTable(std::move(words), std::move(weights), mode);
}

EmbeddingTable EmbeddingTable::pretrained(const std::string& path, EmbeddingMode mode) {
    if (mode == EmbeddingMode::learned) {
        throw Error("invalid-value", "pretrained loader cannot produce a learned-mode table");
    }
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot open embedding file: " + path);

    std::vector<std::string> words;
    std::vector<std::vector<double>> rows;
    std::size_t dim = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string word;
        ss >> word;
        std::vector<double> values;
        double v;
        while (ss >> v) values.push_back(v);
        if (values.empty()) {
            throw Error("format", path + ":" + std::to_string(line_no) + ": no vector values for '" + word + "'");
        }
        if (dim == 0) {
            dim = values.size();
        } else if (values.size() != dim) {
            throw Error("format", path + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                                      " values, got " + std::to_string(values.size()));
        }
        words.push_back(std::move(word));
        rows.push_back(std::move(values));
    }
    if (words.empty()) throw Error("format", "embedding file is empty: " + path);

    // UNK occupies row 0: reuse the file's vector when present, else zeros.
    std::vector<std::string> vocab{kUnkToken};
    Tensor weights = Tensor::zeros({words.size() + 1, dim});
    std::size_t next = 1;
    std::size_t unk_extra = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (words[i] == kUnkToken) {
            for (std::size_t c = 0; c < dim; ++c) weights.data[c] = rows[i][c];
            ++unk_extra;
            continue;
        }
        vocab.push_back(words[i]);
        for (std::size_t c = 0; c < dim; ++c) weights.data[next * dim + c] = rows[i][c];
        ++next;
    }
    if (unk_extra > 0) {
        Tensor trimmed = Tensor::zeros({next, dim});
        std::copy(weights.data.begin(), weights.data.begin() + static_cast<std::ptrdiff_t>(next * dim),
                  trimmed.data.begin());
        weights = std::move(trimmed);
    }
    return EmbeddingTable(std::move(vocab), std::move(weights), mode);
}

std::size_t EmbeddingTable::index_of(const std::string& word) const {
    auto it = index_.find(word);
    return it == index_.end() ? 0 : it->second;
}

Tensor EmbeddingTable::embed_tokens(const std::vector<std::string>& tokens) const {
    if (tokens.empty()) throw Error("invalid-value", "embed_tokens: empty token list");
    const std::size_t d = dim();
    Tensor out = Tensor::zeros({tokens.size(), d});
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const std::size_t r = index_of(tokens[t]);
        for (std::size_t c = 0; c < d; ++c) out.data[t * d + c] = weights_.data[r * d + c];
    }
    return out;
}

}  // namespace ayn

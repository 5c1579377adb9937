#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "ayn/rng.hpp"
#include "ayn/tensor.hpp"

namespace ayn {

enum class EmbeddingMode { learned, pretrained_frozen, pretrained_finetuned };

EmbeddingMode embedding_mode_from_string(const std::string& name);
std::string to_string(EmbeddingMode mode);

/// Word -> dense vector lookup. Row 0 is always the reserved UNK token;
/// any out-of-vocabulary word resolves there. In pretrained modes the
/// vocabulary is the embedding file's (extended) vocabulary, so words
/// absent from the training questions still get their own vector.
class EmbeddingTable {
public:
    static constexpr const char* kUnkToken = "<unk>";

    /// Empty placeholder (no rows); assign a real table before use.
    EmbeddingTable() = default;

    /// Rows initialized uniformly at fan-balanced scale; UNK included.
    static EmbeddingTable learned(const std::vector<std::string>& words, std::size_t dim, Rng& rng);

    /// Word2vec-style text file: one `word v1 v2 ... vd` line per word.
    /// The UNK row is zero unless the file itself defines "<unk>".
    static EmbeddingTable pretrained(const std::string& path, EmbeddingMode mode);

    /// Rebuilds a table from a checkpoint: `words` row-aligned with
    /// `weights`, row 0 being the UNK token.
    static EmbeddingTable restore(std::vector<std::string> words, Tensor weights, EmbeddingMode mode);

    std::size_t dim() const { return weights_.cols(); }
    std::size_t vocab_size() const { return weights_.rows(); }
    EmbeddingMode mode() const { return mode_; }

    /// Frozen tables take no gradient; everything else trains.
    bool trainable() const { return mode_ != EmbeddingMode::pretrained_frozen; }

    bool contains(const std::string& word) const { return index_.count(word) > 0; }
    std::size_t index_of(const std::string& word) const;
    const std::string& word_at(std::size_t index) const { return words_.at(index); }
    const std::vector<std::string>& words() const { return words_; }

    Tensor& weights() { return weights_; }
    const Tensor& weights() const { return weights_; }

    /// T x d matrix whose row t is the vector of tokens[t].
    Tensor embed_tokens(const std::vector<std::string>& tokens) const;

private:
    EmbeddingTable(std::vector<std::string> words, Tensor weights, EmbeddingMode mode);

    std::vector<std::string> words_;
    std::unordered_map<std::string, std::size_t> index_;
    Tensor weights_;  // |V| x d, row 0 = UNK
    EmbeddingMode mode_ = EmbeddingMode::learned;
};

}  // namespace ayn

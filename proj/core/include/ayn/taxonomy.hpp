#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace ayn {

/// Is-a taxonomy: a rooted DAG of child->parent edges plus a word ->
/// sense-nodes map. Immutable after load; similarity queries are
/// thread-safe (the memo cache is internally synchronized).
///
/// Conventions: depth counts nodes along the longest chain from the
/// root (root depth = 1), so depth strictly increases along edges; the
/// least common subsumer is the deepest shared ancestor; multi-sense
/// words take the best-scoring sense pair; words absent from the map
/// fall back to an exact-string indicator.
class Taxonomy {
public:
    static Taxonomy load(const std::string& edge_path, const std::string& word_map_path);

    // Movable despite the mutex: moving abandons the memo cache's lock,
    // which is safe because moves only happen before concurrent use.
    Taxonomy(Taxonomy&& other) noexcept { *this = std::move(other); }
    Taxonomy& operator=(Taxonomy&& other) noexcept {
        if (this != &other) {
            names_ = std::move(other.names_);
            parents_ = std::move(other.parents_);
            depth_ = std::move(other.depth_);
            ancestors_ = std::move(other.ancestors_);
            node_index_ = std::move(other.node_index_);
            word_senses_ = std::move(other.word_senses_);
            root_ = other.root_;
            duplicate_edges_ = other.duplicate_edges_;
            sub_threshold_factor_ = other.sub_threshold_factor_;
            pair_cache_ = std::move(other.pair_cache_);
        }
        return *this;
    }
    Taxonomy(const Taxonomy&) = delete;
    Taxonomy& operator=(const Taxonomy&) = delete;

    /// In-memory construction, same validation as load().
    static Taxonomy build(const std::vector<std::pair<std::string, std::string>>& child_parent_edges,
                          const std::vector<std::pair<std::string, std::vector<std::string>>>& word_map);

    std::size_t node_count() const { return names_.size(); }
    const std::string& root_name() const { return names_[root_]; }

    /// Duplicate edges are ignored but counted.
    std::size_t duplicate_edge_warnings() const { return duplicate_edges_; }

    bool has_word(const std::string& word) const { return word_senses_.count(word) > 0; }
    bool has_node(const std::string& node) const { return node_index_.count(node) > 0; }
    std::size_t depth_of_node(const std::string& node) const;

    /// Max over sense pairs of 2*depth(lcs) / (depth(a)+depth(b)).
    double wup_similarity(const std::string& a, const std::string& b) const;

    /// wup if it clears tau, else sub_threshold_factor * wup.
    double mu_thresholded(const std::string& a, const std::string& b, double tau) const;

    double sub_threshold_factor() const { return sub_threshold_factor_; }
    void set_sub_threshold_factor(double f);

private:
    Taxonomy() = default;
    void validate_and_index();
    double sense_pair_wup(std::uint32_t a, std::uint32_t b) const;

    std::vector<std::string> names_;
    std::vector<std::vector<std::uint32_t>> parents_;    // per node
    std::vector<std::uint32_t> depth_;                   // root = 1, longest chain
    std::vector<std::vector<std::uint32_t>> ancestors_;  // sorted, includes self
    std::unordered_map<std::string, std::uint32_t> node_index_;
    std::unordered_map<std::string, std::vector<std::uint32_t>> word_senses_;
    std::uint32_t root_ = 0;
    std::size_t duplicate_edges_ = 0;
    double sub_threshold_factor_ = 0.1;

    mutable std::mutex cache_mutex_;
    mutable std::unordered_map<std::string, double> pair_cache_;
};

}  // namespace ayn

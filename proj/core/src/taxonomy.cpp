#include "ayn/taxonomy.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "ayn/error.hpp"

namespace ayn {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

Taxonomy Taxonomy::load(const std::string& edge_path, const std::string& word_map_path) {
    std::ifstream edges_in(edge_path);
    if (!edges_in) throw Error("io", "cannot open taxonomy edge file: " + edge_path);
    std::vector<std::pair<std::string, std::string>> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(edges_in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t tab = t.find('\t');
        if (tab == std::string::npos) {
            throw Error("format", edge_path + ":" + std::to_string(line_no) + ": expected child<TAB>parent");
        }
        std::string child = trim(t.substr(0, tab));
        std::string parent = trim(t.substr(tab + 1));
        if (child.empty() || parent.empty()) {
            throw Error("format", edge_path + ":" + std::to_string(line_no) + ": empty node name");
        }
        edges.emplace_back(std::move(child), std::move(parent));
    }

    std::vector<std::pair<std::string, std::vector<std::string>>> word_map;
    if (!word_map_path.empty()) {
        std::ifstream words_in(word_map_path);
        if (!words_in) throw Error("io", "cannot open taxonomy word map: " + word_map_path);
        line_no = 0;
        while (std::getline(words_in, line)) {
            ++line_no;
            std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            std::size_t tab = t.find('\t');
            if (tab == std::string::npos) {
                throw Error("format",
                            word_map_path + ":" + std::to_string(line_no) + ": expected word<TAB>node[,node...]");
            }
            std::string word = trim(t.substr(0, tab));
            std::vector<std::string> nodes;
            std::stringstream rest(t.substr(tab + 1));
            std::string node;
            while (std::getline(rest, node, ',')) {
                node = trim(node);
                if (!node.empty()) nodes.push_back(node);
            }
            if (word.empty() || nodes.empty()) {
                throw Error("format", word_map_path + ":" + std::to_string(line_no) + ": word with no nodes");
            }
            word_map.emplace_back(std::move(word), std::move(nodes));
        }
    }
    return build(edges, word_map);
}

Taxonomy Taxonomy::build(const std::vector<std::pair<std::string, std::string>>& child_parent_edges,
                         const std::vector<std::pair<std::string, std::vector<std::string>>>& word_map) {
    if (child_parent_edges.empty()) throw Error("format", "taxonomy: no edges");

    Taxonomy t;
    auto intern = [&t](const std::string& name) -> std::uint32_t {
        auto it = t.node_index_.find(name);
        if (it != t.node_index_.end()) return it->second;
        std::uint32_t id = static_cast<std::uint32_t>(t.names_.size());
        t.names_.push_back(name);
        t.node_index_.emplace(name, id);
        t.parents_.emplace_back();
        return id;
    };

    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (const auto& [child, parent] : child_parent_edges) {
        std::uint32_t c = intern(child);
        std::uint32_t p = intern(parent);
        if (c == p) throw Error("structural", "taxonomy: self-edge at node '" + child + "'");
        if (!seen.emplace(c, p).second) {
            ++t.duplicate_edges_;
            continue;
        }
        t.parents_[c].push_back(p);
    }

    for (const auto& [word, nodes] : word_map) {
        std::vector<std::uint32_t> senses;
        for (const auto& node : nodes) {
            auto it = t.node_index_.find(node);
            if (it == t.node_index_.end()) {
                throw Error("structural", "taxonomy word map: word '" + word + "' references unknown node '" +
                                              node + "'");
            }
            senses.push_back(it->second);
        }
        if (!t.word_senses_.emplace(word, std::move(senses)).second) {
            throw Error("format", "taxonomy word map: duplicate word '" + word + "'");
        }
    }

    t.validate_and_index();
    return t;
}

void Taxonomy::validate_and_index() {
    const std::size_t n = names_.size();

    std::vector<std::uint32_t> roots;
    for (std::uint32_t i = 0; i < n; ++i) {
        if (parents_[i].empty()) roots.push_back(i);
    }
    if (roots.empty()) throw Error("structural", "taxonomy: no root (every node has a parent; cycle)");
    if (roots.size() > 1) {
        throw Error("structural", "taxonomy: multiple roots: '" + names_[roots[0]] + "' and '" +
                                      names_[roots[1]] + "'");
    }
    root_ = roots[0];

    // Kahn's algorithm over child->parent edges surfaces any cycle.
    std::vector<std::size_t> out_degree(n, 0);
    std::vector<std::vector<std::uint32_t>> children(n);
    for (std::uint32_t c = 0; c < n; ++c) {
        out_degree[c] = parents_[c].size();
        for (std::uint32_t p : parents_[c]) children[p].push_back(c);
    }
    std::deque<std::uint32_t> ready{root_};
    std::size_t processed = 0;
    std::vector<std::uint32_t> topo;
    while (!ready.empty()) {
        std::uint32_t p = ready.front();
        ready.pop_front();
        ++processed;
        topo.push_back(p);
        for (std::uint32_t c : children[p]) {
            if (--out_degree[c] == 0) ready.push_back(c);
        }
    }
    if (processed != n) throw Error("structural", "taxonomy: cycle detected");

    // Longest-chain depth, computed in topological order. Longest (not
    // shortest) keeps depth strictly increasing along edges, so an
    // ancestor is never deeper than the node itself and similarity
    // scores stay within [0, 1] on multi-parent nodes.
    depth_.assign(n, 0);
    depth_[root_] = 1;
    for (std::uint32_t node : topo) {
        for (std::uint32_t p : parents_[node]) {
            depth_[node] = std::max(depth_[node], depth_[p] + 1);
        }
    }

    // Ancestor closure in topological order (parents precede children).
    ancestors_.assign(n, {});
    for (std::uint32_t node : topo) {
        std::set<std::uint32_t> acc{node};
        for (std::uint32_t p : parents_[node]) {
            acc.insert(ancestors_[p].begin(), ancestors_[p].end());
        }
        ancestors_[node].assign(acc.begin(), acc.end());
    }
}

std::size_t Taxonomy::depth_of_node(const std::string& node) const {
    auto it = node_index_.find(node);
    if (it == node_index_.end()) throw Error("range", "taxonomy: unknown node '" + node + "'");
    return depth_[it->second];
}

double Taxonomy::sense_pair_wup(std::uint32_t a, std::uint32_t b) const {
    const auto& aa = ancestors_[a];
    const auto& ab = ancestors_[b];
    std::uint32_t best_depth = 0;
    std::size_t i = 0, j = 0;
    while (i < aa.size() && j < ab.size()) {
        if (aa[i] == ab[j]) {
            best_depth = std::max(best_depth, depth_[aa[i]]);
            ++i;
            ++j;
        } else if (aa[i] < ab[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    // A rooted taxonomy always shares at least the root.
    return 2.0 * best_depth / (static_cast<double>(depth_[a]) + static_cast<double>(depth_[b]));
}

double Taxonomy::wup_similarity(const std::string& a, const std::string& b) const {
    auto ia = word_senses_.find(a);
    auto ib = word_senses_.find(b);
    if (ia == word_senses_.end() || ib == word_senses_.end()) {
        return a == b ? 1.0 : 0.0;  // exact-match indicator fallback
    }
    if (a == b) return 1.0;

    const std::string key = a < b ? a + '\x1f' + b : b + '\x1f' + a;
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = pair_cache_.find(key);
        if (it != pair_cache_.end()) return it->second;
    }

    double best = 0.0;
    for (std::uint32_t sa : ia->second) {
        for (std::uint32_t sb : ib->second) {
            best = std::max(best, sense_pair_wup(sa, sb));
        }
    }
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        pair_cache_.emplace(key, best);
    }
    return best;
}

double Taxonomy::mu_thresholded(const std::string& a, const std::string& b, double tau) const {
    if (tau < 0.0 || tau > 1.0) throw Error("range", "mu threshold must lie in [0, 1]");
    const double s = wup_similarity(a, b);
    return s >= tau ? s : sub_threshold_factor_ * s;
}

void Taxonomy::set_sub_threshold_factor(double f) {
    if (f < 0.0 || f > 1.0) throw Error("range", "sub-threshold factor must lie in [0, 1]");
    sub_threshold_factor_ = f;
}

}  // namespace ayn

#include "ayn/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ayn/error.hpp"
#include "ayn/rng.hpp"
#include "ayn/taxonomy.hpp"
#include "doctest.h"

using ayn::Agreement;
using ayn::AnswerSet;
using ayn::ConsensusMode;
using ayn::Error;
using ayn::EvalInstance;
using ayn::Taxonomy;

namespace {

Taxonomy animal_fixture() {
    return Taxonomy::build(
        {{"animal", "entity"}, {"cat", "animal"}, {"dog", "animal"}, {"entity", "root"}},
        {{"cat", {"cat"}}, {"dog", {"dog"}}, {"animal", {"animal"}}});
}

}  // namespace

TEST_CASE("answer normalization") {
    CHECK(ayn::normalize_answer("  Cat. ") == "cat");
    CHECK(ayn::normalize_answer("TABLE,") == "table");
    CHECK(ayn::normalize_answer("blue") == "blue");
    CHECK(ayn::normalize_answer("cat..") == "cat");
    CHECK(ayn::normalize_answer("cat . ") == "cat");
    CHECK(ayn::normalize_answer("what?!") == "what");
    CHECK(ayn::normalize_answer("!,.") == "");
    CHECK(ayn::normalize_answer("   ") == "");
    CHECK(ayn::normalize_answer("3") == "3");
    // Interior punctuation survives; only the trailing run is stripped.
    CHECK(ayn::normalize_answer("waste-bin") == "waste-bin");
}

TEST_CASE("answer sets: split on commas, sort, dedup") {
    CHECK(ayn::normalize_answer_set("Chair, table") == AnswerSet{"chair", "table"});
    CHECK(ayn::normalize_answer_set("table, chair") == AnswerSet{"chair", "table"});
    CHECK(ayn::normalize_answer_set("cat,cat, CAT.") == AnswerSet{"cat"});
    CHECK(ayn::normalize_answer_set("knife, fork , spoon.") == AnswerSet{"fork", "knife", "spoon"});
    CHECK(ayn::normalize_answer_set(" , ,") == AnswerSet{});
    CHECK(ayn::normalize_answer_set("blue") == AnswerSet{"blue"});
}

TEST_CASE("answer_set_to_string round-trips a normalized set") {
    AnswerSet s{"chair", "table"};
    CHECK(ayn::answer_set_to_string(s) == "chair, table");
    CHECK(ayn::normalize_answer_set(ayn::answer_set_to_string(s)) == s);
    CHECK(ayn::answer_set_to_string({}) == "");
    CHECK(ayn::answer_set_to_string({"cat"}) == "cat");
}

TEST_CASE("per-instance score: min of the two directional products") {
    auto indicator = ayn::make_indicator_mu();

    CHECK(ayn::wups_instance({"cat"}, {"cat"}, indicator) == 1.0);
    // Extra predicted word zeroes the forward product: min(1*0, 1) = 0.
    CHECK(ayn::wups_instance({"cat", "mat"}, {"cat"}, indicator) == 0.0);
    CHECK(ayn::wups_instance({"cat"}, {"cat", "mat"}, indicator) == 0.0);
    CHECK(ayn::wups_instance({"chair", "table"}, {"table", "chair"}, indicator) == 1.0);

    Taxonomy t = animal_fixture();
    auto mu09 = ayn::make_taxonomy_mu(t, 0.9);
    auto mu00 = ayn::make_taxonomy_mu(t, 0.0);
    CHECK(ayn::wups_instance({"cat"}, {"dog"}, mu09) == doctest::Approx(0.075).epsilon(1e-15));
    CHECK(ayn::wups_instance({"cat"}, {"dog"}, mu00) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(ayn::wups_instance({"cat"}, {"cat"}, mu09) == 1.0);

    CHECK_THROWS_AS(ayn::wups_instance({}, {"cat"}, indicator), Error);
    CHECK_THROWS_AS(ayn::wups_instance({"cat"}, {}, indicator), Error);
    CHECK_THROWS_AS(ayn::make_taxonomy_mu(t, 1.5), Error);
}

TEST_CASE("per-instance score is symmetric") {
    Taxonomy t = animal_fixture();
    auto mu = ayn::make_taxonomy_mu(t, 0.9);
    std::vector<AnswerSet> sets{{"cat"}, {"dog"}, {"cat", "dog"}, {"animal"}, {"table"}, {"cat", "table"}};
    for (const auto& a : sets) {
        for (const auto& b : sets) {
            CHECK(ayn::wups_instance(a, b, mu) == ayn::wups_instance(b, a, mu));
        }
    }
}

TEST_CASE("corpus score: mean over instances, reported as a percentage") {
    auto indicator = ayn::make_indicator_mu();
    std::vector<EvalInstance> all_right{
        {{"cat"}, {{"cat"}}},
        {{"chair", "table"}, {{"chair", "table"}}},
    };
    CHECK(ayn::wups_corpus(all_right, indicator) == 100.0);

    std::vector<EvalInstance> half{
        {{"cat"}, {{"cat"}}},
        {{"cat"}, {{"dog"}}},
    };
    CHECK(ayn::wups_corpus(half, indicator) == 50.0);

    // Empty prediction counts as a zero-scoring miss, not an error.
    std::vector<EvalInstance> with_empty{
        {{}, {{"cat"}}},
        {{"cat"}, {{"cat"}}},
    };
    CHECK(ayn::wups_corpus(with_empty, indicator) == 50.0);

    CHECK_THROWS_AS(ayn::wups_corpus({}, indicator), Error);
    std::vector<EvalInstance> no_ref{{{"cat"}, {}}};
    CHECK_THROWS_AS(ayn::wups_corpus(no_ref, indicator), Error);
}

TEST_CASE("indicator corpus score equals exact set-match accuracy bit-for-bit") {
    ayn::Rng rng(77);
    std::vector<std::string> vocab{"cat", "dog", "chair", "table", "blue", "red", "3"};
    std::vector<EvalInstance> instances;
    std::size_t exact = 0;
    for (int i = 0; i < 157; ++i) {
        AnswerSet pred, ref;
        for (std::size_t k = 0, n = 1 + rng.index(2); k < n; ++k) pred.push_back(vocab[rng.index(vocab.size())]);
        for (std::size_t k = 0, n = 1 + rng.index(2); k < n; ++k) ref.push_back(vocab[rng.index(vocab.size())]);
        std::sort(pred.begin(), pred.end());
        pred.erase(std::unique(pred.begin(), pred.end()), pred.end());
        std::sort(ref.begin(), ref.end());
        ref.erase(std::unique(ref.begin(), ref.end()), ref.end());
        if (pred == ref) ++exact;
        instances.push_back({pred, {ref}});
    }
    double expected = 100.0 * static_cast<double>(exact) / static_cast<double>(instances.size());
    CHECK(ayn::wups_corpus(instances, ayn::make_indicator_mu()) == expected);
}

TEST_CASE("consensus: average vs best-reference") {
    auto indicator = ayn::make_indicator_mu();

    std::vector<EvalInstance> split_refs{{{"cat"}, {{"cat"}, {"dog"}}}};
    CHECK(ayn::consensus_score(split_refs, indicator, ConsensusMode::average) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(ayn::consensus_score(split_refs, indicator, ConsensusMode::min) == 1.0);

    // One reference: both modes collapse to the single-reference score.
    std::vector<EvalInstance> single{{{"cat"}, {{"cat"}}}, {{"cat"}, {{"dog"}}}};
    double acm = ayn::consensus_score(single, indicator, ConsensusMode::average);
    double mcm = ayn::consensus_score(single, indicator, ConsensusMode::min);
    CHECK(acm == mcm);
    CHECK(acm == doctest::Approx(ayn::wups_corpus(single, indicator) / 100.0).epsilon(1e-15));

    std::vector<EvalInstance> unanimous{{{"cat"}, {{"cat"}, {"cat"}, {"cat"}}}};
    CHECK(ayn::consensus_score(unanimous, indicator, ConsensusMode::average) == 1.0);
    CHECK(ayn::consensus_score(unanimous, indicator, ConsensusMode::min) == 1.0);

    CHECK_THROWS_AS(ayn::consensus_score({}, indicator, ConsensusMode::average), Error);
    std::vector<EvalInstance> no_ref{{{"cat"}, {}}};
    CHECK_THROWS_AS(ayn::consensus_score(no_ref, indicator, ConsensusMode::min), Error);
}

TEST_CASE("best-reference consensus dominates the average on random corpora") {
    Taxonomy t = animal_fixture();
    auto mu = ayn::make_taxonomy_mu(t, 0.9);
    std::vector<std::string> vocab{"cat", "dog", "animal", "table"};
    ayn::Rng rng(12345);
    std::vector<EvalInstance> instances;
    for (int i = 0; i < 200; ++i) {
        EvalInstance inst;
        inst.predicted = {vocab[rng.index(vocab.size())]};
        for (int k = 0; k < 5; ++k) inst.references.push_back({vocab[rng.index(vocab.size())]});
        instances.push_back(std::move(inst));
    }
    double acm = ayn::consensus_score(instances, mu, ConsensusMode::average);
    double mcm = ayn::consensus_score(instances, mu, ConsensusMode::min);
    CHECK(acm <= mcm);
    CHECK(acm >= 0.0);
    CHECK(mcm <= 1.0);
    // Per-instance, too.
    for (const auto& inst : instances) {
        std::vector<EvalInstance> one{inst};
        CHECK(ayn::consensus_score(one, mu, ConsensusMode::average) <=
              ayn::consensus_score(one, mu, ConsensusMode::min));
    }
}

TEST_CASE("human-consensus accuracy: matches capped at three") {
    std::vector<std::string> humans10{"blue", "blue", "Blue ", "blue.", "red", "red", "green", "grey", "white", "black"};
    CHECK(ayn::vqa_accuracy("blue", humans10) == 1.0);  // 4 matches incl. normalization
    CHECK(ayn::vqa_accuracy("red", humans10) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(ayn::vqa_accuracy("green", humans10) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(ayn::vqa_accuracy("purple", humans10) == 0.0);
    CHECK(ayn::vqa_accuracy("BLUE", humans10) == 1.0);
    CHECK_THROWS_AS(ayn::vqa_accuracy("blue", {}), Error);
    // Formula is independent of how many humans there are.
    CHECK(ayn::vqa_accuracy("a", {"a", "a", "a"}) == 1.0);
    CHECK(ayn::vqa_accuracy("a", {"a", "b"}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("agreement buckets by top answer multiplicity") {
    AnswerSet a{"a"}, b{"b"}, c{"c"}, d{"d"}, e{"e"};
    CHECK(ayn::agreement_split({a, a, a, a, a}) == Agreement::full);
    CHECK(ayn::agreement_split({a, a, a, b, c}) == Agreement::at_least_half);  // m=3 >= ceil(5/2)
    CHECK(ayn::agreement_split({a, b, c, d, e}) == Agreement::none);
    CHECK(ayn::agreement_split({a, a, b, c, d}) == Agreement::partial);  // m=2 < 3
    CHECK(ayn::agreement_split({a, a, b, b, c}) == Agreement::partial);
    CHECK(ayn::agreement_split({a, a}) == Agreement::full);
    CHECK(ayn::agreement_split({a, b}) == Agreement::none);  // m=1 wins over m>=ceil(2/2)
    CHECK(ayn::agreement_split({a, a, b}) == Agreement::at_least_half);
    CHECK_THROWS_AS(ayn::agreement_split({a}), Error);
    CHECK_THROWS_AS(ayn::agreement_split({}), Error);

    CHECK(ayn::to_string(Agreement::none) == "none");
    CHECK(ayn::to_string(Agreement::partial) == "partial");
    CHECK(ayn::to_string(Agreement::at_least_half) == "at-least-half");
    CHECK(ayn::to_string(Agreement::full) == "full");
}

// ---------------------------------------------------------------------------
// Independent oracle: a deliberately naive reimplementation of word
// similarity and corpus scoring, used to cross-check the production code
// on randomized taxonomies.

namespace {

struct NaiveTaxonomy {
    std::map<std::string, std::vector<std::string>> parents;  // child -> parents
    std::map<std::string, std::vector<std::string>> senses;   // word -> nodes
    std::string root;

    std::size_t depth(const std::string& node) const {
        if (node == root) return 1;
        std::size_t best = 0;
        for (const auto& p : parents.at(node)) best = std::max(best, depth(p));
        return best + 1;
    }

    std::set<std::string> ancestors(const std::string& node) const {
        std::set<std::string> out{node};
        auto it = parents.find(node);
        if (it != parents.end()) {
            for (const auto& p : it->second) {
                auto up = ancestors(p);
                out.insert(up.begin(), up.end());
            }
        }
        return out;
    }

    double node_pair(const std::string& a, const std::string& b) const {
        std::set<std::string> shared;
        auto aa = ancestors(a);
        for (const auto& anc : ancestors(b)) {
            if (aa.count(anc)) shared.insert(anc);
        }
        std::size_t lcs_depth = 0;
        for (const auto& s : shared) lcs_depth = std::max(lcs_depth, depth(s));
        return 2.0 * static_cast<double>(lcs_depth) /
               (static_cast<double>(depth(a)) + static_cast<double>(depth(b)));
    }

    double wup(const std::string& a, const std::string& b) const {
        auto ia = senses.find(a);
        auto ib = senses.find(b);
        if (ia == senses.end() || ib == senses.end()) return a == b ? 1.0 : 0.0;
        if (a == b) return 1.0;
        double best = 0.0;
        for (const auto& sa : ia->second) {
            for (const auto& sb : ib->second) best = std::max(best, node_pair(sa, sb));
        }
        return best;
    }

    double mu(const std::string& a, const std::string& b, double tau) const {
        double s = wup(a, b);
        return s >= tau ? s : 0.1 * s;
    }
};

double naive_instance(const AnswerSet& pred, const AnswerSet& ref, const NaiveTaxonomy& t, double tau) {
    double forward = 1.0, backward = 1.0;
    for (const auto& a : pred) {
        double best = 0.0;
        for (const auto& r : ref) best = std::max(best, t.mu(a, r, tau));
        forward *= best;
    }
    for (const auto& r : ref) {
        double best = 0.0;
        for (const auto& a : pred) best = std::max(best, t.mu(r, a, tau));
        backward *= best;
    }
    return std::min(forward, backward);
}

struct RandomWorld {
    std::vector<std::pair<std::string, std::string>> edges;
    std::vector<std::pair<std::string, std::vector<std::string>>> word_map;
    NaiveTaxonomy naive;
    std::vector<std::string> words;
};

RandomWorld make_random_world(std::uint64_t seed, std::size_t n_nodes) {
    ayn::Rng rng(seed);
    RandomWorld w;
    std::vector<std::string> nodes;
    for (std::size_t i = 0; i < n_nodes; ++i) nodes.push_back("n" + std::to_string(i));
    w.naive.root = nodes[0];
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t i = 1; i < n_nodes; ++i) {
        std::size_t p = rng.index(i);
        w.edges.emplace_back(nodes[i], nodes[p]);
        seen.emplace(nodes[i], nodes[p]);
        w.naive.parents[nodes[i]].push_back(nodes[p]);
        if (i >= 2 && rng.uniform() < 0.35) {
            std::size_t q = rng.index(i);
            if (!seen.count({nodes[i], nodes[q]})) {
                w.edges.emplace_back(nodes[i], nodes[q]);
                w.naive.parents[nodes[i]].push_back(nodes[q]);
            }
        }
    }
    for (std::size_t i = 0; i < n_nodes; ++i) {
        std::vector<std::string> senses{nodes[i]};
        if (rng.uniform() < 0.25) senses.push_back(nodes[rng.index(n_nodes)]);
        std::sort(senses.begin(), senses.end());
        senses.erase(std::unique(senses.begin(), senses.end()), senses.end());
        std::string word = "w" + std::to_string(i);
        w.word_map.emplace_back(word, senses);
        w.naive.senses[word] = senses;
        w.words.push_back(word);
    }
    w.words.push_back("off-taxonomy");  // exercises the indicator fallback
    return w;
}

}  // namespace

TEST_CASE("random 50-node taxonomy matches the naive oracle") {
    RandomWorld w = make_random_world(424242, 50);
    Taxonomy t = Taxonomy::build(w.edges, w.word_map);

    ayn::Rng rng(5150);
    for (int trial = 0; trial < 200; ++trial) {
        const std::string& a = w.words[rng.index(w.words.size())];
        const std::string& b = w.words[rng.index(w.words.size())];
        double got = t.wup_similarity(a, b);
        double want = w.naive.wup(a, b);
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
        for (double tau : {0.0, 0.9}) {
            CHECK(t.mu_thresholded(a, b, tau) == doctest::Approx(w.naive.mu(a, b, tau)).epsilon(1e-12));
        }
    }
}

TEST_CASE("random corpus scores match the naive oracle") {
    RandomWorld w = make_random_world(99991, 50);
    Taxonomy t = Taxonomy::build(w.edges, w.word_map);

    ayn::Rng rng(31337);
    std::vector<EvalInstance> instances;
    for (int i = 0; i < 200; ++i) {
        EvalInstance inst;
        for (std::size_t k = 0, n = 1 + rng.index(2); k < n; ++k) {
            inst.predicted.push_back(w.words[rng.index(w.words.size())]);
        }
        std::sort(inst.predicted.begin(), inst.predicted.end());
        inst.predicted.erase(std::unique(inst.predicted.begin(), inst.predicted.end()), inst.predicted.end());
        AnswerSet ref;
        for (std::size_t k = 0, n = 1 + rng.index(2); k < n; ++k) {
            ref.push_back(w.words[rng.index(w.words.size())]);
        }
        std::sort(ref.begin(), ref.end());
        ref.erase(std::unique(ref.begin(), ref.end()), ref.end());
        inst.references.push_back(std::move(ref));
        instances.push_back(std::move(inst));
    }

    for (double tau : {0.0, 0.9}) {
        auto mu = ayn::make_taxonomy_mu(t, tau);
        double got = ayn::wups_corpus(instances, mu);
        double want = 0.0;
        for (const auto& inst : instances) want += naive_instance(inst.predicted, inst.references[0], w.naive, tau);
        want = 100.0 * want / static_cast<double>(instances.size());
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }

    // Metric ordering on the same corpus: exact match <= strict <= forgiving.
    double accuracy = ayn::wups_corpus(instances, ayn::make_indicator_mu());
    double wups09 = ayn::wups_corpus(instances, ayn::make_taxonomy_mu(t, 0.9));
    double wups00 = ayn::wups_corpus(instances, ayn::make_taxonomy_mu(t, 0.0));
    CHECK(accuracy <= wups09);
    CHECK(wups09 <= wups00);
    CHECK(wups00 <= 100.0 + 1e-12);
}

#include <benchmark/benchmark.h>

#include <string>
#include <utility>
#include <vector>

#include "ayn/metrics.hpp"
#include "ayn/rng.hpp"
#include "ayn/taxonomy.hpp"

namespace {

struct ScoringFixture {
    ayn::Taxonomy taxonomy;
    std::vector<ayn::EvalInstance> corpus;       // K = 1
    std::vector<ayn::EvalInstance> consensus;    // K = 5
};

// Random 200-node tree, 80 mapped words, 500 scored instances.
ScoringFixture make_scoring_fixture() {
    ayn::Rng rng(59);
    std::vector<std::pair<std::string, std::string>> edges;
    for (int i = 1; i < 200; ++i) {
        edges.push_back({"n" + std::to_string(i),
                         "n" + std::to_string(rng.index(static_cast<std::size_t>(i)))});
    }
    std::vector<std::pair<std::string, std::vector<std::string>>> word_map;
    std::vector<std::string> pool;
    for (int w = 0; w < 80; ++w) {
        const std::string word = "word" + std::to_string(w);
        word_map.push_back({word, {"n" + std::to_string(rng.index(200))}});
        pool.push_back(word);
    }
    auto random_set = [&](std::size_t max_len) {
        ayn::AnswerSet set;
        for (std::size_t i = 0, n = 1 + rng.index(max_len); i < n; ++i) {
            set.push_back(pool[rng.index(pool.size())]);
        }
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
        return set;
    };
    ScoringFixture fx{ayn::Taxonomy::build(edges, word_map), {}, {}};
    for (int i = 0; i < 500; ++i) {
        fx.corpus.push_back({random_set(2), {random_set(3)}});
        ayn::EvalInstance multi;
        multi.predicted = random_set(2);
        for (int k = 0; k < 5; ++k) multi.references.push_back(random_set(3));
        fx.consensus.push_back(std::move(multi));
    }
    return fx;
}

void bm_corpus_score_taxonomy(benchmark::State& state) {
    const ScoringFixture fx = make_scoring_fixture();
    const auto mu = ayn::make_taxonomy_mu(fx.taxonomy, 0.9);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ayn::wups_corpus(fx.corpus, mu));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(fx.corpus.size()));
}

void bm_corpus_score_exact(benchmark::State& state) {
    const ScoringFixture fx = make_scoring_fixture();
    const auto mu = ayn::make_indicator_mu();
    for (auto _ : state) {
        benchmark::DoNotOptimize(ayn::wups_corpus(fx.corpus, mu));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(fx.corpus.size()));
}

void bm_consensus_min(benchmark::State& state) {
    const ScoringFixture fx = make_scoring_fixture();
    const auto mu = ayn::make_taxonomy_mu(fx.taxonomy, 0.9);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            ayn::consensus_score(fx.consensus, mu, ayn::ConsensusMode::min));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(fx.consensus.size()));
}

}  // namespace

BENCHMARK(bm_corpus_score_taxonomy);
BENCHMARK(bm_corpus_score_exact);
BENCHMARK(bm_consensus_min);

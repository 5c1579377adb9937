#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "ayn/data.hpp"
#include "ayn/model.hpp"
#include "ayn/rng.hpp"

namespace {

struct Fixture {
    ayn::VqaModel model;
    std::vector<std::string> question;
    std::vector<double> feature;
    ayn::AnswerSet target;
};

// A corpus just big enough to give the model a realistic vocabulary.
Fixture make_fixture(ayn::EncoderKind encoder, std::size_t hidden) {
    ayn::Rng rng(17);
    std::vector<ayn::QAInstance> train;
    ayn::VisualFeatureStore features(64);
    const std::vector<std::string> answers = {"mug", "lamp", "chair", "sofa", "table", "3"};
    for (std::size_t i = 0; i < 32; ++i) {
        ayn::QAInstance inst;
        inst.id = "b" + std::to_string(i);
        inst.image_id = "img" + std::to_string(i % 8);
        for (std::size_t t = 0; t < 10; ++t) {
            inst.question_tokens.push_back("w" + std::to_string(rng.index(100)));
        }
        inst.answers.push_back({answers[i % answers.size()]});
        train.push_back(std::move(inst));
    }
    for (std::size_t i = 0; i < 8; ++i) {
        std::vector<double> f(64);
        for (double& v : f) v = rng.uniform(-1.0, 1.0);
        features.insert("img" + std::to_string(i), f);
    }

    ayn::RunConfig config;
    config.encoder = encoder;
    config.embed_dim = 32;
    config.hidden_dim = hidden;
    config.cnn_views = 3;
    config.cnn_feature_maps = hidden;
    config.fusion = ayn::FusionMode::concat;
    config.top_k = 10;
    config.seed = 17;

    Fixture fx{ayn::build_model(config, train, features), train[0].question_tokens,
               features.get(train[0].image_id), train[0].answers[0]};
    return fx;
}

// One training step's worth of work: build the graph, run the loss, and
// backpropagate into every parameter.
void train_step_loop(benchmark::State& state, ayn::EncoderKind encoder) {
    Fixture fx = make_fixture(encoder, static_cast<std::size_t>(state.range(0)));
    const auto params = fx.model.parameters();
    for (auto _ : state) {
        const double loss =
            ayn::instance_loss(fx.model, fx.question, fx.feature, fx.target, true);
        benchmark::DoNotOptimize(loss);
        for (ayn::Tensor* p : params) p->zero_grad();
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}

void bm_train_step_bow(benchmark::State& state) { train_step_loop(state, ayn::EncoderKind::bow); }
void bm_train_step_lstm(benchmark::State& state) { train_step_loop(state, ayn::EncoderKind::lstm); }
void bm_train_step_gru(benchmark::State& state) { train_step_loop(state, ayn::EncoderKind::gru); }
void bm_train_step_cnn(benchmark::State& state) { train_step_loop(state, ayn::EncoderKind::cnn); }

// Inference path: plain tensors, no graph.
void bm_predict_lstm(benchmark::State& state) {
    Fixture fx = make_fixture(ayn::EncoderKind::lstm, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        const ayn::AnswerSet out = ayn::predict_instance(fx.model, fx.question, fx.feature);
        benchmark::DoNotOptimize(out.size());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}

}  // namespace

BENCHMARK(bm_train_step_bow)->Arg(64)->Arg(128);
BENCHMARK(bm_train_step_lstm)->Arg(64)->Arg(128);
BENCHMARK(bm_train_step_gru)->Arg(64)->Arg(128);
BENCHMARK(bm_train_step_cnn)->Arg(64)->Arg(128);
BENCHMARK(bm_predict_lstm)->Arg(64)->Arg(128);

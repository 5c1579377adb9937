#include <doctest.h>

#include <array>
#include <cmath>

#include "ayn/embedding.hpp"
#include "ayn/encoders.hpp"
#include "ayn/error.hpp"
#include "ayn/gradcheck.hpp"
#include "ayn/rng.hpp"

using namespace ayn;

namespace {

LstmParams zero_lstm(std::size_t input_dim, std::size_t hidden_dim) {
    Rng rng(0);
    LstmParams p = LstmParams::init(input_dim, hidden_dim, rng);
    for (Tensor* t : p.parameters()) {
        for (double& x : t->data) x = 0.0;
    }
    return p;
}

GruParams zero_gru(std::size_t input_dim, std::size_t hidden_dim) {
    Rng rng(0);
    GruParams p = GruParams::init(input_dim, hidden_dim, rng);
    for (Tensor* t : p.parameters()) {
        for (double& x : t->data) x = 0.0;
    }
    return p;
}

}  // namespace

TEST_CASE("recurrent step with all-zero parameters from the zero state") {
    LstmParams p = zero_lstm(2, 1);
    RecurrentState s = lstm_step(Tensor::vector({0.7, -0.3}), zero_state(1), p);
    // gates are sigmoid(0) = 0.5, candidate tanh(0) = 0 -> everything stays 0
    CHECK(s.c.data[0] == doctest::Approx(0.0));
    CHECK(s.h.data[0] == doctest::Approx(0.0));
}

TEST_CASE("lstm step with zero parameters and carried memory cell") {
    LstmParams p = zero_lstm(2, 1);
    RecurrentState prev{Tensor::vector({0.0}), Tensor::vector({1.0})};
    RecurrentState s = lstm_step(Tensor::vector({5.0, -5.0}), prev, p);
    // c = 0.5 * 1 + 0.5 * 0; h = 0.5 * tanh(0.5)
    CHECK(s.c.data[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.h.data[0] == doctest::Approx(0.23105857863000487).epsilon(1e-10));
}

TEST_CASE("saturated forget gate makes the cell additive") {
    LstmParams p = zero_lstm(1, 1);
    p.forget_gate.bias.data[0] = 100.0;  // forget gate pinned at 1
    p.candidate.bias.data[0] = 0.5;      // candidate tanh(0.5)
    RecurrentState prev{Tensor::vector({0.0}), Tensor::vector({0.3})};
    RecurrentState s = lstm_step(Tensor::vector({0.0}), prev, p);
    // c ~= c_prev + i*g = 0.3 + 0.5 * tanh(0.5)
    CHECK(s.c.data[0] == doctest::Approx(0.3 + 0.5 * std::tanh(0.5)).epsilon(1e-12));
}

TEST_CASE("gru step with zero parameters halves the previous hidden state") {
    GruParams p = zero_gru(2, 1);
    RecurrentState prev{Tensor::vector({1.0}), Tensor::vector({1.0})};
    RecurrentState s = gru_step(Tensor::vector({2.0, 3.0}), prev, p);
    // r = u = 0.5, candidate = tanh(0) = 0, h = 0.5*1 + 0.5*0
    CHECK(s.h.data[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("saturated update gate copies or discards the previous state") {
    GruParams copy = zero_gru(1, 1);
    copy.update_gate.bias.data[0] = 100.0;  // u -> 1: pure copy
    RecurrentState prev{Tensor::vector({0.73}), Tensor::vector({0.73})};
    RecurrentState s = gru_step(Tensor::vector({9.0}), prev, copy);
    CHECK(s.h.data[0] == doctest::Approx(0.73).epsilon(1e-12));

    GruParams fresh = zero_gru(1, 1);
    fresh.update_gate.bias.data[0] = -100.0;  // u -> 0: candidate only
    RecurrentState s2 = gru_step(Tensor::vector({9.0}), prev, fresh);
    CHECK(s2.h.data[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("hidden state stays inside [-1, 1] for random inputs") {
    Rng rng(21);
    LstmParams lstm = LstmParams::init(3, 4, rng);
    GruParams gru = GruParams::init(3, 4, rng);
    RecurrentState ls = zero_state(4);
    RecurrentState gs = zero_state(4);
    for (int t = 0; t < 20; ++t) {
        Tensor v = Tensor::zeros({3});
        for (double& x : v.data) x = rng.uniform(-5.0, 5.0);
        ls = lstm_step(v, ls, lstm);
        gs = gru_step(v, gs, gru);
        for (double h : ls.h.data) {
            CHECK(h >= -1.0);
            CHECK(h <= 1.0);
        }
        for (double h : gs.h.data) {
            CHECK(h >= -1.0);
            CHECK(h <= 1.0);
        }
    }
}

TEST_CASE("bag-of-words encoding is the column sum and ignores order") {
    Tensor embedded = Tensor::matrix(3, 2, {1.0, 10.0, 2.0, 20.0, 4.0, 40.0});
    Tensor enc = encode_bow(embedded);
    CHECK(enc.data[0] == doctest::Approx(7.0));
    CHECK(enc.data[1] == doctest::Approx(70.0));

    Tensor swapped = Tensor::matrix(3, 2, {4.0, 40.0, 2.0, 20.0, 1.0, 10.0});
    Tensor enc2 = encode_bow(swapped);
    CHECK(enc.data[0] == enc2.data[0]);
    CHECK(enc.data[1] == enc2.data[1]);

    Tensor single = Tensor::matrix(1, 2, {3.5, -1.0});
    Tensor enc3 = encode_bow(single);
    CHECK(enc3.data[0] == 3.5);
    CHECK(enc3.data[1] == -1.0);
}

TEST_CASE("identity embeddings turn bag-of-words into a word histogram") {
    Rng rng(3);
    EmbeddingTable table = EmbeddingTable::learned({"red", "blue"}, 3, rng);
    table.weights() = Tensor::identity(3);
    Tensor enc = encode_bow(table.embed_tokens({"red", "blue", "red"}));
    CHECK(enc.data[0] == 0.0);  // UNK count
    CHECK(enc.data[1] == 2.0);  // red
    CHECK(enc.data[2] == 1.0);  // blue
}

TEST_CASE("sequence encoding with zero parameters collapses to zero") {
    Rng rng(4);
    EmbeddingTable table = EmbeddingTable::learned({"is", "there", "a", "chair"}, 3, rng);
    LstmParams lstm = zero_lstm(3, 2);
    Tensor h = encode_sequence({"is", "there", "a", "chair"}, table, CellKind::lstm, &lstm, nullptr);
    for (double x : h.data) CHECK(x == doctest::Approx(0.0));

    GruParams gru = zero_gru(3, 2);
    Tensor hg = encode_sequence({"is", "there"}, table, CellKind::gru, nullptr, &gru);
    for (double x : hg.data) CHECK(x == doctest::Approx(0.0));
}

TEST_CASE("sequence encoding equals manual step-by-step unrolling") {
    Rng rng(5);
    EmbeddingTable table = EmbeddingTable::learned({"what", "color", "chair"}, 3, rng);
    LstmParams lstm = LstmParams::init(3, 4, rng);

    const std::vector<std::string> tokens{"what", "color", "chair"};
    Tensor h = encode_sequence(tokens, table, CellKind::lstm, &lstm, nullptr);

    Tensor embedded = table.embed_tokens(tokens);
    RecurrentState state = zero_state(4);
    for (std::size_t t = 0; t < 3; ++t) {
        Tensor row = Tensor::zeros({3});
        for (std::size_t c = 0; c < 3; ++c) row.data[c] = embedded.at(t, c);
        state = lstm_step(row, state, lstm);
    }
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(h.data[i] == doctest::Approx(state.h.data[i]).epsilon(1e-14));
    }

    // A single token is exactly one step.
    Tensor h1 = encode_sequence({"what"}, table, CellKind::lstm, &lstm, nullptr);
    Tensor row0 = Tensor::zeros({3});
    for (std::size_t c = 0; c < 3; ++c) row0.data[c] = embedded.at(0, c);
    RecurrentState one = lstm_step(row0, zero_state(4), lstm);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(h1.data[i] == doctest::Approx(one.h.data[i]).epsilon(1e-14));
    }
}

TEST_CASE("recurrent encoders are order-sensitive where bag-of-words is not") {
    Rng rng(6);
    EmbeddingTable table = EmbeddingTable::learned({"red", "chair", "sofa", "left"}, 4, rng);
    LstmParams lstm = LstmParams::init(4, 4, rng);
    GruParams gru = GruParams::init(4, 4, rng);

    const std::vector<std::string> a{"red", "chair", "sofa", "left"};
    const std::vector<std::string> b{"red", "sofa", "chair", "left"};

    Tensor bow_a = encode_bow(table.embed_tokens(a));
    Tensor bow_b = encode_bow(table.embed_tokens(b));
    for (std::size_t i = 0; i < 4; ++i) CHECK(bow_a.data[i] == bow_b.data[i]);

    Tensor la = encode_sequence(a, table, CellKind::lstm, &lstm, nullptr);
    Tensor lb = encode_sequence(b, table, CellKind::lstm, &lstm, nullptr);
    double diff = 0.0;
    for (std::size_t i = 0; i < 4; ++i) diff += std::abs(la.data[i] - lb.data[i]);
    CHECK(diff > 1e-9);

    Tensor ga = encode_sequence(a, table, CellKind::gru, nullptr, &gru);
    Tensor gb = encode_sequence(b, table, CellKind::gru, nullptr, &gru);
    double gdiff = 0.0;
    for (std::size_t i = 0; i < 4; ++i) gdiff += std::abs(ga.data[i] - gb.data[i]);
    CHECK(gdiff > 1e-9);
}

TEST_CASE("width-1 identity convolution with linear activation is bag-of-words") {
    const std::size_t d = 3;
    TextCnnParams params;
    params.activation = CnnActivation::linear;
    params.aggregation = CnnAggregation::sum_pool;
    TextCnnView view;
    view.width = 1;
    view.kernel = Tensor::identity(d);
    view.bias = Tensor::zeros({d});
    params.views.push_back(std::move(view));

    Tensor embedded = Tensor::matrix(4, d, {0.5, 1.0, -2.0, 3.0, 0.25, 1.5, -1.0, 2.0, 0.125, 4.0, -3.0, 0.75});
    Tensor cnn = encode_cnn(embedded, params);
    Tensor bow = encode_bow(embedded);
    REQUIRE(cnn.numel() == bow.numel());
    for (std::size_t i = 0; i < bow.numel(); ++i) {
        CHECK(cnn.data[i] == bow.data[i]);  // bit-for-bit
    }
}

TEST_CASE("width-2 all-ones kernel sums tanh of window totals") {
    TextCnnParams params;
    params.activation = CnnActivation::tanh;
    params.aggregation = CnnAggregation::sum_pool;
    TextCnnView view;
    view.width = 2;
    view.kernel = Tensor::matrix(1, 4, {1.0, 1.0, 1.0, 1.0});
    view.bias = Tensor::zeros({1});
    params.views.push_back(std::move(view));

    // windows: [1,0,0,1] -> tanh(2); [0,1,1,1] -> tanh(3)
    Tensor embedded = Tensor::matrix(3, 2, {1.0, 0.0, 0.0, 1.0, 1.0, 1.0});
    Tensor enc = encode_cnn(embedded, params);
    REQUIRE(enc.numel() == 1);
    CHECK(enc.data[0] == doctest::Approx(std::tanh(2.0) + std::tanh(3.0)).epsilon(1e-14));
    CHECK(enc.data[0] == doctest::Approx(1.9590823337625474).epsilon(1e-12));
}

TEST_CASE("sequences shorter than the widest view are zero-padded") {
    TextCnnParams params;
    params.activation = CnnActivation::tanh;
    params.aggregation = CnnAggregation::sum_pool;
    TextCnnView view;
    view.width = 3;
    view.kernel = Tensor::matrix(1, 6, {1.0, 1.0, 1.0, 1.0, 1.0, 1.0});
    view.bias = Tensor::zeros({1});
    params.views.push_back(std::move(view));

    Tensor embedded = Tensor::matrix(1, 2, {1.0, 2.0});
    Tensor enc = encode_cnn(embedded, params);
    REQUIRE(enc.numel() == 1);
    CHECK(std::isfinite(enc.data[0]));
    // window is [1,2,0,0,0,0] -> tanh(3)
    CHECK(enc.data[0] == doctest::Approx(std::tanh(3.0)).epsilon(1e-14));
}

TEST_CASE("multi-view cnn output is the concatenation of per-view encodings") {
    Rng rng(7);
    TextCnnParams params = TextCnnParams::init(3, 3, 5, CnnAggregation::sum_pool, rng);
    CHECK(params.views.size() == 3);
    CHECK(params.output_dim() == 15);

    Tensor embedded = Tensor::zeros({4, 3});
    for (double& x : embedded.data) x = rng.uniform(-1.0, 1.0);
    Tensor enc = encode_cnn(embedded, params);
    CHECK(enc.numel() == 15);
    for (double x : enc.data) CHECK(std::isfinite(x));
}

TEST_CASE("recurrent aggregation replaces sum pooling and keeps the dimension") {
    Rng rng(8);
    TextCnnParams params = TextCnnParams::init(3, 2, 4, CnnAggregation::rnn, rng);
    CHECK(params.output_dim() == 8);
    Tensor embedded = Tensor::zeros({5, 3});
    for (double& x : embedded.data) x = rng.uniform(-1.0, 1.0);
    Tensor enc = encode_cnn(embedded, params);
    CHECK(enc.numel() == 8);
    // Recurrent aggregation is order-sensitive, unlike sum pooling.
    Tensor reversed = Tensor::zeros({5, 3});
    for (std::size_t t = 0; t < 5; ++t) {
        for (std::size_t c = 0; c < 3; ++c) reversed.data[t * 3 + c] = embedded.data[(4 - t) * 3 + c];
    }
    Tensor enc2 = encode_cnn(reversed, params);
    double diff = 0.0;
    for (std::size_t i = 0; i < 8; ++i) diff += std::abs(enc.data[i] - enc2.data[i]);
    CHECK(diff > 1e-9);
}

TEST_CASE("every encoder passes a finite-difference gradient check") {
    Rng rng(9);
    const std::size_t d = 3, hidden = 3;
    EmbeddingTable table = EmbeddingTable::learned({"w1", "w2", "w3"}, d, rng);
    const std::vector<std::string> tokens{"w1", "w3", "w2"};

    SUBCASE("lstm") {
        LstmParams lstm = LstmParams::init(d, hidden, rng);
        Tensor head = Tensor::zeros({2, hidden});
        init_uniform_glorot(head, hidden, 2, rng);
        std::vector<Tensor*> params{&table.weights(), &head};
        for (Tensor* t : lstm.parameters()) params.push_back(t);
        auto loss = [&](bool grads) {
            Graph g;
            NodeId emb = g.param(table.weights());
            std::vector<NodeId> rows;
            for (const auto& tok : tokens) rows.push_back(g.row(emb, table.index_of(tok)));
            LstmParamIds ids = add_to_graph(g, lstm, true);
            NodeId h = encode_sequence(g, rows, CellKind::lstm, &ids, nullptr);
            NodeId out = g.cross_entropy(g.matvec(g.param(head), h), 1);
            if (grads) g.backward(out);
            return g.scalar_value(out);
        };
        CHECK(finite_difference_check(params, loss, 1e-5).max_rel_error < 1e-4);
    }

    SUBCASE("gru") {
        GruParams gru = GruParams::init(d, hidden, rng);
        Tensor head = Tensor::zeros({2, hidden});
        init_uniform_glorot(head, hidden, 2, rng);
        std::vector<Tensor*> params{&table.weights(), &head};
        for (Tensor* t : gru.parameters()) params.push_back(t);
        auto loss = [&](bool grads) {
            Graph g;
            NodeId emb = g.param(table.weights());
            std::vector<NodeId> rows;
            for (const auto& tok : tokens) rows.push_back(g.row(emb, table.index_of(tok)));
            GruParamIds ids = add_to_graph(g, gru, true);
            NodeId h = encode_sequence(g, rows, CellKind::gru, nullptr, &ids);
            NodeId out = g.cross_entropy(g.matvec(g.param(head), h), 0);
            if (grads) g.backward(out);
            return g.scalar_value(out);
        };
        CHECK(finite_difference_check(params, loss, 1e-5).max_rel_error < 1e-4);
    }

    SUBCASE("cnn sum-pool and cnn rnn") {
        for (CnnAggregation agg : {CnnAggregation::sum_pool, CnnAggregation::rnn}) {
            TextCnnParams cnn = TextCnnParams::init(d, 2, 3, agg, rng);
            Tensor head = Tensor::zeros({2, cnn.output_dim()});
            init_uniform_glorot(head, cnn.output_dim(), 2, rng);
            std::vector<Tensor*> params{&table.weights(), &head};
            for (Tensor* t : cnn.parameters()) params.push_back(t);
            auto loss = [&](bool grads) {
                Graph g;
                NodeId emb = g.param(table.weights());
                std::vector<NodeId> rows;
                for (const auto& tok : tokens) rows.push_back(g.row(emb, table.index_of(tok)));
                NodeId enc = encode_cnn(g, rows, cnn, true);
                NodeId out = g.cross_entropy(g.matvec(g.param(head), enc), 1);
                if (grads) g.backward(out);
                return g.scalar_value(out);
            };
            CHECK(finite_difference_check(params, loss, 1e-5).max_rel_error < 1e-4);
        }
    }

    SUBCASE("bow") {
        Tensor head = Tensor::zeros({2, d});
        init_uniform_glorot(head, d, 2, rng);
        std::vector<Tensor*> params{&table.weights(), &head};
        auto loss = [&](bool grads) {
            Graph g;
            NodeId emb = g.param(table.weights());
            std::vector<NodeId> rows;
            for (const auto& tok : tokens) rows.push_back(g.row(emb, table.index_of(tok)));
            NodeId enc = encode_bow(g, rows);
            NodeId out = g.cross_entropy(g.matvec(g.param(head), enc), 0);
            if (grads) g.backward(out);
            return g.scalar_value(out);
        };
        CHECK(finite_difference_check(params, loss, 1e-5).max_rel_error < 1e-4);
    }
}

TEST_CASE("encoder input validation") {
    Rng rng(10);
    EmbeddingTable table = EmbeddingTable::learned({"w"}, 2, rng);
    LstmParams lstm = LstmParams::init(2, 2, rng);
    CHECK_THROWS_AS(encode_sequence({}, table, CellKind::lstm, &lstm, nullptr), Error);
    CHECK_THROWS_AS(encode_sequence({"w"}, table, CellKind::lstm, nullptr, nullptr), Error);
    CHECK_THROWS_AS(cell_kind_from_string("elman"), Error);
    CHECK(cell_kind_from_string("lstm") == CellKind::lstm);
    CHECK(cell_kind_from_string("gru") == CellKind::gru);

    // Mismatched input dimension surfaces as a shape error.
    LstmParams wrong = LstmParams::init(5, 2, rng);
    CHECK_THROWS_AS(encode_sequence({"w"}, table, CellKind::lstm, &wrong, nullptr), Error);
}

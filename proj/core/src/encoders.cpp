#include "ayn/encoders.hpp"

#include <array>

#include "ayn/error.hpp"

namespace ayn {

CellKind cell_kind_from_string(const std::string& name) {
    if (name == "lstm") return CellKind::lstm;
    if (name == "gru") return CellKind::gru;
    throw Error("invalid-value", "unknown recurrent cell '" + name + "' (expected lstm or gru)");
}

std::string to_string(CellKind kind) { return kind == CellKind::lstm ? "lstm" : "gru"; }

CnnActivation cnn_activation_from_string(const std::string& name) {
    if (name == "tanh") return CnnActivation::tanh;
    if (name == "linear") return CnnActivation::linear;
    throw Error("invalid-value", "unknown convolution activation '" + name + "' (expected tanh or linear)");
}

std::string to_string(CnnActivation activation) {
    return activation == CnnActivation::tanh ? "tanh" : "linear";
}

CnnAggregation cnn_aggregation_from_string(const std::string& name) {
    if (name == "sum-pool" || name == "sum_pool") return CnnAggregation::sum_pool;
    if (name == "rnn") return CnnAggregation::rnn;
    throw Error("invalid-value", "unknown convolution aggregation '" + name + "' (expected sum-pool or rnn)");
}

std::string to_string(CnnAggregation aggregation) {
    return aggregation == CnnAggregation::sum_pool ? "sum-pool" : "rnn";
}

GateParams GateParams::init(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
    if (input_dim == 0 || hidden_dim == 0) {
        throw Error("invalid-value", "gate init: dimensions must be positive");
    }
    GateParams p;
    p.w_input = Tensor::zeros({hidden_dim, input_dim});
    p.w_hidden = Tensor::zeros({hidden_dim, hidden_dim});
    p.bias = Tensor::zeros({hidden_dim});
    init_uniform_glorot(p.w_input, input_dim, hidden_dim, rng);
    init_uniform_glorot(p.w_hidden, hidden_dim, hidden_dim, rng);
    return p;
}

LstmParams LstmParams::init(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
    LstmParams p;
    p.input_gate = GateParams::init(input_dim, hidden_dim, rng);
    p.forget_gate = GateParams::init(input_dim, hidden_dim, rng);
    p.output_gate = GateParams::init(input_dim, hidden_dim, rng);
    p.candidate = GateParams::init(input_dim, hidden_dim, rng);
    return p;
}

std::vector<Tensor*> LstmParams::parameters() {
    std::vector<Tensor*> out;
    for (GateParams* gp : {&input_gate, &forget_gate, &output_gate, &candidate}) {
        out.push_back(&gp->w_input);
        out.push_back(&gp->w_hidden);
        out.push_back(&gp->bias);
    }
    return out;
}

GruParams GruParams::init(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
    GruParams p;
    p.reset_gate = GateParams::init(input_dim, hidden_dim, rng);
    p.update_gate = GateParams::init(input_dim, hidden_dim, rng);
    p.candidate = GateParams::init(input_dim, hidden_dim, rng);
    return p;
}

std::vector<Tensor*> GruParams::parameters() {
    std::vector<Tensor*> out;
    for (GateParams* gp : {&reset_gate, &update_gate, &candidate}) {
        out.push_back(&gp->w_input);
        out.push_back(&gp->w_hidden);
        out.push_back(&gp->bias);
    }
    return out;
}

TextCnnParams TextCnnParams::init(std::size_t embed_dim, std::size_t num_views, std::size_t feature_maps,
                                  CnnAggregation aggregation, Rng& rng) {
    if (embed_dim == 0 || num_views == 0 || feature_maps == 0) {
        throw Error("invalid-value", "text cnn init: dimensions must be positive");
    }
    TextCnnParams p;
    p.aggregation = aggregation;
    for (std::size_t w = 1; w <= num_views; ++w) {
        TextCnnView view;
        view.width = w;
        view.kernel = Tensor::zeros({feature_maps, w * embed_dim});
        view.bias = Tensor::zeros({feature_maps});
        init_uniform_glorot(view.kernel, w * embed_dim, feature_maps, rng);
        if (aggregation == CnnAggregation::rnn) {
            view.rnn = LstmParams::init(feature_maps, feature_maps, rng);
        }
        p.views.push_back(std::move(view));
    }
    return p;
}

std::vector<Tensor*> TextCnnParams::parameters() {
    std::vector<Tensor*> out;
    for (auto& v : views) {
        out.push_back(&v.kernel);
        out.push_back(&v.bias);
        if (v.rnn) {
            auto inner = v.rnn->parameters();
            out.insert(out.end(), inner.begin(), inner.end());
        }
    }
    return out;
}

std::size_t TextCnnParams::output_dim() const {
    std::size_t total = 0;
    for (const auto& v : views) total += v.bias.numel();
    return total;
}

GateParamIds add_to_graph(Graph& g, GateParams& p, bool trainable) {
    auto node = [&](Tensor& t) { return trainable ? g.param(t) : g.input(t); };
    return GateParamIds{node(p.w_input), node(p.w_hidden), node(p.bias)};
}

LstmParamIds add_to_graph(Graph& g, LstmParams& p, bool trainable) {
    return LstmParamIds{add_to_graph(g, p.input_gate, trainable), add_to_graph(g, p.forget_gate, trainable),
                        add_to_graph(g, p.output_gate, trainable), add_to_graph(g, p.candidate, trainable)};
}

GruParamIds add_to_graph(Graph& g, GruParams& p, bool trainable) {
    return GruParamIds{add_to_graph(g, p.reset_gate, trainable), add_to_graph(g, p.update_gate, trainable),
                       add_to_graph(g, p.candidate, trainable)};
}

RecurrentStateIds zero_recurrent_state(Graph& g, std::size_t hidden_dim) {
    NodeId z = g.input(Tensor::zeros({hidden_dim}));
    return RecurrentStateIds{z, z};
}

namespace {

NodeId gate_preactivation(Graph& g, NodeId v_t, NodeId h_prev, const GateParamIds& p) {
    return g.add(g.add(g.matvec(p.w_input, v_t), g.matvec(p.w_hidden, h_prev)), p.bias);
}

}  // namespace

RecurrentStateIds lstm_step(Graph& g, NodeId v_t, const RecurrentStateIds& prev, const LstmParamIds& p) {
    NodeId i = g.sigmoid(gate_preactivation(g, v_t, prev.h, p.input_gate));
    NodeId f = g.sigmoid(gate_preactivation(g, v_t, prev.h, p.forget_gate));
    NodeId o = g.sigmoid(gate_preactivation(g, v_t, prev.h, p.output_gate));
    NodeId cand = g.tanh_(gate_preactivation(g, v_t, prev.h, p.candidate));
    NodeId c = g.add(g.mul(f, prev.c), g.mul(i, cand));
    NodeId h = g.mul(o, g.tanh_(c));
    return RecurrentStateIds{h, c};
}

RecurrentStateIds gru_step(Graph& g, NodeId v_t, const RecurrentStateIds& prev, const GruParamIds& p) {
    NodeId r = g.sigmoid(gate_preactivation(g, v_t, prev.h, p.reset_gate));
    NodeId u = g.sigmoid(gate_preactivation(g, v_t, prev.h, p.update_gate));
    NodeId gated_h = g.mul(r, prev.h);
    NodeId cand = g.tanh_(g.add(g.add(g.matvec(p.candidate.w_input, v_t),
                                      g.matvec(p.candidate.w_hidden, gated_h)),
                                p.candidate.bias));
    NodeId keep = g.mul(u, prev.h);
    NodeId update = g.mul(g.scalar_affine(u, -1.0, 1.0), cand);
    NodeId h = g.add(keep, update);
    return RecurrentStateIds{h, h};
}

NodeId encode_bow(Graph& g, const std::vector<NodeId>& embedded_rows) {
    if (embedded_rows.empty()) throw Error("invalid-value", "encode_bow: empty sequence");
    return g.sum(embedded_rows);
}

NodeId encode_sequence(Graph& g, const std::vector<NodeId>& embedded_rows, CellKind kind,
                       const LstmParamIds* lstm, const GruParamIds* gru) {
    if (embedded_rows.empty()) throw Error("invalid-value", "encode_sequence: empty sequence");
    std::size_t hidden = 0;
    if (kind == CellKind::lstm) {
        if (!lstm) throw Error("state", "encode_sequence: lstm params missing");
        hidden = g.value(lstm->input_gate.bias).numel();
    } else {
        if (!gru) throw Error("state", "encode_sequence: gru params missing");
        hidden = g.value(gru->reset_gate.bias).numel();
    }
    RecurrentStateIds state = zero_recurrent_state(g, hidden);
    for (NodeId row : embedded_rows) {
        state = kind == CellKind::lstm ? lstm_step(g, row, state, *lstm) : gru_step(g, row, state, *gru);
    }
    return state.h;
}

NodeId encode_cnn(Graph& g, const std::vector<NodeId>& embedded_rows, TextCnnParams& params,
                  bool trainable) {
    if (embedded_rows.empty()) throw Error("invalid-value", "encode_cnn: empty sequence");
    if (params.views.empty()) throw Error("state", "encode_cnn: no views configured");
    const std::size_t d = g.value(embedded_rows[0]).numel();
    for (NodeId r : embedded_rows) {
        if (g.value(r).numel() != d) throw Error("shape", "encode_cnn: embedded rows differ in width");
    }

    std::vector<NodeId> view_outputs;
    for (auto& view : params.views) {
        if (view.kernel.cols() != view.width * d) {
            throw Error("shape", "encode_cnn: kernel width " + std::to_string(view.kernel.cols()) +
                                     " does not match view width x embed dim");
        }
        NodeId kernel = trainable ? g.param(view.kernel) : g.input(view.kernel);
        NodeId bias = trainable ? g.param(view.bias) : g.input(view.bias);

        // Valid convolution; sequences shorter than the view get zero rows
        // appended so every view emits at least one position.
        std::vector<NodeId> rows = embedded_rows;
        while (rows.size() < view.width) rows.push_back(g.input(Tensor::zeros({d})));

        std::vector<NodeId> positions;
        for (std::size_t t = 0; t + view.width <= rows.size(); ++t) {
            NodeId window = view.width == 1
                                ? rows[t]
                                : g.concat(std::span<const NodeId>(rows.data() + t, view.width));
            NodeId pre = g.add(g.matvec(kernel, window), bias);
            positions.push_back(params.activation == CnnActivation::tanh ? g.tanh_(pre) : pre);
        }

        if (params.aggregation == CnnAggregation::sum_pool) {
            view_outputs.push_back(g.sum(positions));
        } else {
            if (!view.rnn) throw Error("state", "encode_cnn: rnn aggregation without recurrent params");
            LstmParamIds ids = add_to_graph(g, *view.rnn, trainable);
            RecurrentStateIds state = zero_recurrent_state(g, view.rnn->hidden_dim());
            for (NodeId pos : positions) state = lstm_step(g, pos, state, ids);
            view_outputs.push_back(state.h);
        }
    }
    return view_outputs.size() == 1 ? view_outputs[0] : g.concat(view_outputs);
}

RecurrentState zero_state(std::size_t hidden_dim) {
    return RecurrentState{Tensor::zeros({hidden_dim}), Tensor::zeros({hidden_dim})};
}

RecurrentState lstm_step(const Tensor& v_t, const RecurrentState& prev, LstmParams& params) {
    Graph g;
    RecurrentStateIds state =
        lstm_step(g, g.input(v_t), RecurrentStateIds{g.input(prev.h), g.input(prev.c)},
                  add_to_graph(g, params, false));
    return RecurrentState{g.value(state.h), g.value(state.c)};
}

RecurrentState gru_step(const Tensor& v_t, const RecurrentState& prev, GruParams& params) {
    Graph g;
    RecurrentStateIds state = gru_step(g, g.input(v_t), RecurrentStateIds{g.input(prev.h), g.input(prev.h)},
                                       add_to_graph(g, params, false));
    return RecurrentState{g.value(state.h), g.value(state.h)};
}

namespace {

std::vector<NodeId> rows_as_inputs(Graph& g, const Tensor& embedded) {
    if (embedded.rank() != 2) throw Error("shape", "expected a T x d embedding matrix");
    const std::size_t t_len = embedded.rows();
    const std::size_t d = embedded.cols();
    std::vector<NodeId> rows;
    rows.reserve(t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
        Tensor row = Tensor::zeros({d});
        for (std::size_t c = 0; c < d; ++c) row.data[c] = embedded.data[t * d + c];
        rows.push_back(g.input(row));
    }
    return rows;
}

}  // namespace

Tensor encode_bow(const Tensor& embedded) {
    Graph g;
    auto rows = rows_as_inputs(g, embedded);
    return g.value(encode_bow(g, rows));
}

Tensor encode_sequence(const std::vector<std::string>& tokens, const EmbeddingTable& table,
                       CellKind kind, LstmParams* lstm, GruParams* gru) {
    Graph g;
    auto rows = rows_as_inputs(g, table.embed_tokens(tokens));
    const LstmParamIds lstm_ids = (kind == CellKind::lstm && lstm) ? add_to_graph(g, *lstm, false) : LstmParamIds{};
    const GruParamIds gru_ids = (kind == CellKind::gru && gru) ? add_to_graph(g, *gru, false) : GruParamIds{};
    if (kind == CellKind::lstm && !lstm) throw Error("state", "encode_sequence: lstm params missing");
    if (kind == CellKind::gru && !gru) throw Error("state", "encode_sequence: gru params missing");
    NodeId h = encode_sequence(g, rows, kind, kind == CellKind::lstm ? &lstm_ids : nullptr,
                               kind == CellKind::gru ? &gru_ids : nullptr);
    return g.value(h);
}

Tensor encode_cnn(const Tensor& embedded, TextCnnParams& params) {
    Graph g;
    auto rows = rows_as_inputs(g, embedded);
    return g.value(encode_cnn(g, rows, params, false));
}

}  // namespace ayn

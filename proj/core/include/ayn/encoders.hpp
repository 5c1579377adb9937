#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ayn/embedding.hpp"
#include "ayn/graph.hpp"
#include "ayn/rng.hpp"
#include "ayn/tensor.hpp"

namespace ayn {

enum class CellKind { lstm, gru };
enum class CnnActivation { tanh, linear };
enum class CnnAggregation { sum_pool, rnn };

CellKind cell_kind_from_string(const std::string& name);
std::string to_string(CellKind kind);
CnnActivation cnn_activation_from_string(const std::string& name);
std::string to_string(CnnActivation activation);
CnnAggregation cnn_aggregation_from_string(const std::string& name);
std::string to_string(CnnAggregation aggregation);

/// One gate's affine map: w_input [h x in], w_hidden [h x h], bias [h].
struct GateParams {
    Tensor w_input;
    Tensor w_hidden;
    Tensor bias;

    static GateParams init(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);
};

struct LstmParams {
    GateParams input_gate;
    GateParams forget_gate;
    GateParams output_gate;
    GateParams candidate;

    static LstmParams init(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);
    std::vector<Tensor*> parameters();
    std::size_t hidden_dim() const { return input_gate.bias.numel(); }
    std::size_t input_dim() const { return input_gate.w_input.cols(); }
};

struct GruParams {
    GateParams reset_gate;
    GateParams update_gate;
    GateParams candidate;

    static GruParams init(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);
    std::vector<Tensor*> parameters();
    std::size_t hidden_dim() const { return reset_gate.bias.numel(); }
    std::size_t input_dim() const { return reset_gate.w_input.cols(); }
};

/// Per-view convolution: kernel [maps x (width*d)], bias [maps]. With rnn
/// aggregation the view also owns a recurrent cell over its positions.
struct TextCnnView {
    std::size_t width = 1;
    Tensor kernel;
    Tensor bias;
    std::optional<LstmParams> rnn;
};

struct TextCnnParams {
    std::vector<TextCnnView> views;
    CnnActivation activation = CnnActivation::tanh;
    CnnAggregation aggregation = CnnAggregation::sum_pool;

    /// Views of width 1..num_views, each with `feature_maps` maps.
    static TextCnnParams init(std::size_t embed_dim, std::size_t num_views, std::size_t feature_maps,
                              CnnAggregation aggregation, Rng& rng);
    std::vector<Tensor*> parameters();
    std::size_t output_dim() const;
};

// --- graph-side handles; parameters enter a Graph once per forward pass ---

struct GateParamIds {
    NodeId w_input;
    NodeId w_hidden;
    NodeId bias;
};

struct LstmParamIds {
    GateParamIds input_gate, forget_gate, output_gate, candidate;
};

struct GruParamIds {
    GateParamIds reset_gate, update_gate, candidate;
};

/// h and (for LSTM) the memory cell c.
struct RecurrentStateIds {
    NodeId h;
    NodeId c;
};

GateParamIds add_to_graph(Graph& g, GateParams& p, bool trainable);
LstmParamIds add_to_graph(Graph& g, LstmParams& p, bool trainable);
GruParamIds add_to_graph(Graph& g, GruParams& p, bool trainable);

RecurrentStateIds zero_recurrent_state(Graph& g, std::size_t hidden_dim);
RecurrentStateIds lstm_step(Graph& g, NodeId v_t, const RecurrentStateIds& prev, const LstmParamIds& p);
RecurrentStateIds gru_step(Graph& g, NodeId v_t, const RecurrentStateIds& prev, const GruParamIds& p);

/// Sum of the embedded token rows; order-invariant by construction.
NodeId encode_bow(Graph& g, const std::vector<NodeId>& embedded_rows);

/// Final hidden state after unrolling the cell from the zero state.
NodeId encode_sequence(Graph& g, const std::vector<NodeId>& embedded_rows, CellKind kind,
                       const LstmParamIds* lstm, const GruParamIds* gru);

/// Per view: valid convolution over time, activation, aggregation
/// (sum-pool or recurrent); views concatenated. Sequences shorter than a
/// view's width are zero-padded up to it.
NodeId encode_cnn(Graph& g, const std::vector<NodeId>& embedded_rows, TextCnnParams& params,
                  bool trainable);

// --- plain-tensor wrappers (inference and fixtures); same math, no grads ---

struct RecurrentState {
    Tensor h;
    Tensor c;
};

RecurrentState zero_state(std::size_t hidden_dim);
RecurrentState lstm_step(const Tensor& v_t, const RecurrentState& prev, LstmParams& params);
RecurrentState gru_step(const Tensor& v_t, const RecurrentState& prev, GruParams& params);

/// Columnwise sum of a T x d embedding matrix.
Tensor encode_bow(const Tensor& embedded);

Tensor encode_sequence(const std::vector<std::string>& tokens, const EmbeddingTable& table,
                       CellKind kind, LstmParams* lstm, GruParams* gru);

Tensor encode_cnn(const Tensor& embedded, TextCnnParams& params);

}  // namespace ayn

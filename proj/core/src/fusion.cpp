#include "ayn/fusion.hpp"

#include <array>

#include "ayn/error.hpp"

namespace ayn {

FusionMode fusion_mode_from_string(const std::string& name) {
    if (name == "concat") return FusionMode::concat;
    if (name == "multiply") return FusionMode::multiply;
    if (name == "sum") return FusionMode::sum;
    throw Error("invalid-value", "unknown fusion mode '" + name + "' (expected concat, multiply, or sum)");
}

std::string to_string(FusionMode mode) {
    switch (mode) {
        case FusionMode::concat: return "concat";
        case FusionMode::multiply: return "multiply";
        case FusionMode::sum: return "sum";
    }
    throw Error("invalid-value", "unrepresentable fusion mode");
}

FusionParams FusionParams::init(FusionMode mode, std::size_t q_dim, std::size_t v_dim,
                                bool normalize_visual, Rng& rng) {
    FusionParams p;
    p.mode = mode;
    p.normalize_visual = normalize_visual;
    if (mode != FusionMode::concat) {
        if (q_dim == 0 || v_dim == 0) throw Error("invalid-value", "fusion init: dimensions must be positive");
        p.w_ve = Tensor::zeros({q_dim, v_dim});
        init_uniform_glorot(*p.w_ve, v_dim, q_dim, rng);
    }
    return p;
}

std::vector<Tensor*> FusionParams::parameters() {
    std::vector<Tensor*> out;
    if (w_ve) out.push_back(&*w_ve);
    return out;
}

std::size_t FusionParams::output_dim(std::size_t q_dim, std::size_t v_dim) const {
    return mode == FusionMode::concat ? q_dim + v_dim : q_dim;
}

FusionParamIds add_to_graph(Graph& g, FusionParams& p, bool trainable) {
    FusionParamIds ids;
    ids.mode = p.mode;
    ids.normalize_visual = p.normalize_visual;
    if (p.mode != FusionMode::concat) {
        if (!p.w_ve) throw Error("state", "fusion: multiply/sum require the visual projection w_ve");
        ids.w_ve = trainable ? g.param(*p.w_ve) : g.input(*p.w_ve);
    }
    return ids;
}

NodeId fuse(Graph& g, NodeId q_enc, NodeId v_enc, const FusionParamIds& p) {
    NodeId v = p.normalize_visual ? g.l2_normalize(v_enc) : v_enc;
    switch (p.mode) {
        case FusionMode::concat: {
            std::array<NodeId, 2> parts{q_enc, v};
            return g.concat(parts);
        }
        case FusionMode::multiply: {
            if (!p.w_ve) throw Error("state", "fusion: multiply requires w_ve");
            return g.mul(q_enc, g.matvec(*p.w_ve, v));
        }
        case FusionMode::sum: {
            if (!p.w_ve) throw Error("state", "fusion: sum requires w_ve");
            return g.add(q_enc, g.matvec(*p.w_ve, v));
        }
    }
    throw Error("invalid-value", "unrepresentable fusion mode");
}

Tensor fuse(const Tensor& q_enc, const Tensor& v_enc, FusionParams& params) {
    Graph g;
    FusionParamIds ids = add_to_graph(g, params, false);
    return g.value(fuse(g, g.input(q_enc), g.input(v_enc), ids));
}

}  // namespace ayn

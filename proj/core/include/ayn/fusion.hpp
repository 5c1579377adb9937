#pragma once

#include <optional>
#include <string>

#include "ayn/graph.hpp"
#include "ayn/rng.hpp"
#include "ayn/tensor.hpp"

namespace ayn {

enum class FusionMode { concat, multiply, sum };

FusionMode fusion_mode_from_string(const std::string& name);
std::string to_string(FusionMode mode);

/// concat needs no projection; multiply and sum map the visual vector
/// into the question-encoding space with w_ve [|q_enc| x |v_enc|].
struct FusionParams {
    FusionMode mode = FusionMode::concat;
    std::optional<Tensor> w_ve;
    bool normalize_visual = false;

    static FusionParams init(FusionMode mode, std::size_t q_dim, std::size_t v_dim,
                             bool normalize_visual, Rng& rng);
    std::vector<Tensor*> parameters();
    std::size_t output_dim(std::size_t q_dim, std::size_t v_dim) const;
};

struct FusionParamIds {
    FusionMode mode = FusionMode::concat;
    std::optional<NodeId> w_ve;
    bool normalize_visual = false;
};

FusionParamIds add_to_graph(Graph& g, FusionParams& p, bool trainable);

/// concat -> [q ; v]; multiply -> q (.) (W_ve v); sum -> q + W_ve v.
/// With normalize_visual, v is L2-normalized before anything else.
NodeId fuse(Graph& g, NodeId q_enc, NodeId v_enc, const FusionParamIds& p);

Tensor fuse(const Tensor& q_enc, const Tensor& v_enc, FusionParams& params);

}  // namespace ayn

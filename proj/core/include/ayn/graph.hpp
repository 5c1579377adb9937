#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ayn/tensor.hpp"

namespace ayn {

using NodeId = std::uint32_t;

/// Reverse-mode tape. Nodes are appended in creation order, which is a
/// topological order by construction, so backward() is a single reverse
/// sweep. Leaves created via param() accumulate their gradient into the
/// external tensor's grad buffer when backward() finishes; callers zero
/// those buffers explicitly between steps.
class Graph {
public:
    /// Constant leaf; the value is copied in.
    NodeId input(const Tensor& value);

    /// Trainable leaf tied to `t`. `t` must outlive the graph; backward()
    /// accumulates into t.grad (allocating it on first use).
    NodeId param(Tensor& t);

    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);

    /// Elementwise product; shapes must match.
    NodeId mul(NodeId a, NodeId b);

    /// Elementwise scale * x + shift with compile-time-constant scalars.
    NodeId scalar_affine(NodeId x, double scale, double shift);

    /// w: [m x n] matrix, v: length-n vector; result length m.
    NodeId matvec(NodeId w, NodeId v);

    NodeId sigmoid(NodeId x);
    NodeId tanh_(NodeId x);

    /// Concatenate vectors in order.
    NodeId concat(std::span<const NodeId> parts);

    /// Elementwise sum of same-shaped nodes; at least one term.
    NodeId sum(std::span<const NodeId> terms);

    /// Sum of all entries of a node, as a scalar.
    NodeId sum_entries(NodeId x);

    /// Numerically stable -log softmax(logits)[target]; scalar result.
    NodeId cross_entropy(NodeId logits, std::size_t target);

    /// x / ||x||_2; a zero vector maps to zeros and blocks gradient flow.
    NodeId l2_normalize(NodeId x);

    /// Row r of a matrix node as a vector; gradient lands in that row only.
    NodeId row(NodeId matrix, std::size_t r);

    const Tensor& value(NodeId id) const;
    double scalar_value(NodeId id) const;

    /// Gradient of the last backward() root w.r.t. node `id`.
    const std::vector<double>& grad(NodeId id) const;

    /// Seeds d(root)/d(root) = 1 and sweeps the tape in reverse. `root`
    /// must be a scalar node.
    void backward(NodeId root);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        std::vector<double> grad;
        std::function<void(Graph&, NodeId)> back;  // null for leaves
        Tensor* external = nullptr;                // set for param leaves
    };

    NodeId push(Tensor value, std::function<void(Graph&, NodeId)> back);
    const Node& at(NodeId id) const;
    Node& at(NodeId id);
    void check_vector(NodeId id, const char* op) const;

    std::vector<Node> nodes_;
};

}  // namespace ayn

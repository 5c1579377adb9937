#include "ayn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ayn/error.hpp"
#include "ayn/math.hpp"

namespace ayn {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw Error("shape", std::string(op) + ": shape mismatch " + shape_to_string(a.shape) +
                                 " vs " + shape_to_string(b.shape));
    }
}

}  // namespace

NodeId Graph::push(Tensor value, std::function<void(Graph&, NodeId)> back) {
    if (nodes_.size() >= std::numeric_limits<NodeId>::max()) {
        throw Error("range", "graph node limit exceeded");
    }
    Node n;
    n.value = std::move(value);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

const Graph::Node& Graph::at(NodeId id) const {
    if (id >= nodes_.size()) throw Error("range", "graph: node id out of range");
    return nodes_[id];
}

Graph::Node& Graph::at(NodeId id) {
    if (id >= nodes_.size()) throw Error("range", "graph: node id out of range");
    return nodes_[id];
}

void Graph::check_vector(NodeId id, const char* op) const {
    if (!at(id).value.is_vector()) {
        throw Error("shape", std::string(op) + ": expected a vector, got shape " +
                                 shape_to_string(at(id).value.shape));
    }
}

NodeId Graph::input(const Tensor& value) { return push(value, nullptr); }

NodeId Graph::param(Tensor& t) {
    NodeId id = push(t, nullptr);
    nodes_[id].external = &t;
    return id;
}

NodeId Graph::add(NodeId a, NodeId b) {
    require_same_shape(at(a).value, at(b).value, "add");
    Tensor out = at(a).value;
    const Tensor& vb = at(b).value;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += vb.data[i];
    return push(std::move(out), [a, b](Graph& g, NodeId self) {
        const auto& go = g.nodes_[self].grad;
        auto& ga = g.nodes_[a].grad;
        auto& gb = g.nodes_[b].grad;
        for (std::size_t i = 0; i < go.size(); ++i) {
            ga[i] += go[i];
            gb[i] += go[i];
        }
    });
}

NodeId Graph::sub(NodeId a, NodeId b) {
    require_same_shape(at(a).value, at(b).value, "sub");
    Tensor out = at(a).value;
    const Tensor& vb = at(b).value;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= vb.data[i];
    return push(std::move(out), [a, b](Graph& g, NodeId self) {
        const auto& go = g.nodes_[self].grad;
        auto& ga = g.nodes_[a].grad;
        auto& gb = g.nodes_[b].grad;
        for (std::size_t i = 0; i < go.size(); ++i) {
            ga[i] += go[i];
            gb[i] -= go[i];
        }
    });
}

NodeId Graph::mul(NodeId a, NodeId b) {
    require_same_shape(at(a).value, at(b).value, "mul");
    Tensor out = at(a).value;
    const Tensor& vb = at(b).value;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= vb.data[i];
    return push(std::move(out), [a, b](Graph& g, NodeId self) {
        const auto& go = g.nodes_[self].grad;
        const auto& va = g.nodes_[a].value.data;
        const auto& vb2 = g.nodes_[b].value.data;
        auto& ga = g.nodes_[a].grad;
        auto& gb = g.nodes_[b].grad;
        for (std::size_t i = 0; i < go.size(); ++i) {
            ga[i] += go[i] * vb2[i];
            gb[i] += go[i] * va[i];
        }
    });
}

NodeId Graph::scalar_affine(NodeId x, double scale, double shift) {
    Tensor out = at(x).value;
    for (double& v : out.data) v = scale * v + shift;
    return push(std::move(out), [x, scale](Graph& g, NodeId self) {
        const auto& go = g.nodes_[self].grad;
        auto& gx = g.nodes_[x].grad;
        for (std::size_t i = 0; i < go.size(); ++i) gx[i] += scale * go[i];
    });
}

NodeId Graph::matvec(NodeId w, NodeId v) {
    const Tensor& mw = at(w).value;
    const Tensor& vv = at(v).value;
    if (mw.rank() != 2) throw Error("shape", "matvec: left operand must be a matrix");
    check_vector(v, "matvec");
    const std::size_t m = mw.shape[0];
    const std::size_t n = mw.shape[1];
    if (vv.numel() != n) {
        throw Error("shape", "matvec: " + shape_to_string(mw.shape) + " incompatible with vector of length " +
                                 std::to_string(vv.numel()));
    }
    Tensor out = Tensor::zeros({m});
    for (std::size_t r = 0; r < m; ++r) {
        double acc = 0.0;
        const double* wr = mw.data.data() + r * n;
        for (std::size_t c = 0; c < n; ++c) acc += wr[c] * vv.data[c];
        out.data[r] = acc;
    }
    return push(std::move(out), [w, v, m, n](Graph& g, NodeId self) {
        const auto& go = g.nodes_[self].grad;
        const auto& wd = g.nodes_[w].value.data;
        const auto& vd = g.nodes_[v].value.data;
        auto& gw = g.nodes_[w].grad;
        auto& gv = g.nodes_[v].grad;
        for (std::size_t r = 0; r < m; ++r) {
            const double gr = go[r];
            if (gr == 0.0) continue;
            double* gwr = gw.data() + r * n;
            const double* wr = wd.data() + r * n;
            for (std::size_t c = 0; c < n; ++c) {
                gwr[c] += gr * vd[c];
                gv[c] += gr * wr[c];
            }
        }
    });
}

NodeId Graph::sigmoid(NodeId x) {
    Tensor out = at(x).value;
    for (double& v : out.data) v = ayn::sigmoid(v);
    return push(std::move(out), [x](Graph& g, NodeId self) {
        const auto& go = g.nodes_[self].grad;
        const auto& y = g.nodes_[self].value.data;
        auto& gx = g.nodes_[x].grad;
        for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i] * y[i] * (1.0 - y[i]);
    });
}

NodeId Graph::tanh_(NodeId x) {
    Tensor out = at(x).value;
    for (double& v : out.data) v = std::tanh(v);
    return push(std::move(out), [x](Graph& g, NodeId self) {
        const auto& go = g.nodes_[self].grad;
        const auto& y = g.nodes_[self].value.data;
        auto& gx = g.nodes_[x].grad;
        for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i] * (1.0 - y[i] * y[i]);
    });
}

NodeId Graph::concat(std::span<const NodeId> parts) {
    if (parts.empty()) throw Error("shape", "concat: needs at least one part");
    std::size_t total = 0;
    for (NodeId p : parts) {
        check_vector(p, "concat");
        total += at(p).value.numel();
    }
    Tensor out = Tensor::zeros({total});
    std::size_t off = 0;
    for (NodeId p : parts) {
        const auto& d = at(p).value.data;
        std::copy(d.begin(), d.end(), out.data.begin() + static_cast<std::ptrdiff_t>(off));
        off += d.size();
    }
    std::vector<NodeId> owned(parts.begin(), parts.end());
    return push(std::move(out), [owned = std::move(owned)](Graph& g, NodeId self) {
        const auto& go = g.nodes_[self].grad;
        std::size_t off2 = 0;
        for (NodeId p : owned) {
            auto& gp = g.nodes_[p].grad;
            for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += go[off2 + i];
            off2 += gp.size();
        }
    });
}

NodeId Graph::sum(std::span<const NodeId> terms) {
    if (terms.empty()) throw Error("shape", "sum: needs at least one term");
    Tensor out = at(terms[0]).value;
    for (std::size_t k = 1; k < terms.size(); ++k) {
        require_same_shape(out, at(terms[k]).value, "sum");
        const auto& d = at(terms[k]).value.data;
        for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += d[i];
    }
    std::vector<NodeId> owned(terms.begin(), terms.end());
    return push(std::move(out), [owned = std::move(owned)](Graph& g, NodeId self) {
        const auto& go = g.nodes_[self].grad;
        for (NodeId t : owned) {
            auto& gt = g.nodes_[t].grad;
            for (std::size_t i = 0; i < go.size(); ++i) gt[i] += go[i];
        }
    });
}

NodeId Graph::sum_entries(NodeId x) {
    const Tensor& v = at(x).value;
    double total = 0.0;
    for (double d : v.data) total += d;
    return push(Tensor::scalar(total), [x](Graph& g, NodeId self) {
        const double go = g.nodes_[self].grad[0];
        auto& gx = g.nodes_[x].grad;
        for (double& d : gx) d += go;
    });
}

NodeId Graph::cross_entropy(NodeId logits, std::size_t target) {
    check_vector(logits, "cross_entropy");
    const Tensor& z = at(logits).value;
    if (target >= z.numel()) {
        throw Error("range", "cross_entropy: target " + std::to_string(target) +
                                 " out of range for " + std::to_string(z.numel()) + " classes");
    }
    Tensor out = Tensor::scalar(cross_entropy_value(z, target));
    return push(std::move(out), [logits, target](Graph& g, NodeId self) {
        const double go = g.nodes_[self].grad[0];
        const auto probs = softmax(g.nodes_[logits].value.data);
        auto& gl = g.nodes_[logits].grad;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            gl[i] += go * (probs[i] - (i == target ? 1.0 : 0.0));
        }
    });
}

NodeId Graph::l2_normalize(NodeId x) {
    check_vector(x, "l2_normalize");
    Tensor out = ayn::l2_normalize(at(x).value);
    return push(std::move(out), [x](Graph& g, NodeId self) {
        const auto& xd = g.nodes_[x].value.data;
        double sq = 0.0;
        for (double v : xd) sq += v * v;
        const double norm = std::sqrt(sq);
        if (norm < 1e-12) return;  // forward emitted zeros; treat as constant
        const auto& go = g.nodes_[self].grad;
        const auto& y = g.nodes_[self].value.data;
        double dot_gy = 0.0;
        for (std::size_t i = 0; i < go.size(); ++i) dot_gy += go[i] * y[i];
        auto& gx = g.nodes_[x].grad;
        for (std::size_t i = 0; i < go.size(); ++i) {
            gx[i] += (go[i] - dot_gy * y[i]) / norm;
        }
    });
}

NodeId Graph::row(NodeId matrix, std::size_t r) {
    const Tensor& m = at(matrix).value;
    if (m.rank() != 2) throw Error("shape", "row: expected a matrix");
    if (r >= m.shape[0]) {
        throw Error("range", "row: index " + std::to_string(r) + " out of range for " +
                                 std::to_string(m.shape[0]) + " rows");
    }
    const std::size_t n = m.shape[1];
    Tensor out = Tensor::zeros({n});
    std::copy(m.data.begin() + static_cast<std::ptrdiff_t>(r * n),
              m.data.begin() + static_cast<std::ptrdiff_t>((r + 1) * n), out.data.begin());
    return push(std::move(out), [matrix, r, n](Graph& g, NodeId self) {
        const auto& go = g.nodes_[self].grad;
        auto& gm = g.nodes_[matrix].grad;
        for (std::size_t i = 0; i < n; ++i) gm[r * n + i] += go[i];
    });
}

const Tensor& Graph::value(NodeId id) const { return at(id).value; }

double Graph::scalar_value(NodeId id) const {
    const Tensor& t = at(id).value;
    if (!t.is_scalar()) throw Error("shape", "scalar_value: node is not a scalar");
    return t.data[0];
}

const std::vector<double>& Graph::grad(NodeId id) const {
    const Node& n = at(id);
    if (n.grad.size() != n.value.data.size()) {
        throw Error("state", "grad: backward() has not been run over this node");
    }
    return n.grad;
}

void Graph::backward(NodeId root) {
    const Node& r = at(root);
    if (!r.value.is_scalar()) throw Error("shape", "backward: root must be a scalar node");
    for (NodeId id = 0; id <= root; ++id) {
        auto& n = nodes_[id];
        n.grad.assign(n.value.data.size(), 0.0);
    }
    nodes_[root].grad[0] = 1.0;
    for (NodeId id = root + 1; id-- > 0;) {
        if (nodes_[id].back) nodes_[id].back(*this, id);
    }
    for (NodeId id = 0; id <= root; ++id) {
        Node& n = nodes_[id];
        if (!n.external) continue;
        n.external->ensure_grad();
        auto& dst = *n.external->grad;
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += n.grad[i];
    }
}

}  // namespace ayn

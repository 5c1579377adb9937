#pragma once

#include <vector>

#include "ayn/tensor.hpp"

namespace ayn {

enum class Nonlinearity { sigmoid, tanh };

double sigmoid(double v);

/// Elementwise sigmoid or tanh. Rejects non-finite input.
Tensor apply_nonlinearity(Nonlinearity kind, const Tensor& x);

/// Unit-norm copy of x; a (near-)zero vector maps to the zero vector
/// so padded or missing features never abort a batch.
Tensor l2_normalize(const Tensor& x);

/// Stable softmax of a vector of logits.
std::vector<double> softmax(const std::vector<double>& logits);

/// -log softmax(logits)[target]; the classification training loss.
double cross_entropy_value(const Tensor& logits, std::size_t target);

double dot(const std::vector<double>& a, const std::vector<double>& b);

/// Plain w [m x n] times v [n] without recording a tape.
Tensor matvec_value(const Tensor& w, const Tensor& v);

/// Cosine similarity with the zero-vector convention cos(0, y) = 0.
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace ayn

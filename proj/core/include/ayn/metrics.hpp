#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ayn/taxonomy.hpp"

namespace ayn {

/// Canonical answer set: normalized elements, deduplicated, sorted.
/// An element may itself be a multi-word phrase ("bed sheets").
using AnswerSet = std::vector<std::string>;

/// Lowercase, trim, strip trailing punctuation.
std::string normalize_answer(const std::string& raw);

/// Comma-split into elements, normalize each, drop empties, sort+dedup.
AnswerSet normalize_answer_set(const std::string& raw);

/// Inverse of normalize_answer_set for serialization: ", "-joined.
std::string answer_set_to_string(const AnswerSet& set);

/// Word-level membership measure plugged into the set metrics.
using MuFunction = std::function<double(const std::string&, const std::string&)>;

/// 1 on equal strings, else 0; collapses WUPS to exact set accuracy.
MuFunction make_indicator_mu();

/// Thresholded taxonomy similarity; `taxonomy` must outlive the closure.
MuFunction make_taxonomy_mu(const Taxonomy& taxonomy, double tau);

/// min of the two directional products of best per-element scores.
/// Symmetric; empty sets are an error.
double wups_instance(const AnswerSet& predicted, const AnswerSet& reference, const MuFunction& mu);

struct EvalInstance {
    AnswerSet predicted;
    std::vector<AnswerSet> references;  // K >= 1
};

/// Mean instance score against the FIRST reference set, as a percentage.
double wups_corpus(const std::vector<EvalInstance>& instances, const MuFunction& mu);

enum class ConsensusMode { average, min };

/// average: mean over all K references per instance; min-consensus:
/// best reference per instance. Returns a fraction in [0, 1].
double consensus_score(const std::vector<EvalInstance>& instances, const MuFunction& mu, ConsensusMode mode);

/// min(#exact matches / 3, 1). Answers are compared after whole-string
/// normalization. Throws on an empty human answer list; callers warn
/// when the count differs from the canonical 10.
double vqa_accuracy(const std::string& predicted, const std::vector<std::string>& human_answers);

enum class Agreement { none, partial, at_least_half, full };

std::string to_string(Agreement a);

/// Classification by the max multiplicity m of identical reference
/// sets: m=K full; m=1 none; m >= ceil(K/2) at-least-half; the gap in
/// between (2 <= m < ceil(K/2)) reports as partial. K must be >= 2.
Agreement agreement_split(const std::vector<AnswerSet>& references);

}  // namespace ayn

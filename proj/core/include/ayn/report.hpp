#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ayn/data.hpp"
#include "ayn/metrics.hpp"
#include "ayn/model.hpp"
#include "ayn/taxonomy.hpp"

namespace ayn {

struct EvalOptions {
    double high_tau = 0.9;
    double low_tau = 0.0;
    bool include_vqa = false;
};

/// One table row; every metric is a percentage. Consensus and VQA
/// columns are engaged only when the corpus supports them.
struct MetricRow {
    std::string label;
    std::size_t count = 0;
    double accuracy = 0.0;
    double wups_high = 0.0;
    double wups_low = 0.0;
    std::optional<double> acm;
    std::optional<double> mcm;
    std::optional<double> vqa;
};

struct EvalReport {
    std::string taxonomy = "none";  // name of the similarity source
    double high_tau = 0.9;
    double low_tau = 0.0;
    std::size_t instances = 0;
    std::size_t missing_predictions = 0;  // references without a prediction, scored 0
    std::size_t ignored_predictions = 0;  // prediction ids absent from the references
    bool consensus = false;               // some instance has more than one reference set
    bool vqa = false;
    std::vector<MetricRow> rows;  // overall, then per question type, then per agreement split
};

/// Scores predictions against references: overall plus per-question-type
/// and (for multi-reference corpora) per-agreement-split slices. Ids
/// align by exact match; every reference without a prediction scores 0.
EvalReport evaluate_predictions(const std::vector<Prediction>& predictions,
                                const std::vector<QAInstance>& references, const Taxonomy* taxonomy,
                                const EvalOptions& options);

std::string render_text(const EvalReport& report);
std::string render_text(const TrainLog& log);

/// Validation-accuracy curve (raw + smoothed) as a standalone SVG.
std::string render_svg(const TrainLog& log);

void save_report(const EvalReport& report, const std::string& path);
EvalReport load_report(const std::string& path);

}  // namespace ayn

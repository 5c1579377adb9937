#include "ayn/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "ayn/baselines.hpp"
#include "ayn/error.hpp"
#include "json.hpp"

namespace ayn {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

struct ScoredInstance {
    EvalInstance eval;
    QuestionType type = QuestionType::other;
    std::optional<Agreement> agreement;  // only for K >= 2
};

MetricRow score_slice(const std::string& label, const std::vector<const ScoredInstance*>& slice,
                      const MuFunction& mu_accuracy, const MuFunction& mu_high,
                      const MuFunction& mu_low, bool consensus, bool vqa) {
    MetricRow row;
    row.label = label;
    row.count = slice.size();
    std::vector<EvalInstance> instances;
    instances.reserve(slice.size());
    for (const auto* s : slice) instances.push_back(s->eval);
    row.accuracy = wups_corpus(instances, mu_accuracy);
    row.wups_high = wups_corpus(instances, mu_high);
    row.wups_low = wups_corpus(instances, mu_low);
    if (consensus) {
        row.acm = 100.0 * consensus_score(instances, mu_high, ConsensusMode::average);
        row.mcm = 100.0 * consensus_score(instances, mu_high, ConsensusMode::min);
    }
    if (vqa) {
        double total = 0.0;
        for (const auto& inst : instances) {
            std::vector<std::string> humans;
            humans.reserve(inst.references.size());
            for (const auto& ref : inst.references) humans.push_back(answer_set_to_string(ref));
            total += vqa_accuracy(answer_set_to_string(inst.predicted), humans);
        }
        row.vqa = 100.0 * total / static_cast<double>(instances.size());
    }
    return row;
}

}  // namespace

EvalReport evaluate_predictions(const std::vector<Prediction>& predictions,
                                const std::vector<QAInstance>& references, const Taxonomy* taxonomy,
                                const EvalOptions& options) {
    if (references.empty()) throw Error("invalid-value", "eval: no reference instances");
    if (options.low_tau > options.high_tau) {
        throw Error("range", "eval: low threshold must not exceed the high threshold");
    }

    std::map<std::string, std::string> predicted_by_id;
    std::set<std::string> reference_ids;
    for (const auto& inst : references) reference_ids.insert(inst.id);
    EvalReport report;
    for (const auto& p : predictions) {
        if (!reference_ids.count(p.id)) {
            ++report.ignored_predictions;
            continue;
        }
        predicted_by_id[p.id] = p.answer;  // duplicate ids: last one wins
    }

    std::size_t aligned = 0;
    std::vector<ScoredInstance> scored;
    scored.reserve(references.size());
    for (const auto& inst : references) {
        ScoredInstance s;
        const auto found = predicted_by_id.find(inst.id);
        if (found != predicted_by_id.end()) {
            ++aligned;
            s.eval.predicted = normalize_answer_set(found->second);
        } else {
            ++report.missing_predictions;  // empty prediction scores 0
        }
        s.eval.references = inst.answers;
        s.type = classify_question_type(join_tokens(inst.question_tokens));
        if (inst.answers.size() >= 2) s.agreement = agreement_split(inst.answers);
        scored.push_back(std::move(s));
    }
    if (aligned == 0) throw Error("invalid-value", "eval: no prediction ids match the references");

    report.taxonomy = taxonomy ? taxonomy->root_name() : "none";
    report.high_tau = options.high_tau;
    report.low_tau = options.low_tau;
    report.instances = references.size();
    report.consensus =
        std::any_of(scored.begin(), scored.end(), [](const ScoredInstance& s) { return s.agreement.has_value(); });
    report.vqa = options.include_vqa;

    const MuFunction mu_accuracy = make_indicator_mu();
    const MuFunction mu_high =
        taxonomy ? make_taxonomy_mu(*taxonomy, options.high_tau) : make_indicator_mu();
    const MuFunction mu_low =
        taxonomy ? make_taxonomy_mu(*taxonomy, options.low_tau) : make_indicator_mu();

    auto add_slice = [&](const std::string& label, const std::vector<const ScoredInstance*>& slice) {
        if (slice.empty()) return;
        report.rows.push_back(
            score_slice(label, slice, mu_accuracy, mu_high, mu_low, report.consensus, report.vqa));
    };

    std::vector<const ScoredInstance*> all;
    all.reserve(scored.size());
    for (const auto& s : scored) all.push_back(&s);
    add_slice("overall", all);

    for (QuestionType type : all_question_types()) {
        std::vector<const ScoredInstance*> slice;
        for (const auto& s : scored) {
            if (s.type == type) slice.push_back(&s);
        }
        add_slice("type: " + to_string(type), slice);
    }
    if (report.consensus) {
        for (Agreement a : {Agreement::none, Agreement::partial, Agreement::at_least_half, Agreement::full}) {
            std::vector<const ScoredInstance*> slice;
            for (const auto& s : scored) {
                if (s.agreement && *s.agreement == a) slice.push_back(&s);
            }
            add_slice("agreement: " + to_string(a), slice);
        }
    }
    return report;
}

namespace {

std::string fixed2(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << v;
    return out.str();
}

std::string tau_label(double tau) {
    std::ostringstream out;
    out << "WUPS@" << std::fixed << std::setprecision(1) << tau;
    return out.str();
}

}  // namespace

std::string render_text(const EvalReport& report) {
    std::size_t label_width = std::string("slice").size();
    for (const auto& row : report.rows) label_width = std::max(label_width, row.label.size());

    std::ostringstream out;
    out << "evaluation over " << report.instances << " instance" << (report.instances == 1 ? "" : "s");
    out << " (similarity: " << report.taxonomy << ")\n";
    if (report.missing_predictions > 0) {
        out << report.missing_predictions << " reference id(s) had no prediction and scored 0\n";
    }
    if (report.ignored_predictions > 0) {
        out << report.ignored_predictions << " prediction(s) matched no reference id and were ignored\n";
    }
    out << '\n';
    out << std::left << std::setw(static_cast<int>(label_width)) << "slice" << std::right;
    out << std::setw(8) << "count" << std::setw(10) << "Accuracy" << std::setw(10)
        << tau_label(report.high_tau) << std::setw(10) << tau_label(report.low_tau);
    if (report.consensus) out << std::setw(10) << "ACM" << std::setw(10) << "MCM";
    if (report.vqa) out << std::setw(10) << "VQA";
    out << '\n';
    for (const auto& row : report.rows) {
        out << std::left << std::setw(static_cast<int>(label_width)) << row.label << std::right;
        out << std::setw(8) << row.count;
        out << std::setw(10) << fixed2(row.accuracy) << std::setw(10) << fixed2(row.wups_high)
            << std::setw(10) << fixed2(row.wups_low);
        if (report.consensus) {
            out << std::setw(10) << (row.acm ? fixed2(*row.acm) : "-") << std::setw(10)
                << (row.mcm ? fixed2(*row.mcm) : "-");
        }
        if (report.vqa) out << std::setw(10) << (row.vqa ? fixed2(*row.vqa) : "-");
        out << '\n';
    }
    return out.str();
}

std::string render_text(const TrainLog& log) {
    std::ostringstream out;
    out << "training run (seed " << log.seed << ")\n";
    out << std::right << std::setw(6) << "epoch" << std::setw(12) << "loss" << std::setw(12)
        << "val-acc" << std::setw(12) << "smoothed" << '\n';
    for (const auto& e : log.epochs) {
        out << std::setw(6) << e.epoch << std::setw(12) << fixed2(e.train_loss) << std::setw(12)
            << fixed2(100.0 * e.val_accuracy) << std::setw(12) << fixed2(100.0 * e.smoothed_accuracy)
            << '\n';
    }
    out << "best epoch: " << log.best_epoch << '\n';
    if (log.skipped_out_of_vocabulary > 0) {
        out << "skipped " << log.skipped_out_of_vocabulary << " answer(s) outside the class list\n";
    }
    if (log.skipped_missing_feature > 0) {
        out << "skipped " << log.skipped_missing_feature << " instance(s) without image features\n";
    }
    return out.str();
}

std::string render_svg(const TrainLog& log) {
    if (log.epochs.empty()) throw Error("invalid-value", "svg: training log has no epochs");
    const double width = 640.0, height = 400.0, margin = 48.0;
    const double plot_w = width - 2 * margin, plot_h = height - 2 * margin;
    const std::size_t n = log.epochs.size();

    auto x_of = [&](std::size_t i) {
        return n == 1 ? margin + plot_w / 2
                      : margin + plot_w * static_cast<double>(i) / static_cast<double>(n - 1);
    };
    auto y_of = [&](double accuracy) { return margin + plot_h * (1.0 - accuracy); };

    auto polyline = [&](bool smoothed, const char* color) {
        std::ostringstream pts;
        pts << std::fixed << std::setprecision(1);
        for (std::size_t i = 0; i < n; ++i) {
            if (i) pts << ' ';
            const double acc = smoothed ? log.epochs[i].smoothed_accuracy : log.epochs[i].val_accuracy;
            pts << x_of(i) << ',' << y_of(acc);
        }
        return "  <polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" +
               pts.str() + "\"/>\n";
    };

    std::ostringstream out;
    out << std::fixed << std::setprecision(1);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "  <rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << plot_w << "\" height=\""
        << plot_h << "\" fill=\"none\" stroke=\"#888\"/>\n";
    out << "  <text x=\"" << margin << "\" y=\"" << margin - 12.0
        << "\" font-family=\"monospace\" font-size=\"14\">validation accuracy by epoch (seed "
        << log.seed << ", best " << log.best_epoch << ")</text>\n";
    out << polyline(false, "#4477aa");
    out << polyline(true, "#cc6677");
    out << "</svg>\n";
    return out.str();
}

void save_report(const EvalReport& report, const std::string& path) {
    ordered_json j;
    j["format"] = "ayn-report-v1";
    j["taxonomy"] = report.taxonomy;
    j["high_tau"] = report.high_tau;
    j["low_tau"] = report.low_tau;
    j["instances"] = report.instances;
    j["missing_predictions"] = report.missing_predictions;
    j["ignored_predictions"] = report.ignored_predictions;
    j["consensus"] = report.consensus;
    j["vqa"] = report.vqa;
    ordered_json rows = ordered_json::array();
    for (const auto& row : report.rows) {
        ordered_json r;
        r["label"] = row.label;
        r["count"] = row.count;
        r["accuracy"] = row.accuracy;
        r["wups_high"] = row.wups_high;
        r["wups_low"] = row.wups_low;
        if (row.acm) r["acm"] = *row.acm;
        if (row.mcm) r["mcm"] = *row.mcm;
        if (row.vqa) r["vqa"] = *row.vqa;
        rows.push_back(std::move(r));
    }
    j["rows"] = rows;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot write report: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw Error("io", "failed writing report: " + path);
}

EvalReport load_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open report: " + path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const ordered_json::exception& e) {
        throw Error("format", path + ": " + e.what());
    }
    if (j.value("format", std::string{}) != "ayn-report-v1") {
        throw Error("format", path + ": not an ayn evaluation report");
    }
    EvalReport report;
    report.taxonomy = j.at("taxonomy").get<std::string>();
    report.high_tau = j.at("high_tau").get<double>();
    report.low_tau = j.at("low_tau").get<double>();
    report.instances = j.at("instances").get<std::size_t>();
    report.missing_predictions = j.at("missing_predictions").get<std::size_t>();
    report.ignored_predictions = j.at("ignored_predictions").get<std::size_t>();
    report.consensus = j.at("consensus").get<bool>();
    report.vqa = j.at("vqa").get<bool>();
    for (const auto& r : j.at("rows")) {
        MetricRow row;
        row.label = r.at("label").get<std::string>();
        row.count = r.at("count").get<std::size_t>();
        row.accuracy = r.at("accuracy").get<double>();
        row.wups_high = r.at("wups_high").get<double>();
        row.wups_low = r.at("wups_low").get<double>();
        if (r.contains("acm")) row.acm = r.at("acm").get<double>();
        if (r.contains("mcm")) row.mcm = r.at("mcm").get<double>();
        if (r.contains("vqa")) row.vqa = r.at("vqa").get<double>();
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace ayn

#include "ayn/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "ayn/error.hpp"

namespace ayn {

std::string normalize_answer(const std::string& raw) {
    std::string s;
    s.reserve(raw.size());
    for (char c : raw) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    s = s.substr(b, e - b + 1);
    while (!s.empty()) {
        char last = s.back();
        if (last == '.' || last == '!' || last == '?' || last == ';' || last == ':' || last == ',') {
            s.pop_back();
        } else {
            break;
        }
    }
    // Trailing whitespace may be exposed by stripping punctuation.
    std::size_t e2 = s.find_last_not_of(" \t\r\n");
    if (e2 == std::string::npos) return "";
    return s.substr(0, e2 + 1);
}

AnswerSet normalize_answer_set(const std::string& raw) {
    AnswerSet out;
    std::stringstream ss(raw);
    std::string part;
    while (std::getline(ss, part, ',')) {
        std::string n = normalize_answer(part);
        if (!n.empty()) out.push_back(std::move(n));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string answer_set_to_string(const AnswerSet& set) {
    std::string out;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (i > 0) out += ", ";
        out += set[i];
    }
    return out;
}

MuFunction make_indicator_mu() {
    return [](const std::string& a, const std::string& b) { return a == b ? 1.0 : 0.0; };
}

MuFunction make_taxonomy_mu(const Taxonomy& taxonomy, double tau) {
    if (tau < 0.0 || tau > 1.0) throw Error("range", "mu threshold must lie in [0, 1]");
    return [&taxonomy, tau](const std::string& a, const std::string& b) {
        return taxonomy.mu_thresholded(a, b, tau);
    };
}

namespace {

double directional_product(const AnswerSet& from, const AnswerSet& to, const MuFunction& mu) {
    double product = 1.0;
    for (const auto& a : from) {
        double best = 0.0;
        for (const auto& t : to) best = std::max(best, mu(a, t));
        product *= best;
    }
    return product;
}

}  // namespace

double wups_instance(const AnswerSet& predicted, const AnswerSet& reference, const MuFunction& mu) {
    if (predicted.empty() || reference.empty()) {
        throw Error("invalid-value", "wups_instance: answer sets must be non-empty");
    }
    return std::min(directional_product(predicted, reference, mu),
                    directional_product(reference, predicted, mu));
}

namespace {

/// Empty predictions score 0 ("empty answer" convention from the lookup
/// baseline) instead of erroring the whole corpus.
double instance_or_zero(const AnswerSet& predicted, const AnswerSet& reference, const MuFunction& mu) {
    if (predicted.empty()) return 0.0;
    return wups_instance(predicted, reference, mu);
}

}  // namespace

double wups_corpus(const std::vector<EvalInstance>& instances, const MuFunction& mu) {
    if (instances.empty()) throw Error("invalid-value", "wups_corpus: no instances");
    double total = 0.0;
    for (const auto& inst : instances) {
        if (inst.references.empty() || inst.references[0].empty()) {
            throw Error("invalid-value", "wups_corpus: instance without a reference answer");
        }
        total += instance_or_zero(inst.predicted, inst.references[0], mu);
    }
    return 100.0 * total / static_cast<double>(instances.size());
}

double consensus_score(const std::vector<EvalInstance>& instances, const MuFunction& mu, ConsensusMode mode) {
    if (instances.empty()) throw Error("invalid-value", "consensus_score: no instances");
    double total = 0.0;
    for (const auto& inst : instances) {
        if (inst.references.empty()) {
            throw Error("invalid-value", "consensus_score: instance without references");
        }
        if (mode == ConsensusMode::average) {
            double acc = 0.0;
            for (const auto& ref : inst.references) acc += instance_or_zero(inst.predicted, ref, mu);
            total += acc / static_cast<double>(inst.references.size());
        } else {
            double best = 0.0;
            for (const auto& ref : inst.references) best = std::max(best, instance_or_zero(inst.predicted, ref, mu));
            total += best;
        }
    }
    return total / static_cast<double>(instances.size());
}

double vqa_accuracy(const std::string& predicted, const std::vector<std::string>& human_answers) {
    if (human_answers.empty()) throw Error("invalid-value", "vqa_accuracy: no human answers");
    const std::string p = normalize_answer(predicted);
    std::size_t matches = 0;
    for (const auto& h : human_answers) {
        if (normalize_answer(h) == p) ++matches;
    }
    return std::min(static_cast<double>(matches) / 3.0, 1.0);
}

std::string to_string(Agreement a) {
    switch (a) {
        case Agreement::none: return "none";
        case Agreement::partial: return "partial";
        case Agreement::at_least_half: return "at-least-half";
        case Agreement::full: return "full";
    }
    throw Error("invalid-value", "unrepresentable agreement class");
}

Agreement agreement_split(const std::vector<AnswerSet>& references) {
    const std::size_t k = references.size();
    if (k < 2) throw Error("invalid-value", "agreement_split: needs at least 2 references");
    std::map<AnswerSet, std::size_t> counts;
    for (const auto& r : references) ++counts[r];
    std::size_t m = 0;
    for (const auto& [set, count] : counts) m = std::max(m, count);
    if (m == k) return Agreement::full;
    if (m == 1) return Agreement::none;
    const std::size_t half = (k + 1) / 2;  // ceil(k/2)
    if (m >= half) return Agreement::at_least_half;
    return Agreement::partial;
}

}  // namespace ayn

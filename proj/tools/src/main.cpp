#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ayn/baselines.hpp"
#include "ayn/data.hpp"
#include "ayn/error.hpp"
#include "ayn/model.hpp"
#include "ayn/report.hpp"
#include "ayn/synthetic.hpp"
#include "ayn/taxonomy.hpp"
#include "json.hpp"

namespace {

using nlohmann::ordered_json;

/// Relative inputs that do not exist where given are retried under
/// $AYN_DATA_DIR; outputs are always used verbatim.
std::string resolve_input(const std::string& path) {
    namespace fs = std::filesystem;
    if (path.empty() || fs::exists(path)) return path;
    if (const char* dir = std::getenv("AYN_DATA_DIR")) {
        const fs::path candidate = fs::path(dir) / path;
        if (fs::exists(candidate)) return candidate.string();
    }
    return path;
}

/// DAQUAR-style .txt question/answer pairs or one-object-per-line JSONL.
std::vector<ayn::QAInstance> load_qa(const std::string& raw_path) {
    const std::string path = resolve_input(raw_path);
    if (path.size() > 4 && path.substr(path.size() - 4) == ".txt") {
        return ayn::load_daquar_txt(path);
    }
    return ayn::load_qa_jsonl(path);
}

ayn::FeatureFormat detect_feature_format(const std::string& path, const std::string& requested) {
    if (requested == "tsv") return ayn::FeatureFormat::tsv;
    if (requested == "binary") return ayn::FeatureFormat::binary;
    if (requested != "auto") {
        throw ayn::Error("invalid-value",
                         "unknown feature format '" + requested + "' (expected auto, tsv or binary)");
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ayn::Error("io", "cannot open feature file: " + path);
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() == 4 && std::string(magic, 4) == "AYNF") return ayn::FeatureFormat::binary;
    return ayn::FeatureFormat::tsv;
}

ayn::VisualFeatureStore load_features(const std::string& raw_path, const std::string& format) {
    const std::string path = resolve_input(raw_path);
    return ayn::VisualFeatureStore::load(path, detect_feature_format(path, format));
}

/// Accepts TOML natively and JSON when the first non-space byte is '{';
/// JSON objects one level deep become [section] entries.
class JsonOrTomlConfig : public CLI::ConfigTOML {
public:
    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        std::ostringstream buffer;
        buffer << input.rdbuf();
        const std::string text = buffer.str();
        const auto first = text.find_first_not_of(" \t\r\n");
        if (first == std::string::npos || text[first] != '{') {
            std::istringstream again(text);
            return CLI::ConfigTOML::from_config(again);
        }
        ordered_json j;
        try {
            j = ordered_json::parse(text);
        } catch (const ordered_json::exception& e) {
            throw CLI::FileError(std::string("config is not valid JSON: ") + e.what());
        }
        std::vector<CLI::ConfigItem> items;
        auto scalar = [](const ordered_json& v) -> std::string {
            if (v.is_string()) return v.get<std::string>();
            return v.dump();
        };
        auto add = [&](std::vector<std::string> parents, const std::string& name, const ordered_json& v) {
            CLI::ConfigItem item;
            item.parents = std::move(parents);
            item.name = name;
            if (v.is_array()) {
                for (const auto& element : v) item.inputs.push_back(scalar(element));
            } else {
                item.inputs.push_back(scalar(v));
            }
            items.push_back(std::move(item));
        };
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                for (const auto& [inner, v] : value.items()) add({key}, inner, v);
            } else {
                add({}, key, value);
            }
        }
        return items;
    }
};

/// String-typed mirror of RunConfig so config files and flags share one
/// binding; converted (and validated) after parsing.
struct ConfigFlags {
    ayn::RunConfig config;
    std::string encoder = "lstm";
    std::string decoder = "classify";
    std::string embedding_mode = "learned";
    std::string cnn_activation = "tanh";
    std::string cnn_aggregation = "sum-pool";
    std::string fusion = "concat";
    std::string answer_selection = "random";
    std::string optimizer = "adam";

    void bind(CLI::App& cmd) {
        cmd.add_option("--encoder", encoder, "question encoder: bow, cnn, lstm or gru");
        cmd.add_option("--decoder", decoder, "answer decoder: classify or generate");
        cmd.add_option("--embedding-mode", embedding_mode,
                       "learned, pretrained-frozen or pretrained-finetuned");
        cmd.add_option("--embeddings", config.embedding_path, "pretrained embedding text file");
        cmd.add_option("--embed-dim", config.embed_dim, "word embedding width");
        cmd.add_option("--hidden-dim", config.hidden_dim, "recurrent state width");
        cmd.add_option("--cnn-views", config.cnn_views, "convolution view widths 1..N");
        cmd.add_option("--cnn-feature-maps", config.cnn_feature_maps, "feature maps per view");
        cmd.add_option("--cnn-activation", cnn_activation, "tanh or linear");
        cmd.add_option("--cnn-aggregation", cnn_aggregation, "sum-pool or rnn");
        cmd.add_option("--fusion", fusion, "concat, multiply or sum");
        cmd.add_flag("--normalize-visual", config.normalize_visual,
                     "l2-normalize the visual vector before fusing");
        cmd.add_option("--top-k", config.top_k, "number of answer classes");
        cmd.add_option("--answer-selection", answer_selection,
                       "training answer among multiple references: random, confident-random, "
                       "all or most-frequent");
        cmd.add_option("--max-length", config.generation.max_length, "generation length cap");
        cmd.add_flag("--dedup", config.generation.dedup, "suppress already-emitted answer words");
        cmd.add_option("--optimizer", optimizer, "adam or sgd-momentum");
        cmd.add_option("--learning-rate", config.optimizer.learning_rate, "optimizer step size");
        cmd.add_option("--beta1", config.optimizer.beta1, "adam first-moment decay");
        cmd.add_option("--beta2", config.optimizer.beta2, "adam second-moment decay");
        cmd.add_option("--epsilon", config.optimizer.epsilon, "adam denominator floor");
        cmd.add_option("--momentum", config.optimizer.momentum, "sgd momentum factor");
        cmd.add_option("--epochs", config.epochs, "training epochs");
        cmd.add_option("--batch-size", config.batch_size, "minibatch size");
        cmd.add_option("--validation-fraction", config.validation_fraction,
                       "tail fraction of the training file held out per epoch");
        cmd.add_option("--smoothing-window", config.smoothing_window,
                       "box-filter width for the validation curve (odd)");
        cmd.add_option("--seed", config.seed, "run seed, recorded in every artifact");
    }

    ayn::RunConfig resolve() {
        config.encoder = ayn::encoder_kind_from_string(encoder);
        config.decoder = ayn::decoder_kind_from_string(decoder);
        config.embedding_mode = ayn::embedding_mode_from_string(embedding_mode);
        config.cnn_activation = ayn::cnn_activation_from_string(cnn_activation);
        config.cnn_aggregation = ayn::cnn_aggregation_from_string(cnn_aggregation);
        config.fusion = ayn::fusion_mode_from_string(fusion);
        config.answer_selection = ayn::answer_selection_from_string(answer_selection);
        config.optimizer.kind = ayn::optimizer_kind_from_string(optimizer);
        if (!config.embedding_path.empty()) config.embedding_path = resolve_input(config.embedding_path);
        ayn::validate(config);
        return config;
    }
};

int run(int argc, char** argv) {
    CLI::App app{"ayn: question answering about images - training, inference, baselines, evaluation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(ayn::kVersion));
    // Lets `--config` appear after the subcommand name; the root app owns the option.
    app.fallthrough();
    app.set_config("--config", "", "configuration file (TOML or JSON)");
    app.config_formatter(std::make_shared<JsonOrTomlConfig>());

    // --- train ---
    auto* train = app.add_subcommand("train", "train a model from question/answer pairs")->configurable();
    auto train_flags = std::make_shared<ConfigFlags>();
    auto train_qa = std::make_shared<std::string>();
    auto train_features = std::make_shared<std::string>();
    auto train_feature_format = std::make_shared<std::string>("auto");
    auto train_checkpoint = std::make_shared<std::string>("checkpoint.json");
    auto train_log_path = std::make_shared<std::string>("train_log.json");
    train->add_option("--train-qa", *train_qa, "training questions and answers")->required();
    train->add_option("--features", *train_features, "image feature file")->required();
    train->add_option("--feature-format", *train_feature_format, "auto, tsv or binary");
    train->add_option("--checkpoint", *train_checkpoint, "checkpoint output path");
    train->add_option("--log", *train_log_path, "training log output path");
    train_flags->bind(*train);
    train->callback([=]() {
        const ayn::RunConfig config = train_flags->resolve();
        const auto corpus = load_qa(*train_qa);
        const auto features = load_features(*train_features, *train_feature_format);
        ayn::VqaModel model = ayn::build_model(config, corpus, features);
        const ayn::TrainLog log = ayn::train_model(model, corpus, features);
        ayn::save_checkpoint(model, *train_checkpoint);
        ayn::save_train_log(log, *train_log_path);
        std::cout << ayn::render_text(log);
        std::cout << "checkpoint: " << *train_checkpoint << "\ntraining log: " << *train_log_path
                  << '\n';
    });

    // --- predict ---
    auto* predict = app.add_subcommand("predict", "run a trained model over questions")->configurable();
    auto predict_checkpoint = std::make_shared<std::string>();
    auto predict_qa = std::make_shared<std::string>();
    auto predict_features = std::make_shared<std::string>();
    auto predict_feature_format = std::make_shared<std::string>("auto");
    auto predict_output = std::make_shared<std::string>("predictions.jsonl");
    predict->add_option("--checkpoint", *predict_checkpoint, "trained model checkpoint")->required();
    predict->add_option("--test-qa", *predict_qa, "questions to answer")->required();
    predict->add_option("--features", *predict_features, "image feature file")->required();
    predict->add_option("--feature-format", *predict_feature_format, "auto, tsv or binary");
    predict->add_option("--output", *predict_output, "predictions output path (JSONL)");
    predict->callback([=]() {
        ayn::VqaModel model = ayn::load_checkpoint(resolve_input(*predict_checkpoint));
        const auto corpus = load_qa(*predict_qa);
        const auto features = load_features(*predict_features, *predict_feature_format);
        std::size_t missing = 0;
        const auto predictions = ayn::predict_corpus(model, corpus, features, &missing);
        ayn::save_predictions_jsonl(predictions, *predict_output);
        if (missing > 0) {
            std::cerr << "warning: " << missing
                      << " instance(s) had no image feature; emitted empty answers\n";
        }
        std::cout << "wrote " << predictions.size() << " prediction(s) to " << *predict_output
                  << " (seed " << model.config.seed << ")\n";
    });

    // --- eval ---
    auto* eval = app.add_subcommand("eval", "score predictions against references")->configurable();
    auto eval_predictions = std::make_shared<std::string>();
    auto eval_references = std::make_shared<std::string>();
    auto eval_taxonomy = std::make_shared<std::string>();
    auto eval_word_map = std::make_shared<std::string>();
    auto eval_json = std::make_shared<std::string>("report.json");
    auto eval_options = std::make_shared<ayn::EvalOptions>();
    eval->add_option("--predictions", *eval_predictions, "predictions JSONL")->required();
    eval->add_option("--references", *eval_references, "reference questions and answers")->required();
    eval->add_option("--taxonomy", *eval_taxonomy, "taxonomy edge file for graded similarity");
    eval->add_option("--word-map", *eval_word_map, "word-to-taxonomy-node map");
    eval->add_option("--high-tau", eval_options->high_tau, "strict similarity threshold");
    eval->add_option("--low-tau", eval_options->low_tau, "lenient similarity threshold");
    eval->add_flag("--vqa", eval_options->include_vqa, "also report the min(matches/3, 1) column");
    eval->add_option("--json", *eval_json, "report JSON output path");
    eval->callback([=]() {
        const auto predictions = ayn::load_predictions_jsonl(resolve_input(*eval_predictions));
        const auto references = load_qa(*eval_references);
        std::optional<ayn::Taxonomy> taxonomy;
        if (!eval_taxonomy->empty()) {
            taxonomy = ayn::Taxonomy::load(resolve_input(*eval_taxonomy), resolve_input(*eval_word_map));
        } else if (!eval_word_map->empty()) {
            throw ayn::Error("invalid-value", "eval: --word-map needs --taxonomy");
        }
        const ayn::EvalReport report = ayn::evaluate_predictions(
            predictions, references, taxonomy ? &*taxonomy : nullptr, *eval_options);
        std::cout << ayn::render_text(report);
        if (!eval_json->empty()) {
            ayn::save_report(report, *eval_json);
            std::cout << "report json: " << *eval_json << '\n';
        }
    });

    // --- baseline ---
    auto* baseline = app.add_subcommand("baseline", "run a non-neural baseline")->configurable();
    auto baseline_kind = std::make_shared<std::string>();
    auto baseline_train = std::make_shared<std::string>();
    auto baseline_test = std::make_shared<std::string>();
    auto baseline_embeddings = std::make_shared<std::string>();
    auto baseline_features = std::make_shared<std::string>();
    auto baseline_feature_format = std::make_shared<std::string>("auto");
    auto baseline_k = std::make_shared<std::size_t>(4);
    auto baseline_strip_articles = std::make_shared<bool>(false);
    auto baseline_output = std::make_shared<std::string>("predictions.jsonl");
    baseline->add_option("--kind", *baseline_kind,
                         "constant, per-type-constant, lookup, nn-question or nn-visual")
        ->required();
    baseline->add_option("--train-qa", *baseline_train, "training questions and answers")->required();
    baseline->add_option("--test-qa", *baseline_test, "questions to answer")->required();
    baseline->add_option("--embeddings", *baseline_embeddings,
                         "pretrained embedding text file (nn-question, nn-visual)");
    baseline->add_option("--features", *baseline_features, "image feature file (nn-visual)");
    baseline->add_option("--feature-format", *baseline_feature_format, "auto, tsv or binary");
    baseline->add_option("--k", *baseline_k, "candidate questions for the visual stage");
    baseline->add_flag("--strip-articles", *baseline_strip_articles,
                       "drop 'the'/'a' from lookup keys");
    baseline->add_option("--output", *baseline_output, "predictions output path (JSONL)");
    baseline->callback([=]() {
        const auto train_corpus = load_qa(*baseline_train);
        const auto test_corpus = load_qa(*baseline_test);
        auto join = [](const std::vector<std::string>& tokens) {
            std::string out;
            for (const auto& t : tokens) {
                if (!out.empty()) out += ' ';
                out += t;
            }
            return out;
        };
        std::vector<ayn::Prediction> predictions;
        predictions.reserve(test_corpus.size());
        const std::string& kind = *baseline_kind;
        auto require = [&](const std::string& value, const char* flag) {
            if (value.empty()) {
                throw ayn::Error("invalid-value", "baseline " + kind + " requires " + flag);
            }
        };
        if (kind == "constant") {
            const auto model = ayn::ConstantBaseline::fit(train_corpus);
            for (const auto& inst : test_corpus) {
                predictions.push_back({inst.id, model.predict(join(inst.question_tokens))});
            }
        } else if (kind == "per-type-constant") {
            const auto model = ayn::PerTypeConstantBaseline::fit(train_corpus);
            for (const auto& inst : test_corpus) {
                predictions.push_back({inst.id, model.predict(join(inst.question_tokens))});
            }
        } else if (kind == "lookup") {
            const auto model = ayn::LookupTableBaseline::fit(train_corpus, *baseline_strip_articles);
            for (const auto& inst : test_corpus) {
                predictions.push_back({inst.id, model.predict(join(inst.question_tokens))});
            }
        } else if (kind == "nn-question" || kind == "nn-visual") {
            require(*baseline_embeddings, "--embeddings");
            const auto table = ayn::EmbeddingTable::pretrained(resolve_input(*baseline_embeddings),
                                                               ayn::EmbeddingMode::pretrained_frozen);
            const auto model = ayn::NearestNeighborBaseline::fit(train_corpus, table);
            if (kind == "nn-question") {
                for (const auto& inst : test_corpus) {
                    predictions.push_back(
                        {inst.id, model.predict_question_only(join(inst.question_tokens))});
                }
            } else {
                require(*baseline_features, "--features");
                const auto features = load_features(*baseline_features, *baseline_feature_format);
                std::size_t skipped_total = 0;
                for (const auto& inst : test_corpus) {
                    std::size_t skipped = 0;
                    predictions.push_back(
                        {inst.id, model.predict_visual(join(inst.question_tokens), inst.image_id,
                                                       features, *baseline_k, &skipped)});
                    skipped_total += skipped;
                }
                if (skipped_total > 0) {
                    std::cerr << "warning: skipped " << skipped_total
                              << " candidate(s) without image features\n";
                }
            }
        } else {
            throw ayn::Error("invalid-value",
                             "unknown baseline '" + kind +
                                 "' (expected constant, per-type-constant, lookup, nn-question or "
                                 "nn-visual)");
        }
        ayn::save_predictions_jsonl(predictions, *baseline_output);
        std::cout << "wrote " << predictions.size() << " prediction(s) to " << *baseline_output << '\n';
    });

    // --- report ---
    auto* report = app.add_subcommand("report", "render a saved report or training log")->configurable();
    auto report_input = std::make_shared<std::string>();
    auto report_svg = std::make_shared<std::string>();
    report->add_option("--input", *report_input, "evaluation report or training log JSON")->required();
    report->add_option("--svg", *report_svg, "write a validation-curve SVG (training logs)");
    report->callback([=]() {
        const std::string path = resolve_input(*report_input);
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ayn::Error("io", "cannot open artifact: " + path);
        ordered_json j;
        try {
            j = ordered_json::parse(in);
        } catch (const ordered_json::exception& e) {
            throw ayn::Error("format", path + ": " + e.what());
        }
        const std::string format = j.value("format", std::string{});
        if (format == "ayn-report-v1") {
            if (!report_svg->empty()) {
                throw ayn::Error("invalid-value", "report: --svg applies to training logs only");
            }
            std::cout << ayn::render_text(ayn::load_report(path));
        } else if (format == "ayn-train-log-v1") {
            const ayn::TrainLog log = ayn::load_train_log(path);
            std::cout << ayn::render_text(log);
            if (!report_svg->empty()) {
                std::ofstream svg(*report_svg, std::ios::binary);
                if (!svg) throw ayn::Error("io", "cannot write svg: " + *report_svg);
                svg << ayn::render_svg(log);
                std::cout << "svg: " << *report_svg << '\n';
            }
        } else {
            throw ayn::Error("format", path + ": unrecognized artifact format '" + format + "'");
        }
    });

    // --- synth ---
    auto* synth = app.add_subcommand("synth", "generate the deterministic toy corpus")->configurable();
    auto synth_spec = std::make_shared<ayn::ToyWorldSpec>();
    auto synth_colors = std::make_shared<std::vector<std::string>>(synth_spec->colors);
    auto synth_shapes = std::make_shared<std::vector<std::string>>(synth_spec->shapes);
    auto synth_families = std::make_shared<std::vector<std::string>>();
    auto synth_train_out = std::make_shared<std::string>("toy_train.jsonl");
    auto synth_test_out = std::make_shared<std::string>("toy_test.jsonl");
    auto synth_features_out = std::make_shared<std::string>("toy_features.bin");
    auto synth_key_out = std::make_shared<std::string>("toy_key.jsonl");
    auto synth_format = std::make_shared<std::string>("binary");
    synth->add_option("--seed", synth_spec->seed, "world seed");
    synth->add_option("--images", synth_spec->num_images, "number of images");
    synth->add_option("--train-count", synth_spec->num_train, "training instances");
    synth->add_option("--test-count", synth_spec->num_test, "test instances");
    synth->add_option("--colors", *synth_colors, "color palette")->delimiter(',');
    synth->add_option("--shapes", *synth_shapes, "shape palette")->delimiter(',');
    synth->add_option("--feature-dim", synth_spec->feature_dim,
                      "feature width (0 = colors + shapes)");
    synth->add_option("--noise", synth_spec->noise_scale, "gaussian feature noise scale");
    synth->add_option("--families", *synth_families,
                      "question families: color, shape, sides, bias, describe")->delimiter(',');
    synth->add_option("--train-out", *synth_train_out, "training QA output");
    synth->add_option("--test-out", *synth_test_out, "test QA output");
    synth->add_option("--features-out", *synth_features_out, "feature file output");
    synth->add_option("--key-out", *synth_key_out, "answer-key output");
    synth->add_option("--format", *synth_format, "feature output format: tsv or binary");
    synth->callback([=]() {
        ayn::ToyWorldSpec spec = *synth_spec;
        spec.colors = *synth_colors;
        spec.shapes = *synth_shapes;
        if (!synth_families->empty()) {
            spec.families.clear();
            for (const auto& name : *synth_families) {
                spec.families.push_back(ayn::toy_family_from_string(name));
            }
        }
        const ayn::FeatureFormat format = *synth_format == "tsv" ? ayn::FeatureFormat::tsv
                                          : *synth_format == "binary"
                                              ? ayn::FeatureFormat::binary
                                              : throw ayn::Error("invalid-value",
                                                                 "unknown feature format '" +
                                                                     *synth_format +
                                                                     "' (expected tsv or binary)");
        const ayn::ToyWorld world = ayn::generate_toy_world(spec);
        ayn::save_toy_world(world, *synth_train_out, *synth_test_out, *synth_features_out, format,
                            *synth_key_out);
        std::cout << "toy world (seed " << spec.seed << "): " << world.train.size() << " train, "
                  << world.test.size() << " test, " << world.features.size() << " images\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << ordered_json{{"error", {{"code", "cli"}, {"message", e.what()}}}}.dump() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ayn::Error& e) {
        std::cerr << ordered_json{{"error", {{"code", e.code()}, {"message", e.what()}}}}.dump()
                  << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << ordered_json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump()
                  << '\n';
        return 1;
    }
}

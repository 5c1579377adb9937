#include "ayn/synthetic.hpp"

#include <fstream>
#include <unordered_map>

#include "ayn/error.hpp"
#include "ayn/rng.hpp"
#include "json.hpp"

namespace ayn {

std::string to_string(ToyFamily f) {
    switch (f) {
        case ToyFamily::color: return "color";
        case ToyFamily::shape: return "shape";
        case ToyFamily::sides: return "sides";
        case ToyFamily::bias: return "bias";
        case ToyFamily::describe: return "describe";
    }
    throw Error("invalid-value", "unrepresentable toy family");
}

ToyFamily toy_family_from_string(const std::string& name) {
    if (name == "color") return ToyFamily::color;
    if (name == "shape") return ToyFamily::shape;
    if (name == "sides") return ToyFamily::sides;
    if (name == "bias") return ToyFamily::bias;
    if (name == "describe") return ToyFamily::describe;
    throw Error("invalid-value", "unknown toy family: " + name);
}

bool is_vision_dependent(ToyFamily f) { return f != ToyFamily::bias; }

namespace {

const std::unordered_map<std::string, int>& side_counts() {
    static const std::unordered_map<std::string, int> counts{
        {"triangle", 3}, {"square", 4}, {"pentagon", 5}, {"hexagon", 6}};
    return counts;
}

void validate(const ToyWorldSpec& spec) {
    if (spec.colors.empty() || spec.shapes.empty() || spec.colors.size() * spec.shapes.size() < 4) {
        throw Error("invalid-value", "toy world needs colors x shapes >= 4");
    }
    if (spec.num_images == 0) throw Error("invalid-value", "toy world needs at least one image");
    if (spec.num_train == 0 || spec.num_test == 0) {
        throw Error("invalid-value", "toy world needs non-empty train and test splits");
    }
    if (spec.noise_scale < 0.0) throw Error("invalid-value", "noise scale must be non-negative");
    if (spec.families.empty()) throw Error("invalid-value", "toy world needs at least one question family");
    const std::size_t base_dim = spec.colors.size() + spec.shapes.size();
    if (spec.feature_dim != 0 && spec.feature_dim < base_dim) {
        throw Error("invalid-value", "feature_dim must be at least colors + shapes (" +
                                         std::to_string(base_dim) + ")");
    }
    for (ToyFamily f : spec.families) {
        if (f != ToyFamily::sides) continue;
        for (const auto& s : spec.shapes) {
            if (!side_counts().count(s)) {
                throw Error("invalid-value", "side-count family needs known shapes; '" + s + "' is not one");
            }
        }
    }
}

std::vector<std::string> question_for(ToyFamily f) {
    switch (f) {
        case ToyFamily::color: return {"what", "color", "is", "the", "object"};
        case ToyFamily::shape: return {"what", "shape", "is", "the", "object"};
        case ToyFamily::sides: return {"how", "many", "sides", "does", "the", "object", "have"};
        case ToyFamily::bias: return {"what", "color", "is", "the", "sky"};
        case ToyFamily::describe: return {"describe", "the", "object"};
    }
    throw Error("invalid-value", "unrepresentable toy family");
}

std::string answer_for(ToyFamily f, const std::string& color, const std::string& shape) {
    switch (f) {
        case ToyFamily::color: return color;
        case ToyFamily::shape: return shape;
        case ToyFamily::sides: return std::to_string(side_counts().at(shape));
        case ToyFamily::bias: return "blue";
        case ToyFamily::describe: return color + ", " + shape;
    }
    throw Error("invalid-value", "unrepresentable toy family");
}

}  // namespace

ToyWorld generate_toy_world(const ToyWorldSpec& spec) {
    validate(spec);
    const std::size_t n_colors = spec.colors.size();
    const std::size_t n_shapes = spec.shapes.size();
    const std::size_t dim = spec.feature_dim == 0 ? n_colors + n_shapes : spec.feature_dim;

    ToyWorld world(dim);

    // Cyclic assignment keeps the color/shape marginals uniform.
    std::vector<std::size_t> image_color(spec.num_images), image_shape(spec.num_images);
    Rng feature_rng = Rng::derive(spec.seed, 1);
    for (std::size_t i = 0; i < spec.num_images; ++i) {
        image_color[i] = i % n_colors;
        image_shape[i] = (i / n_colors) % n_shapes;
        std::vector<double> feature(dim, 0.0);
        feature[image_color[i]] = 1.0;
        feature[n_colors + image_shape[i]] = 1.0;
        for (double& v : feature) v += spec.noise_scale * feature_rng.normal();
        world.features.insert("image" + std::to_string(i), feature);
    }

    Rng question_rng = Rng::derive(spec.seed, 2);
    auto emit = [&](const std::string& id_prefix, std::size_t count, std::vector<QAInstance>& out) {
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t img = question_rng.index(spec.num_images);
            const ToyFamily family = spec.families[question_rng.index(spec.families.size())];
            const std::string& color = spec.colors[image_color[img]];
            const std::string& shape = spec.shapes[image_shape[img]];

            QAInstance inst;
            inst.id = id_prefix + std::to_string(i + 1);
            inst.image_id = "image" + std::to_string(img);
            inst.question_tokens = question_for(family);
            inst.answers.push_back(normalize_answer_set(answer_for(family, color, shape)));
            out.push_back(std::move(inst));

            world.key.push_back({out.back().id, family, out.back().image_id, color, shape});
        }
    };
    emit("train-", spec.num_train, world.train);
    emit("test-", spec.num_test, world.test);
    return world;
}

void save_toy_world(const ToyWorld& world, const std::string& train_path, const std::string& test_path,
                    const std::string& features_path, FeatureFormat features_format,
                    const std::string& key_path) {
    save_qa_jsonl(world.train, train_path);
    save_qa_jsonl(world.test, test_path);
    world.features.save(features_path, features_format);

    std::ofstream out(key_path);
    if (!out) throw Error("io", "cannot write answer key: " + key_path);
    for (const auto& entry : world.key) {
        nlohmann::ordered_json obj;
        obj["id"] = entry.id;
        obj["family"] = to_string(entry.family);
        obj["image"] = entry.image_id;
        obj["color"] = entry.color;
        obj["shape"] = entry.shape;
        obj["vision"] = is_vision_dependent(entry.family);
        out << obj.dump() << '\n';
    }
}

std::vector<ToyKeyEntry> load_toy_key(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot open answer key: " + path);
    std::vector<ToyKeyEntry> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        try {
            auto obj = nlohmann::json::parse(line);
            ToyKeyEntry entry;
            entry.id = obj.at("id").get<std::string>();
            entry.family = toy_family_from_string(obj.at("family").get<std::string>());
            entry.image_id = obj.at("image").get<std::string>();
            entry.color = obj.at("color").get<std::string>();
            entry.shape = obj.at("shape").get<std::string>();
            out.push_back(std::move(entry));
        } catch (const nlohmann::json::exception& e) {
            throw Error("format", path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace ayn

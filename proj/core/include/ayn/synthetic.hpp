#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ayn/data.hpp"

namespace ayn {

/// Question families of the toy world. The first three read the image;
/// bias is answerable from the question alone; describe has a two-word
/// answer ({color, shape}) for exercising sequence generation.
enum class ToyFamily { color, shape, sides, bias, describe };
std::string to_string(ToyFamily f);
ToyFamily toy_family_from_string(const std::string& name);
bool is_vision_dependent(ToyFamily f);

/// Deterministic specification of a toy world of one-object images.
/// Features are one-hot(color) ++ one-hot(shape) (++ zero padding) with
/// Gaussian noise on every coordinate.
struct ToyWorldSpec {
    std::uint64_t seed = 7;
    std::size_t num_images = 64;
    std::size_t num_train = 2000;
    std::size_t num_test = 500;
    std::vector<std::string> colors = {"red",   "green", "blue",   "yellow",
                                       "white", "black", "orange", "purple"};
    std::vector<std::string> shapes = {"triangle", "square", "pentagon", "hexagon"};
    std::size_t feature_dim = 0;  // 0 means colors.size() + shapes.size()
    double noise_scale = 0.1;
    std::vector<ToyFamily> families = {ToyFamily::color, ToyFamily::shape, ToyFamily::sides,
                                       ToyFamily::bias};
};

struct ToyKeyEntry {
    std::string id;
    ToyFamily family;
    std::string image_id;
    std::string color;
    std::string shape;

    bool operator==(const ToyKeyEntry&) const = default;
};

struct ToyWorld {
    std::vector<QAInstance> train;
    std::vector<QAInstance> test;
    VisualFeatureStore features;
    std::vector<ToyKeyEntry> key;  // train entries then test entries

    explicit ToyWorld(std::size_t dim) : features(dim) {}
};

/// Same spec (incl. seed) -> identical world, bit for bit.
ToyWorld generate_toy_world(const ToyWorldSpec& spec);

/// Emits train/test QA JSONL, the feature file, and the answer-key JSONL
/// ({"id","family","image","color","shape","vision"}).
void save_toy_world(const ToyWorld& world, const std::string& train_path, const std::string& test_path,
                    const std::string& features_path, FeatureFormat features_format,
                    const std::string& key_path);

std::vector<ToyKeyEntry> load_toy_key(const std::string& path);

}  // namespace ayn

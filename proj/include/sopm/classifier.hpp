#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sopm/model.hpp"

namespace sopm {

inline constexpr double kProbabilityClamp = 1e-7;

/// Glorot-uniform weights, zero biases. An empty `hidden_dims` gives logistic
/// regression.
ClassifierParams init_classifier(int input_dim, std::span<const int> hidden_dims, std::uint64_t seed);

/// Probability of "salient", strictly inside (0,1).
double forward(const ClassifierParams& params, std::span<const float> features);
inline double forward(const ClassifierParams& params, const FeatureVector& f) { return forward(params, f.values); }

/// Mean binary cross-entropy with predictions clamped to [1e-7, 1-1e-7].
double bce_loss(std::span<const double> preds, std::span<const int> labels);

/// Analytic gradient of the clamped BCE on one sample, in the same layout as
/// ClassifierParams (per layer: weights then biases).
std::vector<double> loss_gradient(const ClassifierParams& params, std::span<const float> features, int label);

struct TrainingResult {
    ClassifierParams params;
    std::vector<double> epoch_losses;  // full-batch loss after each epoch
};

/// Full-batch gradient descent on the mean BCE, one step per epoch. Positives
/// are labelled 1, negatives 0. Deterministic: the sample order is fixed.
TrainingResult train(ClassifierParams params, std::span<const FeatureVector> pos_features,
                     std::span<const FeatureVector> neg_features, int epochs, double learning_rate);

/// Largest relative disagreement between the analytic gradient and central
/// finite differences (h = 1e-4) over all parameters. Parameters whose
/// perturbation flips a ReLU are skipped.
double gradient_check(const ClassifierParams& params, std::span<const float> features, int label);

/// "LIMC" binary: magic, u64 seed, u32 layer count, (u32 inputs, u32 outputs)
/// per layer, then per layer the weights and biases as little-endian f64.
std::string encode_classifier(const ClassifierParams& params);
ClassifierParams decode_classifier(const std::string& bytes, const std::string& origin = "<memory>");
void save_classifier(const ClassifierParams& params, const std::filesystem::path& path);
ClassifierParams load_classifier(const std::filesystem::path& path);

/// Flat copy of every parameter (per layer: weights then biases).
std::vector<double> flatten(const ClassifierParams& params);
void unflatten(std::span<const double> flat, ClassifierParams& params);

}  // namespace sopm

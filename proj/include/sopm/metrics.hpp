#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "sopm/model.hpp"

namespace sopm {

inline constexpr double kFBetaSquared = 0.3;
inline constexpr int kThresholdCount = 256;

double mae(const SaliencyMap& s, const SaliencyMap& gt);

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
};

/// For t = 0..255, binarize s at s > t/255. Precision is 1 when nothing is
/// predicted; recall is 0 when the ground truth is empty. gt must be binary.
std::array<PrecisionRecall, kThresholdCount> precision_recall(const SaliencyMap& s, const SaliencyMap& gt_binary);

/// (1+b2)PR/(b2 P + R) with b2 = 0.3; 0/0 counts as 0.
double f_measure(const PrecisionRecall& pr);

/// Best F-measure over the 256 thresholds.
double max_f_measure(const SaliencyMap& s, const SaliencyMap& gt_binary);

/// Structure measure, alpha * object term + (1 - alpha) * region term. An
/// all-background reference scores 1 - mean(s), an all-foreground one mean(s).
double s_measure(const SaliencyMap& s, const SaliencyMap& gt_binary, double alpha = 0.5);

/// Sets every value >= threshold to 1 and the rest to 0.
SaliencyMap binarize(const SaliencyMap& map, double threshold = 0.5);

/// Throws unless every value is exactly 0 or 1.
void require_binary(const SaliencyMap& gt, const char* who);

struct FrameScores {
    std::string name;
    double max_f = 0.0;
    double s_measure = 0.0;
    double mae = 0.0;
};

struct EvaluationReport {
    std::vector<FrameScores> per_frame;
    FrameScores mean;

    nlohmann::json to_json() const;
};

/// Scores every *.pgm in pred_dir against the same filename in gt_dir. Ground
/// truth maps are binarized at 0.5. Any file without a partner is an error.
EvaluationReport evaluate_directories(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir);

}  // namespace sopm

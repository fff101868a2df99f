#pragma once

// Deterministic synthetic sequences with ground truth: moving salient discs,
// static or moving distractor discs, and the provider files (motion maps,
// features, patch maps) the pipeline consumes.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sopm/ingest.hpp"
#include "sopm/model.hpp"

namespace sopm {

struct BlobSpec {
    double radius = 6.0;
    std::array<double, 2> start{0.0, 0.0};     // centre at frame 0, pixels
    std::array<double, 2> velocity{0.0, 0.0};  // pixels per frame; reflects at the borders

    bool operator==(const BlobSpec&) const = default;
};

struct SceneSpec {
    std::string name = "synthetic";
    int width = 96;
    int height = 96;
    int frames = 60;
    int feature_dim = static_cast<int>(kDefaultFeatureDim);
    std::vector<BlobSpec> salient;
    std::vector<BlobSpec> distractors;
    double motion_noise = 0.03;
    double feature_noise = 0.3;
    // Offset between salient and distractor prototypes along feature axis 0.
    // Axis-0 noise is truncated at 3 sigma, so margin > 6 * feature_noise
    // makes the two groups linearly separable.
    double prototype_margin = 4.0;
    int box_jitter = 2;
    double patch_noise = 0.05;

    /// Throws Error for infeasible scenes (blob larger than the frame, too
    /// many objects for the per-frame proposal cap, ...).
    void validate() const;
    bool operator==(const SceneSpec&) const = default;
};

void to_json(nlohmann::json& j, const SceneSpec& s);
void from_json(const nlohmann::json& j, SceneSpec& s);
SceneSpec load_scene(const std::filesystem::path& path);

/// Random placement of `salient` moving blobs and `distractors` static blobs.
SceneSpec random_scene(int salient, int distractors, int frames, std::uint64_t seed);

struct SyntheticSequence {
    SequenceManifest manifest;
    std::vector<SaliencyMap> gt_masks;        // per frame
    std::vector<int> proposal_object;         // object index per proposal (id-1)
    std::vector<bool> object_is_salient;      // per object: salient blobs first
};

/// Writes the full provider tree under out_dir (manifest.json, gt/, motion/,
/// features/, patches/, objects.json) and returns it loaded.
SyntheticSequence generate_sequence(const SceneSpec& spec, std::uint64_t seed, const std::filesystem::path& out_dir);

std::vector<SaliencyMap> load_gt_masks(const SequenceManifest& manifest);

/// Fraction of non-zero ground-truth pixels inside each proposal box (id-1).
std::vector<double> gt_occupancy(const SequenceManifest& manifest, const std::vector<SaliencyMap>& gt_masks);

/// Proposal ids ordered by descending occupancy, ties by id.
std::vector<int> oracle_trust_order(const SequenceManifest& manifest, const std::vector<SaliencyMap>& gt_masks);

/// Salient iff occupancy >= threshold; indexed by id-1.
std::vector<bool> oracle_label(const SequenceManifest& manifest, const std::vector<SaliencyMap>& gt_masks,
                               double threshold = 0.5);

}  // namespace sopm

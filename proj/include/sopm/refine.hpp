#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sopm/ingest.hpp"
#include "sopm/model.hpp"

namespace sopm {

/// (v - min) / (max - min); a constant patch maps to all zeros.
SaliencyMap normalize_minmax(const SaliencyMap& patch);

struct PlacedPatch {
    SaliencyMap patch;
    BoundingBox box;
};

/// Frame-level saliency: every patch is min-max normalised and placed at its
/// box. Covered pixels take the max (or mean) of the patches covering them,
/// uncovered pixels are 0.
SaliencyMap paste_frame_saliency(int frame_width, int frame_height, std::span<const PlacedPatch> patches,
                                 PasteMode mode);

/// S-measure of `fs` against the motion map binarized at 0.5.
double spatiotemporal_consistency(const SaliencyMap& fs, const SaliencyMap& ms);

/// One index per consecutive batch of b frames (the last batch may be
/// shorter): the highest score in the batch, earliest frame on ties.
std::vector<int> select_keyframes(std::span<const double> consistencies, int b);

struct FinetuneEntry {
    int frame_index = 0;
    std::string image_ref;
    std::string pseudo_gt_path;  // relative to the fine-tune manifest
};

struct FinetuneSet {
    std::string sequence;
    int epochs = 10;
    std::vector<FinetuneEntry> entries;
};

/// Writes each keyframe's FS map to out_dir/pseudo_gt/ and a manifest.json
/// listing the pairs; returns the manifest path.
std::filesystem::path export_finetune_set(const std::string& sequence, std::span<const int> keyframes,
                                          std::span<const SaliencyMap> fs_maps, const std::filesystem::path& out_dir,
                                          int epochs = 10);
FinetuneSet load_finetune_set(const std::filesystem::path& manifest_path);

/// Patch saliency for one proposal from the provider: the listed PGM, or the
/// motion-map crop when the manifest carries no patch maps.
SaliencyMap load_patch(const SequenceManifest& manifest, int frame_index, int rank, const SaliencyMap& motion_map);

}  // namespace sopm

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sopm/model.hpp"

namespace sopm {

struct FrameEntry {
    std::vector<ObjectProposal> proposals;  // detector-rank order
    std::string feature_path;
    std::string motion_map_path;
    std::optional<std::string> gt_map_path;
    std::vector<std::string> patch_map_paths;  // empty, or one per proposal
};

/// One video sequence as handed over by the external providers. Paths are
/// stored as written in the document; `resolve()` makes them absolute against
/// the manifest's directory.
struct SequenceManifest {
    std::string name;
    int frame_count = 0;
    int frame_width = 0;
    int frame_height = 0;
    std::vector<FrameEntry> frames;
    std::filesystem::path base_dir;

    std::size_t proposal_count() const;
    /// All proposals in id order (ids are 1..N, contiguous).
    std::vector<ObjectProposal> proposals() const;
    bool has_ground_truth() const;
    bool has_patch_maps() const;
    std::filesystem::path resolve(const std::string& path) const;
    ProviderBundle providers() const;
};

/// Parses and validates a manifest document. Proposal ids are reassigned in
/// (frame, rank) order; any ids present in the file are ignored.
SequenceManifest parse_manifest(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                                bool check_files = true);
SequenceManifest load_manifest(const std::filesystem::path& path);
nlohmann::json manifest_to_json(const SequenceManifest& manifest);
void save_manifest(const SequenceManifest& manifest, const std::filesystem::path& path);

/// Frames [first, first+count) as a standalone manifest with ids renumbered
/// from 1.
SequenceManifest slice_manifest(const SequenceManifest& manifest, int first, int count);

/// Binary PGM (P5), maxval 255. Values are byte/255.
SaliencyMap load_saliency_map(const std::filesystem::path& path);
SaliencyMap decode_pgm(const std::string& bytes, const std::string& origin = "<memory>");
/// Writes round(v*255) per pixel.
void save_saliency_map(const SaliencyMap& map, const std::filesystem::path& path);
std::string encode_pgm(const SaliencyMap& map);

/// "LIMF" feature file: magic, u32 count, u32 dim, count*dim f32, all
/// little-endian.
std::vector<FeatureVector> load_features(const std::filesystem::path& path);
std::vector<FeatureVector> decode_features(const std::string& bytes, const std::string& origin = "<memory>");
void save_features(const std::vector<FeatureVector>& features, const std::filesystem::path& path);
std::string encode_features(const std::vector<FeatureVector>& features);

/// Loads every frame's features in proposal-id order and checks the counts
/// and the shared dimension against the manifest.
std::vector<FeatureVector> load_sequence_features(const SequenceManifest& manifest);

SaliencyMap crop(const SaliencyMap& map, const BoundingBox& box);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace sopm

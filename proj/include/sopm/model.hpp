#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace sopm {

inline constexpr int kMaxProposalsPerFrame = 10;
inline constexpr std::size_t kDefaultFeatureDim = 512;

/// Pixel box, half-open on x1/y1, so area is (x1-x0)*(y1-y0).
struct BoundingBox {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    long area() const { return static_cast<long>(width()) * height(); }

    /// True when 0 <= x0 < x1 <= frame_width and likewise for y.
    bool fits(int frame_width, int frame_height) const {
        return 0 <= x0 && x0 < x1 && x1 <= frame_width && 0 <= y0 && y0 < y1 &&
               y1 <= frame_height;
    }

    bool operator==(const BoundingBox&) const = default;
};

struct ObjectProposal {
    int id = 0;           // 1..N, assigned in (frame, detector rank) order
    int frame_index = 0;  // 0-based
    BoundingBox box;
    double objectness = 0.0;

    bool operator==(const ObjectProposal&) const = default;
};

struct FeatureVector {
    std::vector<float> values;

    std::size_t dim() const { return values.size(); }
    bool operator==(const FeatureVector&) const = default;
};

/// Dense row-major grid of values in [0,1].
class SaliencyMap {
public:
    SaliencyMap() = default;
    SaliencyMap(int width, int height, double fill = 0.0);
    SaliencyMap(int width, int height, std::vector<double> values);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double at(int x, int y) const { return values_[index(x, y)]; }
    double& at(int x, int y) { return values_[index(x, y)]; }

    const double* row(int y) const { return values_.data() + static_cast<std::size_t>(y) * width_; }
    double* row(int y) { return values_.data() + static_cast<std::size_t>(y) * width_; }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    BoundingBox full_box() const { return {0, 0, width_, height_}; }

    /// Throws Error when a value is outside [0,1] or not finite.
    void validate() const;

    bool operator==(const SaliencyMap&) const = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

/// K-means result over one sequence. Positions in `assignment` are proposal
/// ids minus one.
struct ClusterPartition {
    int k = 0;
    std::vector<int> assignment;
    std::vector<FeatureVector> centroids;
    std::vector<bool> salient_flags;

    std::size_t proposal_count() const { return assignment.size(); }
    /// Proposal ids (1-based) of cluster `c`, ascending.
    std::vector<int> members(int c) const;
    int cluster_of(int proposal_id) const { return assignment.at(static_cast<std::size_t>(proposal_id - 1)); }
    bool is_salient(int c) const { return salient_flags.at(static_cast<std::size_t>(c)); }

    bool operator==(const ClusterPartition&) const = default;
};

struct MiningState {
    std::set<int> pos;
    std::set<int> neg;
    std::set<int> uncertain;
    int iteration = 0;

    bool operator==(const MiningState&) const = default;
};

struct DenseLayer {
    int inputs = 0;
    int outputs = 0;
    std::vector<double> weights;  // outputs x inputs, row-major
    std::vector<double> biases;   // outputs

    bool operator==(const DenseLayer&) const = default;
};

/// Fully connected D -> hidden... -> 1 network; ReLU between layers, sigmoid at
/// the output.
struct ClassifierParams {
    std::vector<DenseLayer> layers;
    std::uint64_t seed = 0;

    int input_dim() const { return layers.empty() ? 0 : layers.front().inputs; }
    std::size_t parameter_count() const;
    bool operator==(const ClassifierParams&) const = default;
};

enum class PasteMode { Max, Average };

struct PipelineConfig {
    int k = 8;
    int b = 5;
    double gamma_pct = 60.0;
    double xi_frac = 0.6;
    int max_iterations = 3;
    int classifier_epochs = 20;
    std::vector<int> classifier_hidden = {256, 64};
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    bool retrain_from_scratch = false;
    PasteMode paste_mode = PasteMode::Max;
    int finetune_epochs = 10;
    int max_chunk_frames = 100;
    int kmeans_restarts = 10;  // k-means++ runs; the lowest inertia wins

    /// Throws Error naming the first violated constraint.
    void validate() const;

    bool operator==(const PipelineConfig&) const = default;
};

enum class PatchSource {
    Files,        // one PGM per proposal, listed in the manifest
    MotionCrop,   // stub: crop of the frame's motion map
};

/// File-backed stand-ins for the detector, flow network, backbone and patch
/// refiner.
struct ProviderBundle {
    std::vector<std::string> motion_map_paths;
    std::vector<std::string> feature_paths;
    PatchSource patch_source = PatchSource::MotionCrop;
    std::vector<std::vector<std::string>> patch_map_paths;  // [frame][rank]

    bool operator==(const ProviderBundle&) const = default;
};

std::string to_string(PasteMode mode);
PasteMode paste_mode_from_string(const std::string& name);

// JSON forms. Round trips are exact: doubles are written with shortest
// round-trip precision.
void to_json(nlohmann::json& j, const BoundingBox& box);
void from_json(const nlohmann::json& j, BoundingBox& box);
void to_json(nlohmann::json& j, const ObjectProposal& p);
void from_json(const nlohmann::json& j, ObjectProposal& p);
void to_json(nlohmann::json& j, const FeatureVector& f);
void from_json(const nlohmann::json& j, FeatureVector& f);
void to_json(nlohmann::json& j, const SaliencyMap& m);
void from_json(const nlohmann::json& j, SaliencyMap& m);
void to_json(nlohmann::json& j, const ClusterPartition& p);
void from_json(const nlohmann::json& j, ClusterPartition& p);
void to_json(nlohmann::json& j, const MiningState& s);
void from_json(const nlohmann::json& j, MiningState& s);
void to_json(nlohmann::json& j, const DenseLayer& l);
void from_json(const nlohmann::json& j, DenseLayer& l);
void to_json(nlohmann::json& j, const ClassifierParams& p);
void from_json(const nlohmann::json& j, ClassifierParams& p);
void to_json(nlohmann::json& j, const PipelineConfig& c);
void from_json(const nlohmann::json& j, PipelineConfig& c);
/// Applies the keys present in `j` on top of `c`; unknown keys are rejected.
void apply_config_json(const nlohmann::json& j, PipelineConfig& c);
void to_json(nlohmann::json& j, const ProviderBundle& b);
void from_json(const nlohmann::json& j, ProviderBundle& b);

}  // namespace sopm

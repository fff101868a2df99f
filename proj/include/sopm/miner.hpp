#pragma once

// Salient-proposal mining: per-cluster dual rankings, dynamic cutoffs,
// trustworthy Pos/Neg construction and the iterative easy-to-hard expansion
// driven by the binary classifier.

#include <array>
#include <span>
#include <vector>

#include "sopm/ingest.hpp"
#include "sopm/model.hpp"

namespace sopm {

struct ClusterRanking {
    int cluster_index = 0;
    std::vector<int> si;  // ids ascending by distance to the cluster profile
    std::vector<int> mi;  // ids by motion saliency: descending if salient, else ascending
};

struct ClusterCutoffs {
    int alpha = 0;  // prefix length into si
    int beta = 0;   // prefix length into mi
};

/// Orders one cluster's members two ways. `sims` and `pms` are indexed by
/// id-1; ties keep ascending id order.
ClusterRanking rank_cluster(const ClusterPartition& partition, int cluster_index, std::span<const double> sims,
                            std::span<const double> pms);

/// Lower bound of the cutoff search, ceil(xi_frac * g) clipped to g-1.
int cutoff_lower_bound(int g, double xi_frac);

/// Cut position in a ranked list of g values: the 1-based position j in
/// [xi, g-1] with the largest gap |v(j+1) - v(j)|, smallest j on ties. The
/// "top" set is positions 1..j.
int dynamic_cutoff(std::span<const double> values_in_rank_order, double xi_frac);

/// Cutoffs for a ranking. Clusters with a single member keep it whole.
ClusterCutoffs cluster_cutoffs(const ClusterRanking& ranking, std::span<const double> sims,
                               std::span<const double> pms, double xi_frac);

struct TrainingSets {
    std::set<int> pos;
    std::set<int> neg;
};

/// Pos is the union over salient clusters of TOP(si, alpha) ∩ TOP(mi, beta),
/// Neg the same over the rest. An empty intersection falls back to the
/// cluster's most typical member, si[0].
TrainingSets build_training_sets(const ClusterPartition& partition, std::span<const ClusterRanking> rankings,
                                 std::span<const ClusterCutoffs> cutoffs);

/// Initial state: Pos/Neg from the training sets, everything else uncertain.
MiningState initial_state(const TrainingSets& sets, std::size_t proposal_count);

/// Throws Error unless pos, neg and uncertain partition 1..N.
void validate_state(const MiningState& state, std::size_t proposal_count);

struct IterationAdmissions {
    std::vector<int> pos;  // admitted this iteration, in admission (sim) order
    std::vector<int> neg;
};

/// One expansion step. `scores` holds the classifier output per proposal
/// (id-1). Uncertain members of salient clusters scoring > 0.5 and of the
/// remaining clusters scoring <= 0.5 are candidates; of each candidate list,
/// sorted by distance to their cluster profile, the first ceil(gamma% * size)
/// are admitted.
MiningState mining_iteration(const MiningState& state, std::span<const double> scores,
                             const ClusterPartition& partition, std::span<const double> sims, double gamma_pct,
                             IterationAdmissions* admitted = nullptr);

struct IterationTrace {
    int iteration = 0;  // 0 is the initial Pos/Neg construction
    std::vector<int> admitted_pos;
    std::vector<int> admitted_neg;
    std::size_t pos_size = 0;
    std::size_t neg_size = 0;
    std::size_t uncertain_size = 0;
    std::vector<double> classifier_losses;  // empty for iteration 0
};

struct ChunkSummary {
    int first_frame = 0;
    int frame_count = 0;
    int first_id = 1;
    ClusterPartition partition;
    std::vector<double> ams;
    int nu = 0;
    std::vector<int> salient_clusters;
    std::vector<ClusterCutoffs> cutoffs;
};

struct MiningResult {
    MiningState state;
    std::vector<ChunkSummary> chunks;
    std::vector<IterationTrace> trace;
    std::vector<double> sims;  // distance to own cluster profile, id-1
    std::vector<ClassifierParams> classifiers;  // final classifier per chunk
};

/// Motion saliency of every proposal, loading each frame's motion map.
std::vector<double> compute_sequence_pms(const SequenceManifest& manifest);

/// Full mining over one sequence: k-means, salient-cluster selection,
/// rankings/cutoffs, initial Pos/Neg, then max_iterations rounds of
/// (train classifier, expand). Sequences longer than max_chunk_frames are
/// split into near-equal chunks mined independently.
MiningResult run_mining(const SequenceManifest& manifest, std::span<const FeatureVector> features,
                        std::span<const double> pms, const PipelineConfig& config);

inline constexpr int kMatrixSide = 20;
inline constexpr int kMatrixCells = kMatrixSide * kMatrixSide;
using MiningMatrix = std::array<std::array<double, kMatrixSide>, kMatrixSide>;

/// Nearest-neighbour resample of a length-N vector to 400 cells: cell j takes
/// element floor(j*N/400).
std::vector<double> resample_nearest(std::span<const double> values, int cells = kMatrixCells);

/// Per trace entry, the proposals admitted to Pos laid out in trust order
/// (best first), resampled to 400 cells and reshaped row-major to 20x20.
std::vector<MiningMatrix> emit_mining_matrix(std::span<const IterationTrace> trace, std::span<const int> trust_order);

/// Cellwise mean of same-length matrix sequences (e.g. over several videos).
std::vector<MiningMatrix> average_matrices(std::span<const std::vector<MiningMatrix>> per_sequence);

nlohmann::json trace_to_json(const IterationTrace& t);

}  // namespace sopm

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sopm/model.hpp"

namespace sopm {

inline constexpr int kKMeansMaxIterations = 300;

struct KMeansTrace {
    // Inertia after each assignment step, against the centroids it was
    // assigned to.
    std::vector<double> inertia;
    int iterations = 0;
    bool converged = false;
};

/// Lloyd's algorithm with k-means++ seeding. Converges when no assignment
/// changes; capped at kKMeansMaxIterations. Assignment ties go to the lower
/// cluster index. Empty clusters take the point farthest from its centroid.
/// The returned partition has all salient flags false.
ClusterPartition kmeans(std::span<const FeatureVector> features, int k, std::uint64_t seed,
                        KMeansTrace* trace = nullptr);

/// Best of `restarts` kmeans runs by final inertia (earliest run on ties).
/// Run 0 uses `seed` itself, so restarts=1 equals kmeans(features, k, seed).
ClusterPartition kmeans_restarts(std::span<const FeatureVector> features, int k, std::uint64_t seed, int restarts);

/// Sum of squared distances of each point to its assigned centroid.
double inertia(const ClusterPartition& partition, std::span<const FeatureVector> features);

/// Mean of the member features of one cluster (the cluster's average profile).
FeatureVector cluster_profile(const ClusterPartition& partition, std::span<const FeatureVector> features,
                              int cluster_index);

/// Euclidean distance between a profile and a proposal feature; smaller is
/// more typical of the cluster.
double proposal_similarity(const FeatureVector& profile, const FeatureVector& f);

/// proposal_similarity of every proposal to its own cluster's profile, indexed
/// by id-1.
std::vector<double> similarities_to_profiles(const ClusterPartition& partition,
                                             std::span<const FeatureVector> features);

}  // namespace sopm

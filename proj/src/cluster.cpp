#include "sopm/cluster.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "sopm/error.hpp"
#include "sopm/kernels.hpp"

namespace sopm {
namespace {

void check_dims(std::span<const FeatureVector> features) {
    if (features.empty()) return;
    const std::size_t dim = features.front().dim();
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].dim() != dim) {
            throw Error("kmeans: feature " + std::to_string(i) + " has dimension " + std::to_string(features[i].dim()) +
                        ", expected " + std::to_string(dim));
        }
    }
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<FeatureVector> seed_plus_plus(std::span<const FeatureVector> features, int k, std::mt19937_64& rng) {
    const std::size_t n = features.size();
    std::vector<FeatureVector> centers;
    centers.reserve(static_cast<std::size_t>(k));
    centers.push_back(features[rng() % n]);

    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    while (static_cast<int>(centers.size()) < k) {
        const auto& last = centers.back().values;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], kernels::squared_l2(features[i].values, last));
            total += nearest[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = uniform01(rng) * total;
            double running = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                running += nearest[i];
                if (running > target && nearest[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            // All points coincide with existing centers.
            pick = rng() % n;
        }
        centers.push_back(features[pick]);
    }
    return centers;
}

std::vector<FeatureVector> compute_means(std::span<const FeatureVector> features, const std::vector<int>& assignment,
                                         int k, std::vector<std::size_t>& counts) {
    const std::size_t dim = features.front().dim();
    std::vector<std::vector<double>> sums(static_cast<std::size_t>(k), std::vector<double>(dim, 0.0));
    counts.assign(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto c = static_cast<std::size_t>(assignment[i]);
        kernels::axpy(1.0, std::span<const float>(features[i].values), std::span<double>(sums[c]));
        ++counts[c];
    }
    std::vector<FeatureVector> means(static_cast<std::size_t>(k));
    for (std::size_t c = 0; c < sums.size(); ++c) {
        means[c].values.resize(dim, 0.0f);
        if (counts[c] == 0) continue;
        for (std::size_t d = 0; d < dim; ++d) {
            means[c].values[d] = static_cast<float>(sums[c][d] / static_cast<double>(counts[c]));
        }
    }
    return means;
}

}  // namespace

ClusterPartition kmeans(std::span<const FeatureVector> features, int k, std::uint64_t seed, KMeansTrace* trace) {
    if (k < 1) throw Error("kmeans: k must be >= 1");
    if (static_cast<std::size_t>(k) > features.size()) {
        throw Error("kmeans: fewer points (" + std::to_string(features.size()) + ") than clusters (" +
                    std::to_string(k) + ")");
    }
    check_dims(features);
    const std::size_t n = features.size();

    std::mt19937_64 rng(seed);
    std::vector<FeatureVector> centroids = seed_plus_plus(features, k, rng);
    std::vector<int> assignment(n, -1);
    std::vector<double> dist(n, 0.0);
    KMeansTrace local;

    for (int iter = 0; iter < kKMeansMaxIterations; ++iter) {
        bool changed = false;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = kernels::squared_l2(features[i].values, centroids[static_cast<std::size_t>(c)].values);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assignment[i] != best) {
                assignment[i] = best;
                changed = true;
            }
            dist[i] = best_d;
            total += best_d;
        }
        local.inertia.push_back(total);
        local.iterations = iter + 1;
        if (!changed) {
            local.converged = true;
            break;
        }

        std::vector<std::size_t> counts;
        centroids = compute_means(features, assignment, k, counts);
        // Repair empty clusters with the worst-fit point of a cluster that can
        // spare one.
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] != 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(assignment[i])] > 1 && dist[i] > far_d) {
                    far_d = dist[i];
                    far = i;
                }
            }
            --counts[static_cast<std::size_t>(assignment[far])];
            assignment[far] = c;
            counts[static_cast<std::size_t>(c)] = 1;
            dist[far] = 0.0;
            centroids = compute_means(features, assignment, k, counts);
        }
    }

    ClusterPartition out;
    out.k = k;
    out.assignment = std::move(assignment);
    std::vector<std::size_t> counts;
    out.centroids = compute_means(features, out.assignment, k, counts);
    out.salient_flags.assign(static_cast<std::size_t>(k), false);
    if (trace != nullptr) *trace = std::move(local);
    return out;
}

ClusterPartition kmeans_restarts(std::span<const FeatureVector> features, int k, std::uint64_t seed, int restarts) {
    if (restarts < 1) throw Error("kmeans: restarts must be >= 1");
    ClusterPartition best = kmeans(features, k, seed);
    double best_inertia = inertia(best, features);
    for (int r = 1; r < restarts; ++r) {
        // splitmix64 step so restart seeds do not collide with neighbouring base seeds
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(r);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        z ^= z >> 31;
        auto candidate = kmeans(features, k, z);
        const double value = inertia(candidate, features);
        if (value < best_inertia) {
            best_inertia = value;
            best = std::move(candidate);
        }
    }
    return best;
}

double inertia(const ClusterPartition& partition, std::span<const FeatureVector> features) {
    double total = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        total += kernels::squared_l2(features[i].values,
                                     partition.centroids[static_cast<std::size_t>(partition.assignment[i])].values);
    }
    return total;
}

FeatureVector cluster_profile(const ClusterPartition& partition, std::span<const FeatureVector> features,
                              int cluster_index) {
    if (cluster_index < 0 || cluster_index >= partition.k) {
        throw Error("cluster_profile: unknown cluster " + std::to_string(cluster_index));
    }
    if (features.size() != partition.assignment.size()) throw Error("cluster_profile: feature count mismatch");
    const std::size_t dim = features.empty() ? 0 : features.front().dim();
    std::vector<double> acc(dim, 0.0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (partition.assignment[i] != cluster_index) continue;
        kernels::axpy(1.0, std::span<const float>(features[i].values), std::span<double>(acc));
        ++count;
    }
    if (count == 0) throw Error("cluster_profile: cluster " + std::to_string(cluster_index) + " is empty");
    FeatureVector profile;
    profile.values.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) profile.values[d] = static_cast<float>(acc[d] / static_cast<double>(count));
    return profile;
}

double proposal_similarity(const FeatureVector& profile, const FeatureVector& f) {
    if (profile.dim() != f.dim()) {
        throw Error("proposal_similarity: dimension mismatch (" + std::to_string(profile.dim()) + " vs " +
                    std::to_string(f.dim()) + ")");
    }
    return std::sqrt(kernels::squared_l2(profile.values, f.values));
}

std::vector<double> similarities_to_profiles(const ClusterPartition& partition,
                                             std::span<const FeatureVector> features) {
    std::vector<FeatureVector> profiles;
    profiles.reserve(static_cast<std::size_t>(partition.k));
    for (int c = 0; c < partition.k; ++c) profiles.push_back(cluster_profile(partition, features, c));
    std::vector<double> sims(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        sims[i] = proposal_similarity(profiles[static_cast<std::size_t>(partition.assignment[i])], features[i]);
    }
    return sims;
}

}  // namespace sopm

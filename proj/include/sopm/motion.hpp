#pragma once

#include <span>
#include <vector>

#include "sopm/model.hpp"

namespace sopm {

/// Mean motion saliency inside a proposal box.
double proposal_motion_saliency(const SaliencyMap& ms, const BoundingBox& box);

/// Per-cluster mean of member PMS values. `pms` is indexed by id-1.
std::vector<double> cluster_mean_saliency(const ClusterPartition& partition, std::span<const double> pms);

struct SalientSelection {
    int nu = 0;
    std::vector<int> cluster_ids;  // ascending
};

/// Picks the clusters above the steepest drop of the descending-sorted cluster
/// saliencies. With s sorted descending and d(i) = s(i+1) - s(i), nu is the
/// smallest i in [1, floor(k/2) - 1] minimising d(i). Requires k >= 4.
SalientSelection select_salient_clusters(std::span<const double> ams, int k);

}  // namespace sopm

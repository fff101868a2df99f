#include "sopm/motion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sopm/error.hpp"
#include "sopm/kernels.hpp"

namespace sopm {

double proposal_motion_saliency(const SaliencyMap& ms, const BoundingBox& box) {
    if (!box.fits(ms.width(), ms.height())) throw Error("proposal_motion_saliency: box outside motion map");
    double total = 0.0;
    for (int y = box.y0; y < box.y1; ++y) {
        total += kernels::sum(std::span<const double>(ms.row(y) + box.x0, static_cast<std::size_t>(box.width())));
    }
    return total / static_cast<double>(box.area());
}

std::vector<double> cluster_mean_saliency(const ClusterPartition& partition, std::span<const double> pms) {
    if (pms.size() != partition.assignment.size()) {
        throw Error("cluster_mean_saliency: missing PMS entries (" + std::to_string(pms.size()) + " for " +
                    std::to_string(partition.assignment.size()) + " proposals)");
    }
    std::vector<double> sums(static_cast<std::size_t>(partition.k), 0.0);
    std::vector<std::size_t> counts(static_cast<std::size_t>(partition.k), 0);
    for (std::size_t i = 0; i < pms.size(); ++i) {
        const auto c = static_cast<std::size_t>(partition.assignment[i]);
        sums[c] += pms[i];
        ++counts[c];
    }
    for (std::size_t c = 0; c < sums.size(); ++c) {
        if (counts[c] == 0) throw Error("cluster_mean_saliency: cluster " + std::to_string(c) + " is empty");
        sums[c] /= static_cast<double>(counts[c]);
    }
    return sums;
}

SalientSelection select_salient_clusters(std::span<const double> ams, int k) {
    if (k < 4) throw Error("select_salient_clusters: k must be >= 4 (got " + std::to_string(k) + ")");
    if (static_cast<int>(ams.size()) != k) throw Error("select_salient_clusters: expected " + std::to_string(k) + " values");
    for (double v : ams) {
        if (!std::isfinite(v)) throw Error("select_salient_clusters: non-finite cluster saliency");
    }

    // Descending by value, lower cluster index first on ties.
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return ams[a] > ams[b]; });

    const int upper = k / 2 - 1;
    int nu = 1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= upper; ++i) {
        const double drop = ams[order[i]] - ams[order[i - 1]];
        if (drop < best) {
            best = drop;
            nu = i;
        }
    }

    SalientSelection out;
    out.nu = nu;
    out.cluster_ids.assign(order.begin(), order.begin() + nu);
    std::sort(out.cluster_ids.begin(), out.cluster_ids.end());
    return out;
}

}  // namespace sopm

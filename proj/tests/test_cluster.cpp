#include <doctest.h>

#include <cmath>
#include <random>

#include "sopm/cluster.hpp"
#include "sopm/error.hpp"
#include "sopm/kernels.hpp"

using namespace sopm;

namespace {

std::vector<FeatureVector> blobs(int per_blob, const std::vector<std::vector<float>>& centres, float sigma,
                                 std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> g(0.0f, sigma);
    std::vector<FeatureVector> out;
    for (const auto& c : centres) {
        for (int i = 0; i < per_blob; ++i) {
            FeatureVector f;
            for (float v : c) f.values.push_back(v + g(rng));
            out.push_back(std::move(f));
        }
    }
    return out;
}

double nearest_dist(const FeatureVector& f, const ClusterPartition& p, int* which) {
    double best = INFINITY;
    for (int c = 0; c < p.k; ++c) {
        double d = 0.0;
        for (std::size_t i = 0; i < f.dim(); ++i) {
            const double diff = double(f.values[i]) - p.centroids[static_cast<std::size_t>(c)].values[i];
            d += diff * diff;
        }
        if (d < best) {
            best = d;
            *which = c;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("k equal to the point count gives zero inertia") {
    const auto pts = blobs(1, {{0, 0}, {1, 5}, {4, 4}, {9, 1}, {-3, 2}}, 0.0f, 1);
    const auto p = kmeans(pts, 5, 7);
    CHECK(inertia(p, pts) == 0.0);
    for (int c = 0; c < 5; ++c) CHECK(p.members(c).size() == 1);
}

TEST_CASE("two well separated blobs are recovered exactly") {
    // Points 10 sigma apart; the best 2-partition by brute force over all
    // subsets is the blob split itself, so k-means must reproduce it.
    const auto pts = blobs(6, {{0, 0}, {10, 0}}, 1.0f, 3);
    double best = INFINITY;
    unsigned best_mask = 0;
    const unsigned n = static_cast<unsigned>(pts.size());
    for (unsigned mask = 1; mask < (1u << n) - 1; ++mask) {
        double sum[2][2] = {};
        int cnt[2] = {};
        for (unsigned i = 0; i < n; ++i) {
            const int side = (mask >> i) & 1;
            sum[side][0] += pts[i].values[0];
            sum[side][1] += pts[i].values[1];
            ++cnt[side];
        }
        double total = 0.0;
        for (unsigned i = 0; i < n; ++i) {
            const int side = (mask >> i) & 1;
            const double dx = pts[i].values[0] - sum[side][0] / cnt[side];
            const double dy = pts[i].values[1] - sum[side][1] / cnt[side];
            total += dx * dx + dy * dy;
        }
        if (total < best) {
            best = total;
            best_mask = mask;
        }
    }
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto p = kmeans(pts, 2, seed);
        for (unsigned i = 0; i < n; ++i) {
            const bool same_side_as_0 = ((best_mask >> i) & 1) == (best_mask & 1);
            CHECK((p.assignment[i] == p.assignment[0]) == same_side_as_0);
        }
        CHECK(inertia(p, pts) == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("kmeans is deterministic, converges to nearest-centroid assignments, inertia never rises") {
    const auto pts = blobs(30, {{0, 0, 0}, {3, 3, 0}, {0, 3, 3}, {3, 0, 3}, {1, 1, 1}}, 1.2f, 9);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        KMeansTrace trace;
        const auto a = kmeans(pts, 8, seed, &trace);
        const auto b = kmeans(pts, 8, seed);
        CHECK(a == b);
        CHECK(trace.converged);
        CHECK(trace.iterations <= kKMeansMaxIterations);
        for (std::size_t i = 1; i < trace.inertia.size(); ++i) CHECK(trace.inertia[i] <= trace.inertia[i - 1] + 1e-9);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            int nearest = -1;
            const double d = nearest_dist(pts[i], a, &nearest);
            const auto& own = a.centroids[static_cast<std::size_t>(a.assignment[i])];
            CHECK(kernels::squared_l2(pts[i].values, own.values) == doctest::Approx(d).epsilon(1e-5));
        }
        for (int c = 0; c < 8; ++c) {
            CHECK_FALSE(a.members(c).empty());
            const auto prof = cluster_profile(a, pts, c);
            for (std::size_t d = 0; d < prof.dim(); ++d) {
                CHECK(prof.values[d] == doctest::Approx(a.centroids[static_cast<std::size_t>(c)].values[d]).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("duplicate points still give k non-empty clusters") {
    std::vector<FeatureVector> pts(6, FeatureVector{{1.0f, 1.0f}});
    pts.push_back({{5.0f, 5.0f}});
    const auto p = kmeans(pts, 4, 0);
    for (int c = 0; c < 4; ++c) CHECK_FALSE(p.members(c).empty());
}

TEST_CASE("kmeans errors") {
    const auto pts = blobs(2, {{0, 0}}, 1.0f, 1);
    CHECK_THROWS_AS(kmeans(pts, 3, 0), Error);
    CHECK_THROWS_AS(kmeans(pts, 0, 0), Error);
    auto bad = pts;
    bad[1].values.push_back(1.0f);
    CHECK_THROWS_AS(kmeans(bad, 2, 0), Error);
}

TEST_CASE("restarts keep the lowest-inertia run") {
    const auto pts = blobs(20, {{0, 0}, {8, 0}, {0, 8}, {8, 8}, {4, 4}, {12, 4}}, 0.7f, 21);
    const double single = inertia(kmeans(pts, 6, 5), pts);
    const auto best = kmeans_restarts(pts, 6, 5, 10);
    CHECK(inertia(best, pts) <= single);
    CHECK(kmeans_restarts(pts, 6, 5, 1) == kmeans(pts, 6, 5));
    CHECK(kmeans_restarts(pts, 6, 5, 10) == best);
    CHECK_THROWS_AS(kmeans_restarts(pts, 6, 5, 0), Error);
}

TEST_CASE("cluster profiles") {
    ClusterPartition p;
    p.k = 2;
    p.assignment = {0, 0, 1};
    p.salient_flags = {false, false};
    std::vector<FeatureVector> f{{{0.0f, 0.0f}}, {{2.0f, 2.0f}}, {{7.0f, -1.0f}}};
    CHECK(cluster_profile(p, f, 0).values == std::vector<float>{1.0f, 1.0f});
    CHECK(cluster_profile(p, f, 1).values == f[2].values);
    CHECK_THROWS_AS(cluster_profile(p, f, 2), Error);
    p.assignment = {0, 0, 0};
    CHECK_THROWS_AS(cluster_profile(p, f, 1), Error);

    // 100 random members against a plain summation.
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<float> u(-5.0f, 5.0f);
    std::vector<FeatureVector> many(100, FeatureVector{std::vector<float>(16)});
    for (auto& v : many) {
        for (auto& x : v.values) x = u(rng);
    }
    ClusterPartition all;
    all.k = 1;
    all.assignment.assign(100, 0);
    all.salient_flags = {false};
    const auto prof = cluster_profile(all, many, 0);
    for (std::size_t d = 0; d < 16; ++d) {
        double s = 0.0;
        for (const auto& v : many) s += v.values[d];
        CHECK(prof.values[d] == doctest::Approx(s / 100.0).epsilon(1e-6));
    }
}

TEST_CASE("proposal similarity is the Euclidean distance") {
    CHECK(proposal_similarity({{0.0f, 0.0f}}, {{3.0f, 4.0f}}) == 5.0);
    const FeatureVector a{{0.25f, -1.0f, 2.0f}};
    CHECK(proposal_similarity(a, a) == 0.0);
    CHECK_THROWS_AS(proposal_similarity(a, {{1.0f}}), Error);

    std::mt19937_64 rng(6);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    for (int trial = 0; trial < 20; ++trial) {
        FeatureVector x{std::vector<float>(37)};
        FeatureVector y{std::vector<float>(37)};
        double ss = 0.0;
        for (int i = 0; i < 37; ++i) {
            x.values[i] = u(rng);
            y.values[i] = u(rng);
            ss += (double(x.values[i]) - y.values[i]) * (double(x.values[i]) - y.values[i]);
        }
        CHECK(std::fabs(proposal_similarity(x, y) - std::sqrt(ss)) <= 1e-9);
    }
}

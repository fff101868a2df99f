#pragma once

#include <filesystem>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>
#include <string>

#include <unistd.h>

#include "sopm/model.hpp"

namespace fixtures {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("sopm_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline sopm::SaliencyMap random_map(int w, int h, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    sopm::SaliencyMap m(w, h, 0.0);
    for (auto& v : m.values()) v = u(rng);
    return m;
}

inline sopm::SaliencyMap random_binary(int w, int h, std::mt19937_64& rng, double p = 0.4) {
    std::bernoulli_distribution b(p);
    sopm::SaliencyMap m(w, h, 0.0);
    for (auto& v : m.values()) v = b(rng) ? 1.0 : 0.0;
    return m;
}

inline sopm::BoundingBox random_box(int w, int h, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> dx(0, w - 1);
    std::uniform_int_distribution<int> dy(0, h - 1);
    int a = dx(rng), b = dx(rng), c = dy(rng), d = dy(rng);
    return {std::min(a, b), std::min(c, d), std::max(a, b) + 1, std::max(c, d) + 1};
}

inline sopm::ClusterPartition partition_of(std::vector<int> assignment, std::vector<bool> salient) {
    sopm::ClusterPartition p;
    p.k = static_cast<int>(salient.size());
    p.assignment = std::move(assignment);
    p.salient_flags = std::move(salient);
    return p;
}

struct RandomCase {
    sopm::ClusterPartition partition;
    std::vector<double> sims;
    std::vector<double> pms;
};

// Random cluster assignment with coarse sims/pms (many ties); every cluster
// has at least one member.
inline RandomCase random_case(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> kk(4, 9);
    std::uniform_int_distribution<int> nn(10, 80);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RandomCase rc;
    const int k = kk(rng);
    const int n = std::max(k, nn(rng));
    std::uniform_int_distribution<int> cl(0, k - 1);
    std::vector<int> assignment;
    for (int i = 0; i < n; ++i) assignment.push_back(i < k ? i : cl(rng));
    std::shuffle(assignment.begin(), assignment.end(), rng);
    std::vector<bool> salient(static_cast<std::size_t>(k));
    for (auto&& s : salient) s = u(rng) < 0.4;
    rc.partition = partition_of(assignment, salient);
    for (int i = 0; i < n; ++i) {
        // Coarse grid values force plenty of ties.
        rc.sims.push_back(std::round(u(rng) * 10) / 10);
        rc.pms.push_back(std::round(u(rng) * 10) / 10);
    }
    return rc;
}

}  // namespace fixtures

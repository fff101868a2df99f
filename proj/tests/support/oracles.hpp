#pragma once

// Brute-force reference implementations used only by the tests. They are
// written independently of the library code and favour obviousness over speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <tuple>
#include <vector>

#include "sopm/model.hpp"

namespace oracle {

struct Selection {
    int nu = 0;
    std::vector<int> ids;
};

// Try every admissible count and keep the one that sits on the steepest drop.
inline Selection salient_clusters(const std::vector<double>& ams, int k) {
    std::vector<std::pair<double, int>> sorted;
    for (int c = 0; c < k; ++c) sorted.push_back({-ams[static_cast<std::size_t>(c)], c});
    std::sort(sorted.begin(), sorted.end());
    Selection best;
    double best_drop = std::numeric_limits<double>::infinity();
    for (int nu = 1; nu <= k / 2 - 1; ++nu) {
        const double above = -sorted[static_cast<std::size_t>(nu - 1)].first;
        const double below = -sorted[static_cast<std::size_t>(nu)].first;
        const double drop = below - above;
        if (drop < best_drop) {
            best_drop = drop;
            best.nu = nu;
        }
    }
    for (int i = 0; i < best.nu; ++i) best.ids.push_back(sorted[static_cast<std::size_t>(i)].second);
    std::sort(best.ids.begin(), best.ids.end());
    return best;
}

// Every admissible cut, scored by the jump between the last kept value and
// the first dropped one.
inline int cutoff(const std::vector<double>& v, double xi_frac) {
    const int g = static_cast<int>(v.size());
    int xi = static_cast<int>(std::ceil(xi_frac * g - 1e-9));
    xi = std::max(1, std::min(xi, g - 1));
    int best = -1;
    double best_gap = -1.0;
    for (int cut = xi; cut <= g - 1; ++cut) {
        const double kept_last = v[static_cast<std::size_t>(cut - 1)];
        const double dropped_first = v[static_cast<std::size_t>(cut)];
        const double gap = std::fabs(dropped_first - kept_last);
        if (gap > best_gap) {
            best_gap = gap;
            best = cut;
        }
    }
    return best;
}

inline std::vector<int> members(const std::vector<int>& assignment, int c) {
    std::vector<int> ids;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] == c) ids.push_back(static_cast<int>(i) + 1);
    }
    return ids;
}

inline std::vector<int> order_by(const std::vector<int>& ids, const std::vector<double>& key, bool descending) {
    std::vector<std::tuple<double, int>> rows;
    for (int id : ids) {
        const double v = key[static_cast<std::size_t>(id - 1)];
        rows.emplace_back(descending ? -v : v, id);
    }
    std::sort(rows.begin(), rows.end());
    std::vector<int> out;
    for (const auto& [v, id] : rows) out.push_back(id);
    return out;
}

inline std::set<int> top_intersection(const std::vector<int>& si, int alpha, const std::vector<int>& mi, int beta) {
    std::vector<int> a(si.begin(), si.begin() + alpha);
    std::vector<int> b(mi.begin(), mi.begin() + beta);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<int> both;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
    if (both.empty()) both.push_back(si.front());
    return {both.begin(), both.end()};
}

// Dense layers evaluated with explicit index arithmetic.
inline double forward(const sopm::ClassifierParams& p, const std::vector<float>& f) {
    std::vector<double> x(f.begin(), f.end());
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto& layer = p.layers[l];
        std::vector<double> y(static_cast<std::size_t>(layer.outputs));
        for (int o = 0; o < layer.outputs; ++o) {
            long double acc = layer.biases[static_cast<std::size_t>(o)];
            for (int i = 0; i < layer.inputs; ++i) {
                acc += static_cast<long double>(layer.weights[static_cast<std::size_t>(o * layer.inputs + i)]) *
                       x[static_cast<std::size_t>(i)];
            }
            const double a = static_cast<double>(acc);
            y[static_cast<std::size_t>(o)] = l + 1 < p.layers.size() ? std::max(0.0, a) : 1.0 / (1.0 + std::exp(-a));
        }
        x = std::move(y);
    }
    return x.at(0);
}

inline double bce(const std::vector<double>& p, const std::vector<int>& y) {
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double q = std::min(std::max(p[i], 1e-7), 1.0 - 1e-7);
        total += y[i] == 1 ? -std::log(q) : -std::log(1.0 - q);
    }
    return total / static_cast<double>(p.size());
}

// Min-max normalisation followed by per-pixel combination over covering
// patches.
inline sopm::SaliencyMap paste(int w, int h, const std::vector<std::pair<sopm::SaliencyMap, sopm::BoundingBox>>& patches,
                               bool use_max) {
    std::vector<sopm::SaliencyMap> normed;
    for (const auto& [p, box] : patches) {
        double lo = 1e300;
        double hi = -1e300;
        for (double v : p.values()) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        sopm::SaliencyMap z(p.width(), p.height(), 0.0);
        if (hi > lo) {
            for (int y = 0; y < p.height(); ++y) {
                for (int x = 0; x < p.width(); ++x) z.at(x, y) = (p.at(x, y) - lo) / (hi - lo);
            }
        }
        normed.push_back(z);
    }
    sopm::SaliencyMap out(w, h, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::vector<double> covering;
            for (std::size_t i = 0; i < patches.size(); ++i) {
                const auto& b = patches[i].second;
                if (x >= b.x0 && x < b.x1 && y >= b.y0 && y < b.y1) covering.push_back(normed[i].at(x - b.x0, y - b.y0));
            }
            if (covering.empty()) continue;
            if (use_max) {
                out.at(x, y) = *std::max_element(covering.begin(), covering.end());
            } else {
                out.at(x, y) = std::accumulate(covering.begin(), covering.end(), 0.0) / static_cast<double>(covering.size());
            }
        }
    }
    return out;
}

struct PR {
    double precision;
    double recall;
};

inline PR pr_at(const sopm::SaliencyMap& s, const sopm::SaliencyMap& gt, int t) {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    for (int y = 0; y < s.height(); ++y) {
        for (int x = 0; x < s.width(); ++x) {
            const bool pred = s.at(x, y) > t / 255.0;
            const bool truth = gt.at(x, y) == 1.0;
            tp += pred && truth;
            fp += pred && !truth;
            fn += !pred && truth;
        }
    }
    return {tp + fp == 0 ? 1.0 : double(tp) / (tp + fp), tp + fn == 0 ? 0.0 : double(tp) / (tp + fn)};
}

inline double max_f(const sopm::SaliencyMap& s, const sopm::SaliencyMap& gt) {
    double best = 0.0;
    for (int t = 0; t < 256; ++t) {
        const auto [p, r] = pr_at(s, gt, t);
        const double f = (0.3 * p + r) == 0.0 ? 0.0 : 1.3 * p * r / (0.3 * p + r);
        best = std::max(best, f);
    }
    return best;
}

// Structure measure, transcribed from the reference definition: object-aware
// term over foreground/background plus a four-quadrant region term.
namespace smeasure {

constexpr double eps = std::numeric_limits<double>::epsilon();

inline double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline double object(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double x = mean(v);
    return 2.0 * x / (x * x + 1.0 + sample_std(v) + eps);
}

inline double ssim(const std::vector<double>& s, const std::vector<double>& g) {
    const double n = static_cast<double>(s.size());
    const double x = mean(s);
    const double y = mean(g);
    double sx = 0.0;
    double sy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        sx += (s[i] - x) * (s[i] - x);
        sy += (g[i] - y) * (g[i] - y);
        sxy += (s[i] - x) * (g[i] - y);
    }
    sx /= n - 1 + eps;
    sy /= n - 1 + eps;
    sxy /= n - 1 + eps;
    const double a = 4 * x * y * sxy;
    const double b = (x * x + y * y) * (sx + sy);
    if (a != 0) return a / (b + eps);
    return b == 0 ? 1.0 : 0.0;
}

inline double value(const sopm::SaliencyMap& s, const sopm::SaliencyMap& gt, double alpha = 0.5) {
    const int W = gt.width();
    const int H = gt.height();
    std::vector<double> fg;
    std::vector<double> bg;
    double ones = 0.0;
    double ssum = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            ssum += s.at(x, y);
            if (gt.at(x, y) == 1.0) {
                fg.push_back(s.at(x, y));
                ones += 1;
                cx += x + 1;
                cy += y + 1;
            } else {
                bg.push_back(1.0 - s.at(x, y));
            }
        }
    }
    const double area = static_cast<double>(W) * H;
    if (ones == 0) return 1.0 - ssum / area;
    if (ones == area) return ssum / area;

    const double u = ones / area;
    const double so = u * object(fg) + (1 - u) * object(bg);

    const int X = static_cast<int>(std::round(cx / ones));
    const int Y = static_cast<int>(std::round(cy / ones));
    const int xs[3] = {0, X, W};
    const int ys[3] = {0, Y, H};
    double sr = 0.0;
    for (int qy = 0; qy < 2; ++qy) {
        for (int qx = 0; qx < 2; ++qx) {
            std::vector<double> ps;
            std::vector<double> pg;
            for (int y = ys[qy]; y < ys[qy + 1]; ++y) {
                for (int x = xs[qx]; x < xs[qx + 1]; ++x) {
                    ps.push_back(s.at(x, y));
                    pg.push_back(gt.at(x, y));
                }
            }
            if (ps.empty()) continue;
            sr += static_cast<double>(ps.size()) / area * ssim(ps, pg);
        }
    }
    return std::max(0.0, alpha * so + (1 - alpha) * sr);
}

}  // namespace smeasure

}  // namespace oracle

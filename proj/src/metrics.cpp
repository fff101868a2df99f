#include "sopm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "sopm/error.hpp"
#include "sopm/ingest.hpp"
#include "sopm/kernels.hpp"

namespace sopm {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_same_size(const SaliencyMap& a, const SaliencyMap& b, const char* who) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw Error(std::string(who) + ": dimension mismatch (" + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()) +
                    ")");
    }
}

std::vector<std::uint8_t> mask_of(const SaliencyMap& gt) {
    std::vector<std::uint8_t> mask(gt.size());
    for (std::size_t i = 0; i < gt.size(); ++i) mask[i] = gt.values()[i] > 0.5 ? 1 : 0;
    return mask;
}

// Foreground (or background) similarity: 2x / (x^2 + 1 + sigma) over the
// selected pixels, sigma the sample standard deviation.
double object_score(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sigma = values.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    return 2.0 * mean / (mean * mean + 1.0 + sigma + kEps);
}

double object_term(const SaliencyMap& s, const SaliencyMap& gt) {
    std::vector<double> fg;
    std::vector<double> bg;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (gt.values()[i] > 0.5) {
            fg.push_back(s.values()[i]);
        } else {
            bg.push_back(1.0 - s.values()[i]);
        }
    }
    const double u = static_cast<double>(fg.size()) / static_cast<double>(s.size());
    return u * object_score(fg) + (1.0 - u) * object_score(bg);
}

// Structural similarity of one quadrant [x0,x1) x [y0,y1).
double quadrant_ssim(const SaliencyMap& s, const SaliencyMap& gt, int x0, int x1, int y0, int y1) {
    const double n = static_cast<double>(x1 - x0) * static_cast<double>(y1 - y0);
    double mx = 0.0;
    double my = 0.0;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            mx += s.at(x, y);
            my += gt.at(x, y);
        }
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            const double dx = s.at(x, y) - mx;
            const double dy = gt.at(x, y) - my;
            sxx += dx * dx;
            syy += dy * dy;
            sxy += dx * dy;
        }
    }
    const double denom = n - 1.0 + kEps;
    sxx /= denom;
    syy /= denom;
    sxy /= denom;
    const double a = 4.0 * mx * my * sxy;
    const double b = (mx * mx + my * my) * (sxx + syy);
    if (a != 0.0) return a / (b + kEps);
    if (b == 0.0) return 1.0;
    return 0.0;
}

double region_term(const SaliencyMap& s, const SaliencyMap& gt) {
    const int w = gt.width();
    const int h = gt.height();
    // Foreground centroid in 1-based pixel coordinates, rounded half away
    // from zero; it is the width/height of the top-left quadrant.
    double total = 0.0;
    double sx = 0.0;
    double sy = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double v = gt.at(x, y);
            total += v;
            sx += v * (x + 1);
            sy += v * (y + 1);
        }
    }
    int cx = 0;
    int cy = 0;
    if (total == 0.0) {
        cx = static_cast<int>(std::lround(w / 2.0));
        cy = static_cast<int>(std::lround(h / 2.0));
    } else {
        cx = static_cast<int>(std::lround(sx / total));
        cy = static_cast<int>(std::lround(sy / total));
    }
    const double area = static_cast<double>(w) * static_cast<double>(h);
    const double w1 = static_cast<double>(cx) * cy / area;
    const double w2 = static_cast<double>(w - cx) * cy / area;
    const double w3 = static_cast<double>(cx) * (h - cy) / area;
    const double w4 = 1.0 - w1 - w2 - w3;

    auto part = [&](double weight, int x0, int x1, int y0, int y1) {
        if (x1 <= x0 || y1 <= y0) return 0.0;
        return weight * quadrant_ssim(s, gt, x0, x1, y0, y1);
    };
    return part(w1, 0, cx, 0, cy) + part(w2, cx, w, 0, cy) + part(w3, 0, cx, cy, h) + part(w4, cx, w, cy, h);
}

}  // namespace

void require_binary(const SaliencyMap& gt, const char* who) {
    for (double v : gt.values()) {
        if (v != 0.0 && v != 1.0) throw Error(std::string(who) + ": ground truth must be binary (0 or 1)");
    }
}

SaliencyMap binarize(const SaliencyMap& map, double threshold) {
    SaliencyMap out = map;
    for (auto& v : out.values()) v = v >= threshold ? 1.0 : 0.0;
    return out;
}

double mae(const SaliencyMap& s, const SaliencyMap& gt) {
    require_same_size(s, gt, "mae");
    return kernels::abs_diff_sum(s.values(), gt.values()) / static_cast<double>(s.size());
}

std::array<PrecisionRecall, kThresholdCount> precision_recall(const SaliencyMap& s, const SaliencyMap& gt_binary) {
    require_same_size(s, gt_binary, "precision_recall");
    require_binary(gt_binary, "precision_recall");
    const auto mask = mask_of(gt_binary);
    std::uint64_t positives = 0;
    for (auto m : mask) positives += m;

    std::array<PrecisionRecall, kThresholdCount> out{};
    for (int t = 0; t < kThresholdCount; ++t) {
        const auto counts = kernels::threshold_counts(s.values(), mask, t / 255.0);
        auto& pr = out[static_cast<std::size_t>(t)];
        pr.precision = counts.predicted == 0 ? 1.0 : static_cast<double>(counts.hits) / static_cast<double>(counts.predicted);
        pr.recall = positives == 0 ? 0.0 : static_cast<double>(counts.hits) / static_cast<double>(positives);
    }
    return out;
}

double f_measure(const PrecisionRecall& pr) {
    const double denom = kFBetaSquared * pr.precision + pr.recall;
    if (denom == 0.0) return 0.0;
    return (1.0 + kFBetaSquared) * pr.precision * pr.recall / denom;
}

double max_f_measure(const SaliencyMap& s, const SaliencyMap& gt_binary) {
    const auto curve = precision_recall(s, gt_binary);
    double best = 0.0;
    for (const auto& pr : curve) best = std::max(best, f_measure(pr));
    return best;
}

double s_measure(const SaliencyMap& s, const SaliencyMap& gt_binary, double alpha) {
    require_same_size(s, gt_binary, "s_measure");
    require_binary(gt_binary, "s_measure");
    const double n = static_cast<double>(s.size());
    const double fg = kernels::sum(gt_binary.values()) / n;
    const double mean_s = kernels::sum(s.values()) / n;
    if (fg == 0.0) return 1.0 - mean_s;
    if (fg == 1.0) return mean_s;
    const double q = alpha * object_term(s, gt_binary) + (1.0 - alpha) * region_term(s, gt_binary);
    return std::max(q, 0.0);
}

nlohmann::json EvaluationReport::to_json() const {
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& f : per_frame) {
        frames.push_back({{"name", f.name}, {"max_f", f.max_f}, {"s_measure", f.s_measure}, {"mae", f.mae}});
    }
    return {{"per_frame", frames},
            {"means", {{"max_f", mean.max_f}, {"s_measure", mean.s_measure}, {"mae", mean.mae}}},
            {"frame_count", per_frame.size()}};
}

EvaluationReport evaluate_directories(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir) {
    namespace fs = std::filesystem;
    auto list = [](const fs::path& dir) {
        if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
        std::map<std::string, fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
                files.emplace(entry.path().filename().string(), entry.path());
            }
        }
        return files;
    };
    const auto preds = list(pred_dir);
    const auto gts = list(gt_dir);
    for (const auto& [name, path] : preds) {
        if (!gts.contains(name)) throw Error("unmatched prediction " + name + " (no ground truth with that name)");
    }
    for (const auto& [name, path] : gts) {
        if (!preds.contains(name)) throw Error("unmatched ground truth " + name + " (no prediction with that name)");
    }
    if (preds.empty()) throw Error("no .pgm files in " + pred_dir.string());

    EvaluationReport report;
    for (const auto& [name, path] : preds) {
        const auto s = load_saliency_map(path);
        const auto gt = binarize(load_saliency_map(gts.at(name)), 0.5);
        FrameScores f;
        f.name = name;
        f.max_f = max_f_measure(s, gt);
        f.s_measure = s_measure(s, gt);
        f.mae = mae(s, gt);
        report.mean.max_f += f.max_f;
        report.mean.s_measure += f.s_measure;
        report.mean.mae += f.mae;
        report.per_frame.push_back(std::move(f));
    }
    const double count = static_cast<double>(report.per_frame.size());
    report.mean.name = "mean";
    report.mean.max_f /= count;
    report.mean.s_measure /= count;
    report.mean.mae /= count;
    return report;
}

}  // namespace sopm

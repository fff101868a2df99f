#include "sopm/refine.hpp"

#include <algorithm>
#include <cstdio>

#include "sopm/error.hpp"
#include "sopm/kernels.hpp"
#include "sopm/metrics.hpp"

namespace sopm {

namespace fs = std::filesystem;

SaliencyMap normalize_minmax(const SaliencyMap& patch) {
    const auto [lo, hi] = std::minmax_element(patch.values().begin(), patch.values().end());
    SaliencyMap out(patch.width(), patch.height(), 0.0);
    const double min = *lo;
    const double range = *hi - *lo;
    if (range <= 0.0) return out;
    auto& dst = out.values();
    const auto& src = patch.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::clamp((src[i] - min) / range, 0.0, 1.0);
    return out;
}

SaliencyMap paste_frame_saliency(int frame_width, int frame_height, std::span<const PlacedPatch> patches,
                                 PasteMode mode) {
    SaliencyMap canvas(frame_width, frame_height, 0.0);
    std::vector<double> cover;
    if (mode == PasteMode::Average) cover.assign(canvas.size(), 0.0);

    for (std::size_t i = 0; i < patches.size(); ++i) {
        const auto& [patch, box] = patches[i];
        if (!box.fits(frame_width, frame_height)) {
            throw Error("paste: patch " + std::to_string(i) + " box outside the frame");
        }
        if (patch.width() != box.width() || patch.height() != box.height()) {
            throw Error("paste: patch " + std::to_string(i) + " is " + std::to_string(patch.width()) + "x" +
                        std::to_string(patch.height()) + " but its box is " + std::to_string(box.width()) + "x" +
                        std::to_string(box.height()));
        }
        const auto z = normalize_minmax(patch);
        const auto w = static_cast<std::size_t>(box.width());
        for (int y = 0; y < box.height(); ++y) {
            double* dst = canvas.row(box.y0 + y) + box.x0;
            std::span<const double> src(z.row(y), w);
            if (mode == PasteMode::Max) {
                kernels::max_inplace(std::span<double>(dst, w), src);
            } else {
                kernels::axpy(1.0, src, std::span<double>(dst, w));
                double* c = cover.data() + static_cast<std::size_t>(box.y0 + y) * frame_width + box.x0;
                for (std::size_t x = 0; x < w; ++x) c[x] += 1.0;
            }
        }
    }
    if (mode == PasteMode::Average) {
        auto& v = canvas.values();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (cover[i] > 0.0) v[i] = std::clamp(v[i] / cover[i], 0.0, 1.0);
        }
    }
    return canvas;
}

double spatiotemporal_consistency(const SaliencyMap& fs, const SaliencyMap& ms) {
    if (fs.width() != ms.width() || fs.height() != ms.height()) {
        throw Error("spatiotemporal_consistency: FS and MS sizes differ");
    }
    return s_measure(fs, binarize(ms, 0.5));
}

std::vector<int> select_keyframes(std::span<const double> consistencies, int b) {
    if (b < 1) throw Error("select_keyframes: b must be >= 1");
    if (consistencies.empty()) throw Error("select_keyframes: no frames");
    std::vector<int> keys;
    const auto n = static_cast<int>(consistencies.size());
    for (int start = 0; start < n; start += b) {
        const int end = std::min(n, start + b);
        int best = start;
        for (int t = start + 1; t < end; ++t) {
            if (consistencies[static_cast<std::size_t>(t)] > consistencies[static_cast<std::size_t>(best)]) best = t;
        }
        keys.push_back(best);
    }
    return keys;
}

fs::path export_finetune_set(const std::string& sequence, std::span<const int> keyframes,
                             std::span<const SaliencyMap> fs_maps, const fs::path& out_dir, int epochs) {
    std::error_code ec;
    fs::create_directories(out_dir / "pseudo_gt", ec);
    if (ec || !fs::is_directory(out_dir)) throw Error("cannot create fine-tune directory " + out_dir.string());

    nlohmann::json entries = nlohmann::json::array();
    for (int frame : keyframes) {
        if (frame < 0 || static_cast<std::size_t>(frame) >= fs_maps.size()) {
            throw Error("export_finetune_set: no FS map for keyframe " + std::to_string(frame));
        }
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04d.pgm", frame);
        const std::string rel = std::string("pseudo_gt/") + name;
        save_saliency_map(fs_maps[static_cast<std::size_t>(frame)], out_dir / rel);
        entries.push_back({{"frame_index", frame},
                           {"image_ref", sequence + ":" + std::to_string(frame)},
                           {"pseudo_gt_path", rel},
                           {"epochs", epochs}});
    }
    const auto path = out_dir / "manifest.json";
    write_json(path, {{"sequence", sequence}, {"epochs", epochs}, {"entries", entries}});
    return path;
}

FinetuneSet load_finetune_set(const fs::path& manifest_path) {
    const auto doc = read_json(manifest_path);
    FinetuneSet set;
    try {
        set.sequence = doc.at("sequence").get<std::string>();
        set.epochs = doc.at("epochs").get<int>();
        for (const auto& e : doc.at("entries")) {
            FinetuneEntry entry;
            entry.frame_index = e.at("frame_index").get<int>();
            entry.image_ref = e.at("image_ref").get<std::string>();
            entry.pseudo_gt_path = e.at("pseudo_gt_path").get<std::string>();
            if (!fs::exists(manifest_path.parent_path() / entry.pseudo_gt_path)) {
                throw Error("fine-tune set: missing " + entry.pseudo_gt_path);
            }
            set.entries.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(manifest_path.string() + ": malformed fine-tune manifest: " + e.what());
    }
    return set;
}

SaliencyMap load_patch(const SequenceManifest& manifest, int frame_index, int rank, const SaliencyMap& motion_map) {
    const auto& frame = manifest.frames.at(static_cast<std::size_t>(frame_index));
    const auto& box = frame.proposals.at(static_cast<std::size_t>(rank)).box;
    if (frame.patch_map_paths.empty()) return crop(motion_map, box);
    auto patch = load_saliency_map(manifest.resolve(frame.patch_map_paths[static_cast<std::size_t>(rank)]));
    if (patch.width() != box.width() || patch.height() != box.height()) {
        throw Error("frame " + std::to_string(frame_index) + " proposal " + std::to_string(rank) +
                    ": patch map size does not match its box");
    }
    return patch;
}

}  // namespace sopm

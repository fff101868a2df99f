#include "sopm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>

#include "sopm/error.hpp"

namespace sopm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Position of a point bouncing inside [lo, hi].
double reflect(double p, double lo, double hi) {
    const double span = hi - lo;
    if (span <= 0.0) return lo;
    double u = std::fmod(p - lo, 2.0 * span);
    if (u < 0.0) u += 2.0 * span;
    if (u > span) u = 2.0 * span - u;
    return lo + u;
}

std::array<double, 2> centre_at(const BlobSpec& b, int t, int width, int height) {
    return {reflect(b.start[0] + b.velocity[0] * t, b.radius, width - b.radius),
            reflect(b.start[1] + b.velocity[1] * t, b.radius, height - b.radius)};
}

bool covers(const std::array<double, 2>& c, double r, int x, int y) {
    const double dx = x + 0.5 - c[0];
    const double dy = y + 0.5 - c[1];
    return dx * dx + dy * dy <= r * r;
}

BoundingBox tight_box(const std::array<double, 2>& c, double r, int width, int height) {
    BoundingBox b;
    b.x0 = std::clamp(static_cast<int>(std::floor(c[0] - r)), 0, width - 1);
    b.y0 = std::clamp(static_cast<int>(std::floor(c[1] - r)), 0, height - 1);
    b.x1 = std::clamp(static_cast<int>(std::ceil(c[0] + r)), b.x0 + 1, width);
    b.y1 = std::clamp(static_cast<int>(std::ceil(c[1] + r)), b.y0 + 1, height);
    return b;
}

BoundingBox jitter(BoundingBox b, int amount, int width, int height, std::mt19937_64& rng) {
    if (amount <= 0) return b;
    std::uniform_int_distribution<int> d(-amount, amount);
    b.x0 = std::clamp(b.x0 + d(rng), 0, width - 1);
    b.y0 = std::clamp(b.y0 + d(rng), 0, height - 1);
    b.x1 = std::clamp(b.x1 + d(rng), b.x0 + 1, width);
    b.y1 = std::clamp(b.y1 + d(rng), b.y0 + 1, height);
    return b;
}

std::string frame_name(const char* dir, int t, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s/frame_%04d%s", dir, t, ext);
    return buf;
}

void blob_to_json(json& j, const BlobSpec& b) {
    j = json{{"radius", b.radius}, {"start", b.start}, {"velocity", b.velocity}};
}

BlobSpec blob_from_json(const json& j, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (key != "radius" && key != "start" && key != "velocity") throw Error(where + ": unknown field '" + key + "'");
    }
    BlobSpec b;
    b.radius = j.value("radius", b.radius);
    if (j.contains("start")) b.start = j.at("start").get<std::array<double, 2>>();
    if (j.contains("velocity")) b.velocity = j.at("velocity").get<std::array<double, 2>>();
    return b;
}

}  // namespace

void SceneSpec::validate() const {
    auto fail = [](const std::string& what) { throw Error("infeasible scene: " + what); };
    if (width < 4 || height < 4) fail("frame must be at least 4x4");
    if (frames < 2 || frames > 100) fail("frame count must be in [2, 100]");
    if (salient.empty() || salient.size() > 3) fail("need 1 to 3 salient blobs");
    if (distractors.size() > 10) fail("at most 10 distractors");
    if (salient.size() + distractors.size() > static_cast<std::size_t>(kMaxProposalsPerFrame)) {
        fail("more objects than the per-frame proposal cap");
    }
    if (feature_dim < 1) fail("feature_dim must be >= 1");
    if (motion_noise < 0 || feature_noise < 0 || patch_noise < 0 || box_jitter < 0) fail("noise levels must be >= 0");
    auto check_blob = [&](const BlobSpec& b, const std::string& which) {
        if (!(b.radius > 0.0)) fail(which + " radius must be positive");
        if (2.0 * b.radius > std::min(width, height)) fail(which + " blob larger than the frame");
    };
    for (std::size_t i = 0; i < salient.size(); ++i) check_blob(salient[i], "salient " + std::to_string(i));
    for (std::size_t i = 0; i < distractors.size(); ++i) check_blob(distractors[i], "distractor " + std::to_string(i));
}

void to_json(json& j, const SceneSpec& s) {
    json sal = json::array();
    for (const auto& b : s.salient) {
        json jb;
        blob_to_json(jb, b);
        sal.push_back(jb);
    }
    json dis = json::array();
    for (const auto& b : s.distractors) {
        json jb;
        blob_to_json(jb, b);
        dis.push_back(jb);
    }
    j = json{{"name", s.name},
             {"width", s.width},
             {"height", s.height},
             {"frames", s.frames},
             {"feature_dim", s.feature_dim},
             {"salient", sal},
             {"distractors", dis},
             {"motion_noise", s.motion_noise},
             {"feature_noise", s.feature_noise},
             {"prototype_margin", s.prototype_margin},
             {"box_jitter", s.box_jitter},
             {"patch_noise", s.patch_noise}};
}

void from_json(const json& j, SceneSpec& s) {
    static const std::set<std::string> known{"name",         "width",         "height",        "frames",
                                             "feature_dim",  "salient",       "distractors",   "motion_noise",
                                             "feature_noise", "prototype_margin", "box_jitter", "patch_noise"};
    if (!j.is_object()) throw Error("scene spec must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw Error("scene spec: unknown field '" + key + "'");
    }
    s = SceneSpec{};
    try {
        s.name = j.value("name", s.name);
        s.width = j.value("width", s.width);
        s.height = j.value("height", s.height);
        s.frames = j.value("frames", s.frames);
        s.feature_dim = j.value("feature_dim", s.feature_dim);
        s.motion_noise = j.value("motion_noise", s.motion_noise);
        s.feature_noise = j.value("feature_noise", s.feature_noise);
        s.prototype_margin = j.value("prototype_margin", s.prototype_margin);
        s.box_jitter = j.value("box_jitter", s.box_jitter);
        s.patch_noise = j.value("patch_noise", s.patch_noise);
        if (j.contains("salient")) {
            for (std::size_t i = 0; i < j.at("salient").size(); ++i) {
                s.salient.push_back(blob_from_json(j.at("salient")[i], "salient " + std::to_string(i)));
            }
        }
        if (j.contains("distractors")) {
            for (std::size_t i = 0; i < j.at("distractors").size(); ++i) {
                s.distractors.push_back(blob_from_json(j.at("distractors")[i], "distractor " + std::to_string(i)));
            }
        }
    } catch (const json::exception& e) {
        throw Error(std::string("scene spec: ") + e.what());
    }
}

SceneSpec load_scene(const fs::path& path) { return read_json(path).get<SceneSpec>(); }

SceneSpec random_scene(int salient, int distractors, int frames, std::uint64_t seed) {
    SceneSpec s;
    s.frames = frames;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double pi = std::acos(-1.0);

    auto place = [&](double r, const std::vector<BlobSpec>& avoid) {
        std::array<double, 2> best{};
        for (int attempt = 0; attempt < 200; ++attempt) {
            best = {r + unit(rng) * (s.width - 2 * r), r + unit(rng) * (s.height - 2 * r)};
            bool clear = true;
            for (const auto& o : avoid) {
                const double dx = o.start[0] - best[0];
                const double dy = o.start[1] - best[1];
                if (std::sqrt(dx * dx + dy * dy) < o.radius + r + 2.0) clear = false;
            }
            if (clear) break;
        }
        return best;
    };

    std::vector<BlobSpec> placed;
    for (int i = 0; i < salient; ++i) {
        BlobSpec b;
        b.radius = 6.0 + 3.0 * unit(rng);
        b.start = place(b.radius, placed);
        const double angle = 2.0 * pi * unit(rng);
        const double speed = 1.5 + unit(rng);
        b.velocity = {speed * std::cos(angle), speed * std::sin(angle)};
        placed.push_back(b);
        s.salient.push_back(b);
    }
    for (int i = 0; i < distractors; ++i) {
        BlobSpec b;
        b.radius = 5.0 + 3.0 * unit(rng);
        b.start = place(b.radius, placed);
        placed.push_back(b);
        s.distractors.push_back(b);
    }
    return s;
}

SyntheticSequence generate_sequence(const SceneSpec& spec, std::uint64_t seed, const fs::path& out_dir) {
    spec.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<BlobSpec> objects = spec.salient;
    objects.insert(objects.end(), spec.distractors.begin(), spec.distractors.end());
    const std::size_t object_count = objects.size();
    const int W = spec.width;
    const int H = spec.height;
    const auto D = static_cast<std::size_t>(spec.feature_dim);

    SyntheticSequence out;
    for (std::size_t o = 0; o < object_count; ++o) out.object_is_salient.push_back(o < spec.salient.size());

    // Prototypes: axis 0 carries the salient/distractor offset, the rest is
    // object identity.
    std::vector<std::vector<double>> prototypes(object_count, std::vector<double>(D, 0.0));
    for (std::size_t o = 0; o < object_count; ++o) {
        prototypes[o][0] = (out.object_is_salient[o] ? 0.5 : -0.5) * spec.prototype_margin;
        for (std::size_t d = 1; d < D; ++d) prototypes[o][d] = gauss(rng);
    }

    // Trajectories and speeds.
    std::vector<std::vector<std::array<double, 2>>> centres(object_count);
    for (std::size_t o = 0; o < object_count; ++o) {
        for (int t = 0; t < spec.frames; ++t) centres[o].push_back(centre_at(objects[o], t, W, H));
    }
    std::vector<std::vector<double>> speed(object_count, std::vector<double>(static_cast<std::size_t>(spec.frames)));
    double max_speed = 0.0;
    for (std::size_t o = 0; o < object_count; ++o) {
        for (int t = 0; t < spec.frames; ++t) {
            const int a = t + 1 < spec.frames ? t : t - 1;
            const auto& p = centres[o][static_cast<std::size_t>(a)];
            const auto& q = centres[o][static_cast<std::size_t>(a + 1)];
            const double v = std::hypot(q[0] - p[0], q[1] - p[1]);
            speed[o][static_cast<std::size_t>(t)] = v;
            max_speed = std::max(max_speed, v);
        }
    }

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error("cannot create " + out_dir.string());

    SequenceManifest m;
    m.name = spec.name;
    m.frame_count = spec.frames;
    m.frame_width = W;
    m.frame_height = H;
    m.base_dir = out_dir;

    int next_id = 1;
    for (int t = 0; t < spec.frames; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        SaliencyMap gt(W, H, 0.0);
        SaliencyMap motion(W, H, 0.0);
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) {
                double mv = 0.0;
                for (std::size_t o = 0; o < object_count; ++o) {
                    if (!covers(centres[o][ti], objects[o].radius, x, y)) continue;
                    if (out.object_is_salient[o]) gt.at(x, y) = 1.0;
                    if (max_speed > 0.0) mv = std::max(mv, speed[o][ti] / max_speed);
                }
                if (spec.motion_noise > 0.0) mv += spec.motion_noise * gauss(rng);
                motion.at(x, y) = std::clamp(mv, 0.0, 1.0);
            }
        }

        FrameEntry frame;
        frame.feature_path = frame_name("features", t, ".limf");
        frame.motion_map_path = frame_name("motion", t, ".pgm");
        frame.gt_map_path = frame_name("gt", t, ".pgm");

        std::vector<std::size_t> order(object_count);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<double> objectness(object_count);
        for (auto& v : objectness) v = 0.3 + 0.7 * unit(rng);
        std::sort(objectness.begin(), objectness.end(), std::greater<>());

        std::vector<FeatureVector> features;
        for (std::size_t r = 0; r < object_count; ++r) {
            const std::size_t o = order[r];
            ObjectProposal p;
            p.id = next_id++;
            p.frame_index = t;
            p.box = jitter(tight_box(centres[o][ti], objects[o].radius, W, H), spec.box_jitter, W, H, rng);
            p.objectness = objectness[r];
            frame.proposals.push_back(p);
            out.proposal_object.push_back(static_cast<int>(o));

            FeatureVector f;
            f.values.resize(D);
            for (std::size_t d = 0; d < D; ++d) {
                double noise = spec.feature_noise * gauss(rng);
                if (d == 0) noise = std::clamp(noise, -3.0 * spec.feature_noise, 3.0 * spec.feature_noise);
                f.values[d] = static_cast<float>(prototypes[o][d] + noise);
            }
            features.push_back(std::move(f));

            auto patch = crop(gt, p.box);
            for (auto& v : patch.values()) v = std::clamp(v + spec.patch_noise * gauss(rng), 0.0, 1.0);
            char name[64];
            std::snprintf(name, sizeof name, "patches/frame_%04d_r%zu.pgm", t, r);
            frame.patch_map_paths.emplace_back(name);
            save_saliency_map(patch, out_dir / name);
        }

        save_saliency_map(gt, out_dir / *frame.gt_map_path);
        save_saliency_map(motion, out_dir / frame.motion_map_path);
        save_features(features, out_dir / frame.feature_path);
        m.frames.push_back(std::move(frame));
    }

    save_manifest(m, out_dir / "manifest.json");
    json scene = spec;
    write_json(out_dir / "scene.json", {{"scene", scene}, {"seed", seed}});
    write_json(out_dir / "objects.json",
               {{"proposal_object", out.proposal_object}, {"object_is_salient", out.object_is_salient}});

    out.manifest = load_manifest(out_dir / "manifest.json");
    out.gt_masks = load_gt_masks(out.manifest);
    return out;
}

std::vector<SaliencyMap> load_gt_masks(const SequenceManifest& manifest) {
    std::vector<SaliencyMap> masks;
    for (std::size_t t = 0; t < manifest.frames.size(); ++t) {
        const auto& path = manifest.frames[t].gt_map_path;
        if (!path) throw Error("frame " + std::to_string(t) + ": missing GT map");
        masks.push_back(load_saliency_map(manifest.resolve(*path)));
    }
    return masks;
}

std::vector<double> gt_occupancy(const SequenceManifest& manifest, const std::vector<SaliencyMap>& gt_masks) {
    if (gt_masks.size() != manifest.frames.size()) throw Error("missing GT: need one mask per frame");
    std::vector<double> occ;
    occ.reserve(manifest.proposal_count());
    for (std::size_t t = 0; t < manifest.frames.size(); ++t) {
        const auto& gt = gt_masks[t];
        for (const auto& p : manifest.frames[t].proposals) {
            if (!p.box.fits(gt.width(), gt.height())) throw Error("GT mask smaller than proposal box");
            long nonzero = 0;
            for (int y = p.box.y0; y < p.box.y1; ++y) {
                for (int x = p.box.x0; x < p.box.x1; ++x) nonzero += gt.at(x, y) > 0.0 ? 1 : 0;
            }
            occ.push_back(static_cast<double>(nonzero) / static_cast<double>(p.box.area()));
        }
    }
    return occ;
}

std::vector<int> oracle_trust_order(const SequenceManifest& manifest, const std::vector<SaliencyMap>& gt_masks) {
    const auto occ = gt_occupancy(manifest, gt_masks);
    std::vector<int> ids(occ.size());
    std::iota(ids.begin(), ids.end(), 1);
    std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) { return occ[a - 1] > occ[b - 1]; });
    return ids;
}

std::vector<bool> oracle_label(const SequenceManifest& manifest, const std::vector<SaliencyMap>& gt_masks,
                               double threshold) {
    const auto occ = gt_occupancy(manifest, gt_masks);
    std::vector<bool> labels(occ.size());
    for (std::size_t i = 0; i < occ.size(); ++i) labels[i] = occ[i] >= threshold;
    return labels;
}

}  // namespace sopm

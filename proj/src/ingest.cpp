#include "sopm/ingest.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "sopm/error.hpp"

namespace sopm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw Error(where + ": expected a JSON object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) throw Error(where + ": unknown field '" + key + "'");
    }
}

template <typename T>
T require(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw Error(where + ": missing field '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(where + ": field '" + key + "' has the wrong type");
    }
}

std::uint32_t read_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void append_u32_le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

}  // namespace

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& doc) { write_file(path, doc.dump(2) + "\n"); }

json read_json(const fs::path& path) {
    const auto text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(path.string() + ": malformed JSON: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Manifest

std::size_t SequenceManifest::proposal_count() const {
    std::size_t n = 0;
    for (const auto& f : frames) n += f.proposals.size();
    return n;
}

std::vector<ObjectProposal> SequenceManifest::proposals() const {
    std::vector<ObjectProposal> all;
    all.reserve(proposal_count());
    for (const auto& f : frames) all.insert(all.end(), f.proposals.begin(), f.proposals.end());
    return all;
}

bool SequenceManifest::has_ground_truth() const {
    return !frames.empty() &&
           std::all_of(frames.begin(), frames.end(), [](const FrameEntry& f) { return f.gt_map_path.has_value(); });
}

bool SequenceManifest::has_patch_maps() const {
    return !frames.empty() && std::all_of(frames.begin(), frames.end(), [](const FrameEntry& f) {
        return f.patch_map_paths.size() == f.proposals.size();
    });
}

fs::path SequenceManifest::resolve(const std::string& path) const {
    fs::path p(path);
    return p.is_absolute() ? p : base_dir / p;
}

ProviderBundle SequenceManifest::providers() const {
    ProviderBundle bundle;
    bundle.patch_source = has_patch_maps() ? PatchSource::Files : PatchSource::MotionCrop;
    for (const auto& f : frames) {
        bundle.motion_map_paths.push_back(resolve(f.motion_map_path).string());
        bundle.feature_paths.push_back(resolve(f.feature_path).string());
        std::vector<std::string> patches;
        if (bundle.patch_source == PatchSource::Files) {
            for (const auto& p : f.patch_map_paths) patches.push_back(resolve(p).string());
        }
        bundle.patch_map_paths.push_back(std::move(patches));
    }
    return bundle;
}

SequenceManifest parse_manifest(const json& doc, const fs::path& base_dir, bool check_files) {
    reject_unknown_keys(doc, {"name", "frame_count", "frame_width", "frame_height", "frames"}, "manifest");
    SequenceManifest m;
    m.base_dir = base_dir;
    m.name = require<std::string>(doc, "name", "manifest");
    m.frame_count = require<int>(doc, "frame_count", "manifest");
    m.frame_width = require<int>(doc, "frame_width", "manifest");
    m.frame_height = require<int>(doc, "frame_height", "manifest");
    if (m.frame_width <= 0 || m.frame_height <= 0) throw Error("manifest: frame dimensions must be positive");
    if (m.frame_count < 2) throw Error("manifest: frame_count must be >= 2");
    if (!doc.contains("frames") || !doc.at("frames").is_array()) {
        throw Error("manifest: missing field 'frames'");
    }
    const auto& frames = doc.at("frames");
    if (static_cast<int>(frames.size()) != m.frame_count) {
        throw Error("manifest: frame_count " + std::to_string(m.frame_count) + " but " +
                    std::to_string(frames.size()) + " frames listed");
    }

    auto check_exists = [&](const std::string& path, const std::string& where) {
        if (check_files && !fs::exists(m.resolve(path))) throw Error(where + ": missing file " + path);
    };

    int next_id = 1;
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const std::string where = "frame " + std::to_string(t);
        const auto& fj = frames[t];
        reject_unknown_keys(fj, {"proposals", "feature_path", "motion_map_path", "gt_map_path", "patch_map_paths"},
                            where);
        FrameEntry frame;
        frame.feature_path = require<std::string>(fj, "feature_path", where);
        frame.motion_map_path = require<std::string>(fj, "motion_map_path", where);
        check_exists(frame.feature_path, where);
        check_exists(frame.motion_map_path, where);
        if (fj.contains("gt_map_path")) {
            frame.gt_map_path = require<std::string>(fj, "gt_map_path", where);
            check_exists(*frame.gt_map_path, where);
        }
        if (!fj.contains("proposals") || !fj.at("proposals").is_array()) {
            throw Error(where + ": missing field 'proposals'");
        }
        const auto& props = fj.at("proposals");
        if (props.size() > static_cast<std::size_t>(kMaxProposalsPerFrame)) {
            throw Error(where + ": proposal cap exceeded (" + std::to_string(props.size()) + " > " +
                        std::to_string(kMaxProposalsPerFrame) + ")");
        }
        for (std::size_t r = 0; r < props.size(); ++r) {
            const std::string pwhere = where + " proposal " + std::to_string(r);
            reject_unknown_keys(props[r], {"box", "objectness"}, pwhere);
            ObjectProposal p;
            p.id = next_id++;
            p.frame_index = static_cast<int>(t);
            try {
                p.box = require<BoundingBox>(props[r], "box", pwhere);
            } catch (const Error& e) {
                throw Error(pwhere + ": " + e.what());
            }
            p.objectness = require<double>(props[r], "objectness", pwhere);
            if (!p.box.fits(m.frame_width, m.frame_height)) {
                throw Error(pwhere + ": box out of frame bounds");
            }
            if (!(p.objectness >= 0.0 && p.objectness <= 1.0)) {
                throw Error(pwhere + ": objectness outside [0,1]");
            }
            frame.proposals.push_back(p);
        }
        if (fj.contains("patch_map_paths")) {
            frame.patch_map_paths = require<std::vector<std::string>>(fj, "patch_map_paths", where);
            if (frame.patch_map_paths.size() != frame.proposals.size()) {
                throw Error(where + ": patch_map_paths must list one path per proposal");
            }
            for (const auto& p : frame.patch_map_paths) check_exists(p, where);
        }
        m.frames.push_back(std::move(frame));
    }
    return m;
}

SequenceManifest load_manifest(const fs::path& path) {
    if (!fs::exists(path)) throw Error("manifest not found: " + path.string());
    return parse_manifest(read_json(path), path.parent_path());
}

json manifest_to_json(const SequenceManifest& m) {
    json frames = json::array();
    for (const auto& f : m.frames) {
        json props = json::array();
        for (const auto& p : f.proposals) props.push_back(json{{"box", p.box}, {"objectness", p.objectness}});
        json fj{{"proposals", props}, {"feature_path", f.feature_path}, {"motion_map_path", f.motion_map_path}};
        if (f.gt_map_path) fj["gt_map_path"] = *f.gt_map_path;
        if (!f.patch_map_paths.empty()) fj["patch_map_paths"] = f.patch_map_paths;
        frames.push_back(std::move(fj));
    }
    return json{{"name", m.name},
                {"frame_count", m.frame_count},
                {"frame_width", m.frame_width},
                {"frame_height", m.frame_height},
                {"frames", frames}};
}

void save_manifest(const SequenceManifest& m, const fs::path& path) { write_json(path, manifest_to_json(m)); }

SequenceManifest slice_manifest(const SequenceManifest& m, int first, int count) {
    if (first < 0 || count < 1 || first + count > m.frame_count) throw Error("slice_manifest: bad frame range");
    SequenceManifest out = m;
    out.frame_count = count;
    out.frames.assign(m.frames.begin() + first, m.frames.begin() + first + count);
    int next_id = 1;
    for (int t = 0; t < count; ++t) {
        for (auto& p : out.frames[static_cast<std::size_t>(t)].proposals) {
            p.id = next_id++;
            p.frame_index = t;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// PGM

SaliencyMap decode_pgm(const std::string& bytes, const std::string& origin) {
    std::size_t pos = 0;
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw Error(origin + ": bad PGM magic (expected P5)");
    pos = 2;

    auto next_token = [&]() -> long {
        while (pos < bytes.size()) {
            const char c = bytes[pos];
            if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else {
                break;
            }
        }
        if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
            throw Error(origin + ": malformed PGM header");
        }
        long v = 0;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
            v = v * 10 + (bytes[pos] - '0');
            if (v > 1'000'000) throw Error(origin + ": PGM header value too large");
            ++pos;
        }
        return v;
    };

    const long width = next_token();
    const long height = next_token();
    const long maxval = next_token();
    if (width <= 0 || height <= 0) throw Error(origin + ": PGM dimensions must be positive");
    if (maxval != 255) throw Error(origin + ": unsupported PGM maxval " + std::to_string(maxval) + " (expected 255)");
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        throw Error(origin + ": truncated PGM payload");
    }
    ++pos;  // single whitespace before raster

    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (bytes.size() - pos < count) {
        throw Error(origin + ": truncated PGM payload (" + std::to_string(bytes.size() - pos) + " of " +
                    std::to_string(count) + " bytes)");
    }
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        values[i] = static_cast<unsigned char>(bytes[pos + i]) / 255.0;
    }
    return SaliencyMap(static_cast<int>(width), static_cast<int>(height), std::move(values));
}

SaliencyMap load_saliency_map(const fs::path& path) { return decode_pgm(read_file(path), path.string()); }

std::string encode_pgm(const SaliencyMap& map) {
    map.validate();
    std::string out = "P5\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n255\n";
    const std::size_t header = out.size();
    out.resize(header + map.size());
    const auto& v = map.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[header + i] = static_cast<char>(static_cast<unsigned char>(std::lround(v[i] * 255.0)));
    }
    return out;
}

void save_saliency_map(const SaliencyMap& map, const fs::path& path) { write_file(path, encode_pgm(map)); }

// ---------------------------------------------------------------------------
// LIMF features

std::vector<FeatureVector> decode_features(const std::string& bytes, const std::string& origin) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "LIMF", 4) != 0) {
        throw Error(origin + ": bad feature file magic (expected LIMF)");
    }
    const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint32_t count = read_u32_le(raw + 4);
    const std::uint32_t dim = read_u32_le(raw + 8);
    const std::uint64_t expected = 12 + 4ull * count * dim;
    if (bytes.size() != expected) {
        throw Error(origin + ": feature file length mismatch (" + std::to_string(bytes.size()) + " bytes, expected " +
                    std::to_string(expected) + ")");
    }
    std::vector<FeatureVector> out(count);
    const unsigned char* p = raw + 12;
    for (std::uint32_t i = 0; i < count; ++i) {
        out[i].values.resize(dim);
        for (std::uint32_t d = 0; d < dim; ++d, p += 4) {
            const float f = std::bit_cast<float>(read_u32_le(p));
            if (!std::isfinite(f)) {
                throw Error(origin + ": non-finite feature value in vector " + std::to_string(i));
            }
            out[i].values[d] = f;
        }
    }
    return out;
}

std::vector<FeatureVector> load_features(const fs::path& path) { return decode_features(read_file(path), path.string()); }

std::string encode_features(const std::vector<FeatureVector>& features) {
    const std::size_t dim = features.empty() ? 0 : features.front().dim();
    std::string out = "LIMF";
    append_u32_le(out, static_cast<std::uint32_t>(features.size()));
    append_u32_le(out, static_cast<std::uint32_t>(dim));
    out.reserve(12 + 4 * dim * features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].dim() != dim) throw Error("encode_features: vector " + std::to_string(i) + " has a different dimension");
        for (float f : features[i].values) {
            if (!std::isfinite(f)) throw Error("encode_features: non-finite value in vector " + std::to_string(i));
            append_u32_le(out, std::bit_cast<std::uint32_t>(f));
        }
    }
    return out;
}

void save_features(const std::vector<FeatureVector>& features, const fs::path& path) {
    write_file(path, encode_features(features));
}

std::vector<FeatureVector> load_sequence_features(const SequenceManifest& m) {
    std::vector<FeatureVector> all;
    all.reserve(m.proposal_count());
    std::size_t dim = 0;
    for (std::size_t t = 0; t < m.frames.size(); ++t) {
        const auto& frame = m.frames[t];
        auto feats = load_features(m.resolve(frame.feature_path));
        if (feats.size() != frame.proposals.size()) {
            throw Error("frame " + std::to_string(t) + ": feature file holds " + std::to_string(feats.size()) +
                        " vectors for " + std::to_string(frame.proposals.size()) + " proposals");
        }
        for (auto& f : feats) {
            if (all.empty()) dim = f.dim();
            if (f.dim() != dim || dim == 0) {
                throw Error("frame " + std::to_string(t) + ": feature dimension " + std::to_string(f.dim()) +
                            " differs from " + std::to_string(dim));
            }
            all.push_back(std::move(f));
        }
    }
    return all;
}

// ---------------------------------------------------------------------------

SaliencyMap crop(const SaliencyMap& map, const BoundingBox& box) {
    if (!box.fits(map.width(), map.height())) {
        throw Error("crop: box [" + std::to_string(box.x0) + "," + std::to_string(box.y0) + "," +
                    std::to_string(box.x1) + "," + std::to_string(box.y1) + ") outside " +
                    std::to_string(map.width()) + "x" + std::to_string(map.height()) + " map");
    }
    SaliencyMap out(box.width(), box.height());
    for (int y = 0; y < box.height(); ++y) {
        const double* src = map.row(box.y0 + y) + box.x0;
        std::copy(src, src + box.width(), out.row(y));
    }
    return out;
}

}  // namespace sopm

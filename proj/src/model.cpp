#include "sopm/model.hpp"

#include <cmath>
#include <string>

#include "sopm/error.hpp"

namespace sopm {

using nlohmann::json;

SaliencyMap::SaliencyMap(int width, int height, double fill)
    : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
        throw Error("saliency map dimensions must be positive, got " + std::to_string(width) +
                    "x" + std::to_string(height));
    }
    values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

SaliencyMap::SaliencyMap(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
    if (width <= 0 || height <= 0) {
        throw Error("saliency map dimensions must be positive, got " + std::to_string(width) +
                    "x" + std::to_string(height));
    }
    if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw Error("saliency map value count " + std::to_string(values_.size()) +
                    " does not match " + std::to_string(width) + "x" + std::to_string(height));
    }
}

void SaliencyMap::validate() const {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double v = values_[i];
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw Error("saliency value out of [0,1] at pixel " + std::to_string(i));
        }
    }
}

std::vector<int> ClusterPartition::members(int c) const {
    std::vector<int> ids;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] == c) ids.push_back(static_cast<int>(i) + 1);
    }
    return ids;
}

std::size_t ClassifierParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.weights.size() + layer.biases.size();
    return n;
}

void PipelineConfig::validate() const {
    auto fail = [](const std::string& what) { throw Error("invalid config: " + what); };
    if (k < 4) fail("k must be >= 4 (got " + std::to_string(k) + ")");
    if (b < 1) fail("b must be >= 1 (got " + std::to_string(b) + ")");
    if (!(gamma_pct > 0.0 && gamma_pct <= 100.0)) fail("gamma_pct must be in (0,100]");
    if (!(xi_frac > 0.0 && xi_frac < 1.0)) fail("xi_frac must be in (0,1)");
    if (max_iterations < 1) fail("max_iterations must be >= 1");
    if (classifier_epochs < 1) fail("classifier_epochs must be >= 1");
    for (int h : classifier_hidden) {
        if (h < 1) fail("classifier_hidden entries must be >= 1");
    }
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be > 0");
    if (finetune_epochs < 1) fail("finetune_epochs must be >= 1");
    if (max_chunk_frames < 2) fail("max_chunk_frames must be >= 2");
    if (kmeans_restarts < 1) fail("kmeans_restarts must be >= 1");
}

std::string to_string(PasteMode mode) {
    return mode == PasteMode::Max ? "max" : "ave";
}

PasteMode paste_mode_from_string(const std::string& name) {
    if (name == "max") return PasteMode::Max;
    if (name == "ave") return PasteMode::Average;
    throw Error("unknown paste mode '" + name + "' (expected max or ave)");
}

void to_json(json& j, const BoundingBox& box) { j = json::array({box.x0, box.y0, box.x1, box.y1}); }

void from_json(const json& j, BoundingBox& box) {
    if (!j.is_array() || j.size() != 4) throw Error("box must be an array [x0,y0,x1,y1]");
    box = {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

void to_json(json& j, const ObjectProposal& p) {
    j = json{{"id", p.id}, {"frame_index", p.frame_index}, {"box", p.box}, {"objectness", p.objectness}};
}

void from_json(const json& j, ObjectProposal& p) {
    p.id = j.at("id").get<int>();
    p.frame_index = j.at("frame_index").get<int>();
    p.box = j.at("box").get<BoundingBox>();
    p.objectness = j.at("objectness").get<double>();
}

void to_json(json& j, const FeatureVector& f) { j = f.values; }
void from_json(const json& j, FeatureVector& f) { f.values = j.get<std::vector<float>>(); }

void to_json(json& j, const SaliencyMap& m) {
    j = json{{"width", m.width()}, {"height", m.height()}, {"values", m.values()}};
}

void from_json(const json& j, SaliencyMap& m) {
    m = SaliencyMap(j.at("width").get<int>(), j.at("height").get<int>(),
                    j.at("values").get<std::vector<double>>());
}

void to_json(json& j, const ClusterPartition& p) {
    j = json{{"k", p.k},
             {"assignment", p.assignment},
             {"centroids", p.centroids},
             {"salient_flags", p.salient_flags}};
}

void from_json(const json& j, ClusterPartition& p) {
    p.k = j.at("k").get<int>();
    p.assignment = j.at("assignment").get<std::vector<int>>();
    p.centroids = j.at("centroids").get<std::vector<FeatureVector>>();
    p.salient_flags = j.at("salient_flags").get<std::vector<bool>>();
}

void to_json(json& j, const MiningState& s) {
    j = json{{"pos", s.pos}, {"neg", s.neg}, {"uncertain", s.uncertain}, {"iteration", s.iteration}};
}

void from_json(const json& j, MiningState& s) {
    s.pos = j.at("pos").get<std::set<int>>();
    s.neg = j.at("neg").get<std::set<int>>();
    s.uncertain = j.at("uncertain").get<std::set<int>>();
    s.iteration = j.at("iteration").get<int>();
}

void to_json(json& j, const DenseLayer& l) {
    j = json{{"inputs", l.inputs}, {"outputs", l.outputs}, {"weights", l.weights}, {"biases", l.biases}};
}

void from_json(const json& j, DenseLayer& l) {
    l.inputs = j.at("inputs").get<int>();
    l.outputs = j.at("outputs").get<int>();
    l.weights = j.at("weights").get<std::vector<double>>();
    l.biases = j.at("biases").get<std::vector<double>>();
}

void to_json(json& j, const ClassifierParams& p) {
    j = json{{"layers", p.layers}, {"seed", p.seed}};
}

void from_json(const json& j, ClassifierParams& p) {
    p.layers = j.at("layers").get<std::vector<DenseLayer>>();
    p.seed = j.at("seed").get<std::uint64_t>();
}

void to_json(json& j, const PipelineConfig& c) {
    j = json{{"k", c.k},
             {"b", c.b},
             {"gamma_pct", c.gamma_pct},
             {"xi_frac", c.xi_frac},
             {"max_iterations", c.max_iterations},
             {"classifier_epochs", c.classifier_epochs},
             {"classifier_hidden", c.classifier_hidden},
             {"learning_rate", c.learning_rate},
             {"seed", c.seed},
             {"retrain_from_scratch", c.retrain_from_scratch},
             {"paste_mode", to_string(c.paste_mode)},
             {"finetune_epochs", c.finetune_epochs},
             {"max_chunk_frames", c.max_chunk_frames},
             {"kmeans_restarts", c.kmeans_restarts}};
}

void apply_config_json(const json& j, PipelineConfig& c) {
    if (!j.is_object()) throw Error("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "k") c.k = value.get<int>();
            else if (key == "b") c.b = value.get<int>();
            else if (key == "gamma_pct") c.gamma_pct = value.get<double>();
            else if (key == "xi_frac") c.xi_frac = value.get<double>();
            else if (key == "max_iterations") c.max_iterations = value.get<int>();
            else if (key == "classifier_epochs") c.classifier_epochs = value.get<int>();
            else if (key == "classifier_hidden") c.classifier_hidden = value.get<std::vector<int>>();
            else if (key == "learning_rate") c.learning_rate = value.get<double>();
            else if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "retrain_from_scratch") c.retrain_from_scratch = value.get<bool>();
            else if (key == "paste_mode") c.paste_mode = paste_mode_from_string(value.get<std::string>());
            else if (key == "finetune_epochs") c.finetune_epochs = value.get<int>();
            else if (key == "max_chunk_frames") c.max_chunk_frames = value.get<int>();
            else if (key == "kmeans_restarts") c.kmeans_restarts = value.get<int>();
            else throw Error("unknown config key '" + key + "'");
        } catch (const json::exception& e) {
            throw Error("config key '" + key + "': " + e.what());
        }
    }
}

void from_json(const json& j, PipelineConfig& c) {
    c = PipelineConfig{};
    apply_config_json(j, c);
}

void to_json(json& j, const ProviderBundle& b) {
    j = json{{"motion_map_paths", b.motion_map_paths},
             {"feature_paths", b.feature_paths},
             {"patch_source", b.patch_source == PatchSource::Files ? "files" : "motion_crop"},
             {"patch_map_paths", b.patch_map_paths}};
}

void from_json(const json& j, ProviderBundle& b) {
    b.motion_map_paths = j.at("motion_map_paths").get<std::vector<std::string>>();
    b.feature_paths = j.at("feature_paths").get<std::vector<std::string>>();
    const auto source = j.at("patch_source").get<std::string>();
    if (source == "files") b.patch_source = PatchSource::Files;
    else if (source == "motion_crop") b.patch_source = PatchSource::MotionCrop;
    else throw Error("unknown patch_source '" + source + "'");
    b.patch_map_paths = j.at("patch_map_paths").get<std::vector<std::vector<std::string>>>();
}

}  // namespace sopm

#include "sopm/classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "sopm/error.hpp"
#include "sopm/ingest.hpp"
#include "sopm/kernels.hpp"

namespace sopm {
namespace {

constexpr double kFiniteDifferenceStep = 1e-4;

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double open_unit(double p) {
    return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

double clamp_probability(double p) { return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp); }

bool clamp_active(double p) { return p < kProbabilityClamp || p > 1.0 - kProbabilityClamp; }

double sample_loss(double p, int label) {
    const double q = clamp_probability(p);
    return label != 0 ? -std::log(q) : -std::log(1.0 - q);
}

// Pre-activations and activations of every layer for one sample.
struct Activations {
    std::vector<std::vector<double>> z;  // per layer
    std::vector<std::vector<double>> a;  // per hidden layer (post-ReLU)
    double probability = 0.5;
};

void check_input(const ClassifierParams& params, std::span<const float> features) {
    if (params.layers.empty()) throw Error("classifier has no layers");
    if (static_cast<int>(features.size()) != params.input_dim()) {
        throw Error("classifier input dimension mismatch (" + std::to_string(features.size()) + " vs " +
                    std::to_string(params.input_dim()) + ")");
    }
}

void run_forward(const ClassifierParams& params, std::span<const float> features, Activations& act) {
    const std::size_t depth = params.layers.size();
    act.z.resize(depth);
    act.a.resize(depth - 1);
    for (std::size_t l = 0; l < depth; ++l) {
        const auto& layer = params.layers[l];
        auto& z = act.z[l];
        z.resize(static_cast<std::size_t>(layer.outputs));
        const auto in = static_cast<std::size_t>(layer.inputs);
        for (int o = 0; o < layer.outputs; ++o) {
            std::span<const double> w(layer.weights.data() + static_cast<std::size_t>(o) * in, in);
            const double dotp = l == 0 ? kernels::dot(w, features) : kernels::dot(w, std::span<const double>(act.a[l - 1]));
            z[static_cast<std::size_t>(o)] = dotp + layer.biases[static_cast<std::size_t>(o)];
        }
        if (l + 1 < depth) {
            auto& a = act.a[l];
            a.resize(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
        }
    }
    act.probability = sigmoid(act.z.back()[0]);
}

// Accumulates scale * dLoss/dParams into `grads` (laid out like the params).
void run_backward(const ClassifierParams& params, std::span<const float> features, const Activations& act, int label,
                  double scale, std::vector<DenseLayer>& grads) {
    if (clamp_active(act.probability)) return;
    std::vector<double> delta{(act.probability - static_cast<double>(label)) * scale};
    for (std::size_t l = params.layers.size(); l-- > 0;) {
        const auto& layer = params.layers[l];
        auto& g = grads[l];
        const auto in = static_cast<std::size_t>(layer.inputs);
        std::vector<double> prev_delta(l > 0 ? in : 0, 0.0);
        for (int o = 0; o < layer.outputs; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            if (d == 0.0) continue;
            std::span<double> gw(g.weights.data() + static_cast<std::size_t>(o) * in, in);
            if (l == 0) {
                kernels::axpy(d, features, gw);
            } else {
                kernels::axpy(d, std::span<const double>(act.a[l - 1]), gw);
                kernels::axpy(d, std::span<const double>(layer.weights.data() + static_cast<std::size_t>(o) * in, in),
                              std::span<double>(prev_delta));
            }
            g.biases[static_cast<std::size_t>(o)] += d;
        }
        if (l > 0) {
            const auto& z = act.z[l - 1];
            for (std::size_t i = 0; i < prev_delta.size(); ++i) {
                if (!(z[i] > 0.0)) prev_delta[i] = 0.0;
            }
            delta = std::move(prev_delta);
        }
    }
}

std::vector<DenseLayer> zero_like(const ClassifierParams& params) {
    std::vector<DenseLayer> grads;
    grads.reserve(params.layers.size());
    for (const auto& layer : params.layers) {
        DenseLayer g;
        g.inputs = layer.inputs;
        g.outputs = layer.outputs;
        g.weights.assign(layer.weights.size(), 0.0);
        g.biases.assign(layer.biases.size(), 0.0);
        grads.push_back(std::move(g));
    }
    return grads;
}

// Activation signature used to detect ReLU kinks and clamp crossings.
std::vector<bool> pattern(const Activations& act) {
    std::vector<bool> bits;
    for (std::size_t l = 0; l + 1 < act.z.size(); ++l) {
        for (double z : act.z[l]) bits.push_back(z > 0.0);
    }
    bits.push_back(clamp_active(act.probability));
    return bits;
}

void append_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void append_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

}  // namespace

ClassifierParams init_classifier(int input_dim, std::span<const int> hidden_dims, std::uint64_t seed) {
    if (input_dim < 1) throw Error("init_classifier: input dimension must be >= 1");
    std::vector<int> dims{input_dim};
    for (int h : hidden_dims) {
        if (h < 1) throw Error("init_classifier: hidden layer width must be >= 1");
        dims.push_back(h);
    }
    dims.push_back(1);

    std::mt19937_64 rng(seed);
    ClassifierParams params;
    params.seed = seed;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        DenseLayer layer;
        layer.inputs = dims[l];
        layer.outputs = dims[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.inputs + layer.outputs));
        std::uniform_real_distribution<double> dist(-limit, limit);
        layer.weights.resize(static_cast<std::size_t>(layer.inputs) * static_cast<std::size_t>(layer.outputs));
        for (auto& w : layer.weights) w = dist(rng);
        layer.biases.assign(static_cast<std::size_t>(layer.outputs), 0.0);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

double forward(const ClassifierParams& params, std::span<const float> features) {
    check_input(params, features);
    Activations act;
    run_forward(params, features, act);
    return open_unit(act.probability);
}

double bce_loss(std::span<const double> preds, std::span<const int> labels) {
    if (preds.size() != labels.size()) {
        throw Error("bce_loss: length mismatch (" + std::to_string(preds.size()) + " vs " +
                    std::to_string(labels.size()) + ")");
    }
    if (preds.empty()) throw Error("bce_loss: empty batch");
    double total = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) total += sample_loss(preds[i], labels[i]);
    return total / static_cast<double>(preds.size());
}

std::vector<double> loss_gradient(const ClassifierParams& params, std::span<const float> features, int label) {
    check_input(params, features);
    Activations act;
    run_forward(params, features, act);
    auto grads = zero_like(params);
    run_backward(params, features, act, label, 1.0, grads);
    ClassifierParams g;
    g.layers = std::move(grads);
    return flatten(g);
}

TrainingResult train(ClassifierParams params, std::span<const FeatureVector> pos_features,
                     std::span<const FeatureVector> neg_features, int epochs, double learning_rate) {
    if (pos_features.empty() || neg_features.empty()) {
        throw Error("train: both classes need at least one sample (pos " + std::to_string(pos_features.size()) +
                    ", neg " + std::to_string(neg_features.size()) + ")");
    }
    if (epochs < 0) throw Error("train: epochs must be >= 0");

    struct Sample {
        const FeatureVector* f;
        int label;
    };
    std::vector<Sample> samples;
    samples.reserve(pos_features.size() + neg_features.size());
    for (const auto& f : pos_features) samples.push_back({&f, 1});
    for (const auto& f : neg_features) samples.push_back({&f, 0});
    for (const auto& s : samples) check_input(params, s.f->values);

    const double scale = 1.0 / static_cast<double>(samples.size());
    TrainingResult result;
    Activations act;
    for (int epoch = 0; epoch <= epochs; ++epoch) {
        auto grads = zero_like(params);
        double loss = 0.0;
        for (const auto& s : samples) {
            run_forward(params, s.f->values, act);
            loss += sample_loss(act.probability, s.label);
            if (epoch < epochs) run_backward(params, s.f->values, act, s.label, scale, grads);
        }
        loss *= scale;
        if (epoch > 0) result.epoch_losses.push_back(loss);
        if (epoch == epochs) break;
        for (std::size_t l = 0; l < params.layers.size(); ++l) {
            kernels::axpy(-learning_rate, std::span<const double>(grads[l].weights),
                          std::span<double>(params.layers[l].weights));
            kernels::axpy(-learning_rate, std::span<const double>(grads[l].biases),
                          std::span<double>(params.layers[l].biases));
        }
    }
    result.params = std::move(params);
    return result;
}

double gradient_check(const ClassifierParams& params, std::span<const float> features, int label) {
    const auto analytic = loss_gradient(params, features, label);
    Activations base_act;
    run_forward(params, features, base_act);
    const auto base_pattern = pattern(base_act);

    auto flat = flatten(params);
    ClassifierParams probe = params;
    Activations act;
    double worst = 0.0;
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const double saved = flat[i];
        flat[i] = saved + kFiniteDifferenceStep;
        unflatten(flat, probe);
        run_forward(probe, features, act);
        const double up = sample_loss(act.probability, label);
        const bool up_same = pattern(act) == base_pattern;
        flat[i] = saved - kFiniteDifferenceStep;
        unflatten(flat, probe);
        run_forward(probe, features, act);
        const double down = sample_loss(act.probability, label);
        const bool down_same = pattern(act) == base_pattern;
        flat[i] = saved;
        if (!up_same || !down_same) continue;

        const double numeric = (up - down) / (2.0 * kFiniteDifferenceStep);
        const double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric), 1e-8});
        worst = std::max(worst, std::fabs(analytic[i] - numeric) / denom);
    }
    return worst;
}

std::vector<double> flatten(const ClassifierParams& params) {
    std::vector<double> flat;
    flat.reserve(params.parameter_count());
    for (const auto& layer : params.layers) {
        flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
        flat.insert(flat.end(), layer.biases.begin(), layer.biases.end());
    }
    return flat;
}

void unflatten(std::span<const double> flat, ClassifierParams& params) {
    if (flat.size() != params.parameter_count()) throw Error("unflatten: parameter count mismatch");
    std::size_t pos = 0;
    for (auto& layer : params.layers) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), layer.weights.size(), layer.weights.begin());
        pos += layer.weights.size();
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), layer.biases.size(), layer.biases.begin());
        pos += layer.biases.size();
    }
}

std::string encode_classifier(const ClassifierParams& params) {
    std::string out = "LIMC";
    append_u64(out, params.seed);
    append_u32(out, static_cast<std::uint32_t>(params.layers.size()));
    for (const auto& layer : params.layers) {
        append_u32(out, static_cast<std::uint32_t>(layer.inputs));
        append_u32(out, static_cast<std::uint32_t>(layer.outputs));
    }
    for (const auto& layer : params.layers) {
        for (double w : layer.weights) append_u64(out, std::bit_cast<std::uint64_t>(w));
        for (double b : layer.biases) append_u64(out, std::bit_cast<std::uint64_t>(b));
    }
    return out;
}

ClassifierParams decode_classifier(const std::string& bytes, const std::string& origin) {
    std::size_t pos = 0;
    auto need = [&](std::size_t n) {
        if (bytes.size() - pos < n) throw Error(origin + ": truncated classifier file");
    };
    auto u32 = [&]() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
        pos += 4;
        return v;
    };
    auto u64 = [&]() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
        pos += 8;
        return v;
    };

    need(4);
    if (std::memcmp(bytes.data(), "LIMC", 4) != 0) throw Error(origin + ": bad classifier magic (expected LIMC)");
    pos = 4;
    ClassifierParams params;
    params.seed = u64();
    const std::uint32_t depth = u32();
    if (depth == 0 || depth > 64) throw Error(origin + ": implausible layer count " + std::to_string(depth));
    params.layers.resize(depth);
    for (std::uint32_t l = 0; l < depth; ++l) {
        params.layers[l].inputs = static_cast<int>(u32());
        params.layers[l].outputs = static_cast<int>(u32());
        if (params.layers[l].inputs < 1 || params.layers[l].outputs < 1) throw Error(origin + ": empty layer");
        if (l > 0 && params.layers[l].inputs != params.layers[l - 1].outputs) {
            throw Error(origin + ": layer shapes do not chain at layer " + std::to_string(l));
        }
    }
    if (params.layers.back().outputs != 1) throw Error(origin + ": output layer must have one unit");
    for (auto& layer : params.layers) {
        const std::size_t nw = static_cast<std::size_t>(layer.inputs) * static_cast<std::size_t>(layer.outputs);
        need(8 * (nw + static_cast<std::size_t>(layer.outputs)));
        layer.weights.resize(nw);
        for (auto& w : layer.weights) w = std::bit_cast<double>(u64());
        layer.biases.resize(static_cast<std::size_t>(layer.outputs));
        for (auto& b : layer.biases) b = std::bit_cast<double>(u64());
        for (double w : layer.weights) {
            if (!std::isfinite(w)) throw Error(origin + ": non-finite weight");
        }
    }
    if (pos != bytes.size()) throw Error(origin + ": trailing bytes in classifier file");
    return params;
}

void save_classifier(const ClassifierParams& params, const std::filesystem::path& path) {
    write_file(path, encode_classifier(params));
}

ClassifierParams load_classifier(const std::filesystem::path& path) {
    return decode_classifier(read_file(path), path.string());
}

}  // namespace sopm

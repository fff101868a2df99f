#include "sopm/miner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sopm/classifier.hpp"
#include "sopm/cluster.hpp"
#include "sopm/error.hpp"
#include "sopm/motion.hpp"

namespace sopm {
namespace {

std::vector<int> top(const std::vector<int>& ranked, int count) {
    const auto n = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(std::max(count, 0)));
    return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::vector<double> gather(const std::vector<int>& ids, std::span<const double> values) {
    std::vector<double> out;
    out.reserve(ids.size());
    for (int id : ids) out.push_back(values[static_cast<std::size_t>(id - 1)]);
    return out;
}

std::size_t gamma_quota(double gamma_pct, std::size_t candidates) {
    if (candidates == 0) return 0;
    const double raw = gamma_pct * static_cast<double>(candidates) / 100.0;
    return std::min(candidates, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
}

// Chunk boundaries: ceil(T / max) near-equal consecutive ranges.
std::vector<std::pair<int, int>> chunk_ranges(int frames, int max_frames) {
    const int chunks = (frames + max_frames - 1) / max_frames;
    std::vector<std::pair<int, int>> ranges;
    int start = 0;
    for (int c = 0; c < chunks; ++c) {
        const int len = frames / chunks + (c < frames % chunks ? 1 : 0);
        ranges.emplace_back(start, len);
        start += len;
    }
    return ranges;
}

struct ChunkOutcome {
    ChunkSummary summary;
    MiningState state;
    std::vector<IterationTrace> trace;
    std::vector<double> sims;
    ClassifierParams classifier;
};

ChunkOutcome mine_chunk(std::span<const FeatureVector> features, std::span<const double> pms,
                        const PipelineConfig& config, std::uint64_t seed) {
    const std::size_t n = features.size();
    if (static_cast<std::size_t>(config.k) > n) {
        throw Error("cluster stage: k=" + std::to_string(config.k) + " exceeds the " + std::to_string(n) +
                    " proposals available");
    }
    ChunkOutcome out;
    auto& summary = out.summary;
    summary.partition = kmeans_restarts(features, config.k, seed, config.kmeans_restarts);
    summary.ams = cluster_mean_saliency(summary.partition, pms);
    const auto selection = select_salient_clusters(summary.ams, config.k);
    summary.nu = selection.nu;
    summary.salient_clusters = selection.cluster_ids;
    for (int c : selection.cluster_ids) summary.partition.salient_flags[static_cast<std::size_t>(c)] = true;

    out.sims = similarities_to_profiles(summary.partition, features);
    std::vector<ClusterRanking> rankings;
    for (int c = 0; c < config.k; ++c) {
        rankings.push_back(rank_cluster(summary.partition, c, out.sims, pms));
        summary.cutoffs.push_back(cluster_cutoffs(rankings.back(), out.sims, pms, config.xi_frac));
    }
    const auto sets = build_training_sets(summary.partition, rankings, summary.cutoffs);
    MiningState state = initial_state(sets, n);

    IterationTrace first;
    first.iteration = 0;
    first.admitted_pos.assign(state.pos.begin(), state.pos.end());
    first.admitted_neg.assign(state.neg.begin(), state.neg.end());
    first.pos_size = state.pos.size();
    first.neg_size = state.neg.size();
    first.uncertain_size = state.uncertain.size();
    out.trace.push_back(std::move(first));

    const int dim = static_cast<int>(features.front().dim());
    const std::uint64_t classifier_seed = seed + 1;
    ClassifierParams params = init_classifier(dim, config.classifier_hidden, classifier_seed);
    std::vector<double> scores(n);
    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        std::vector<FeatureVector> pos_f;
        std::vector<FeatureVector> neg_f;
        for (int id : state.pos) pos_f.push_back(features[static_cast<std::size_t>(id - 1)]);
        for (int id : state.neg) neg_f.push_back(features[static_cast<std::size_t>(id - 1)]);
        if (config.retrain_from_scratch) params = init_classifier(dim, config.classifier_hidden, classifier_seed);
        auto trained = train(std::move(params), pos_f, neg_f, config.classifier_epochs, config.learning_rate);
        params = std::move(trained.params);
        for (std::size_t i = 0; i < n; ++i) scores[i] = forward(params, features[i]);

        IterationAdmissions admitted;
        state = mining_iteration(state, scores, summary.partition, out.sims, config.gamma_pct, &admitted);
        validate_state(state, n);

        IterationTrace t;
        t.iteration = iter;
        t.admitted_pos = std::move(admitted.pos);
        t.admitted_neg = std::move(admitted.neg);
        t.pos_size = state.pos.size();
        t.neg_size = state.neg.size();
        t.uncertain_size = state.uncertain.size();
        t.classifier_losses = std::move(trained.epoch_losses);
        out.trace.push_back(std::move(t));
    }
    out.state = std::move(state);
    out.classifier = std::move(params);
    return out;
}

}  // namespace

ClusterRanking rank_cluster(const ClusterPartition& partition, int cluster_index, std::span<const double> sims,
                            std::span<const double> pms) {
    if (cluster_index < 0 || cluster_index >= partition.k) {
        throw Error("rank_cluster: unknown cluster " + std::to_string(cluster_index));
    }
    if (sims.size() != partition.assignment.size() || pms.size() != partition.assignment.size()) {
        throw Error("rank_cluster: sims/pms must cover every proposal");
    }
    ClusterRanking r;
    r.cluster_index = cluster_index;
    const auto members = partition.members(cluster_index);
    r.si = members;
    std::stable_sort(r.si.begin(), r.si.end(), [&](int a, int b) { return sims[a - 1] < sims[b - 1]; });
    r.mi = members;
    if (partition.is_salient(cluster_index)) {
        std::stable_sort(r.mi.begin(), r.mi.end(), [&](int a, int b) { return pms[a - 1] > pms[b - 1]; });
    } else {
        std::stable_sort(r.mi.begin(), r.mi.end(), [&](int a, int b) { return pms[a - 1] < pms[b - 1]; });
    }
    return r;
}

int cutoff_lower_bound(int g, double xi_frac) {
    const int xi = static_cast<int>(std::ceil(xi_frac * static_cast<double>(g) - 1e-9));
    return std::clamp(xi, 1, std::max(1, g - 1));
}

int dynamic_cutoff(std::span<const double> values, double xi_frac) {
    const int g = static_cast<int>(values.size());
    if (g < 2) throw Error("dynamic_cutoff: need at least 2 ranked values (got " + std::to_string(g) + ")");
    if (!(xi_frac > 0.0 && xi_frac < 1.0)) throw Error("dynamic_cutoff: xi_frac must be in (0,1)");
    const int xi = cutoff_lower_bound(g, xi_frac);
    int best_j = xi;
    double best_gap = -1.0;
    for (int j = xi; j <= g - 1; ++j) {
        const double gap = std::fabs(values[static_cast<std::size_t>(j)] - values[static_cast<std::size_t>(j - 1)]);
        if (gap > best_gap) {
            best_gap = gap;
            best_j = j;
        }
    }
    return best_j;
}

ClusterCutoffs cluster_cutoffs(const ClusterRanking& ranking, std::span<const double> sims,
                               std::span<const double> pms, double xi_frac) {
    const auto g = static_cast<int>(ranking.si.size());
    if (g < 2) return {g, g};
    return {dynamic_cutoff(gather(ranking.si, sims), xi_frac), dynamic_cutoff(gather(ranking.mi, pms), xi_frac)};
}

TrainingSets build_training_sets(const ClusterPartition& partition, std::span<const ClusterRanking> rankings,
                                 std::span<const ClusterCutoffs> cutoffs) {
    if (rankings.size() != static_cast<std::size_t>(partition.k) || cutoffs.size() != rankings.size()) {
        throw Error("build_training_sets: need a ranking and cutoffs for every cluster");
    }
    TrainingSets sets;
    for (std::size_t i = 0; i < rankings.size(); ++i) {
        const auto& r = rankings[i];
        if (r.si.empty()) continue;
        auto by_sim = top(r.si, cutoffs[i].alpha);
        auto by_motion = top(r.mi, cutoffs[i].beta);
        std::sort(by_sim.begin(), by_sim.end());
        std::sort(by_motion.begin(), by_motion.end());
        std::vector<int> both;
        std::set_intersection(by_sim.begin(), by_sim.end(), by_motion.begin(), by_motion.end(),
                              std::back_inserter(both));
        if (both.empty()) both.push_back(r.si.front());
        auto& target = partition.is_salient(r.cluster_index) ? sets.pos : sets.neg;
        target.insert(both.begin(), both.end());
    }
    return sets;
}

MiningState initial_state(const TrainingSets& sets, std::size_t proposal_count) {
    MiningState state;
    state.pos = sets.pos;
    state.neg = sets.neg;
    for (int id = 1; id <= static_cast<int>(proposal_count); ++id) {
        if (!state.pos.contains(id) && !state.neg.contains(id)) state.uncertain.insert(id);
    }
    validate_state(state, proposal_count);
    return state;
}

void validate_state(const MiningState& state, std::size_t proposal_count) {
    const auto n = static_cast<int>(proposal_count);
    auto check_range = [&](const std::set<int>& s, const char* name) {
        if (!s.empty() && (*s.begin() < 1 || *s.rbegin() > n)) {
            throw Error(std::string("mining state: ") + name + " holds an id outside 1.." + std::to_string(n));
        }
    };
    check_range(state.pos, "pos");
    check_range(state.neg, "neg");
    check_range(state.uncertain, "uncertain");
    for (int id : state.pos) {
        if (state.neg.contains(id)) throw Error("mining state: proposal " + std::to_string(id) + " in both pos and neg");
        if (state.uncertain.contains(id)) throw Error("mining state: proposal " + std::to_string(id) + " in pos and uncertain");
    }
    for (int id : state.neg) {
        if (state.uncertain.contains(id)) throw Error("mining state: proposal " + std::to_string(id) + " in neg and uncertain");
    }
    if (state.pos.size() + state.neg.size() + state.uncertain.size() != proposal_count) {
        throw Error("mining state: sets do not cover all " + std::to_string(n) + " proposals");
    }
}

MiningState mining_iteration(const MiningState& state, std::span<const double> scores,
                             const ClusterPartition& partition, std::span<const double> sims, double gamma_pct,
                             IterationAdmissions* admitted) {
    if (scores.size() != partition.assignment.size() || sims.size() != partition.assignment.size()) {
        throw Error("mining_iteration: scores/sims must cover every proposal");
    }
    std::vector<int> pos_plus;
    std::vector<int> neg_plus;
    for (int id : state.uncertain) {
        const double p = scores[static_cast<std::size_t>(id - 1)];
        if (partition.is_salient(partition.cluster_of(id))) {
            if (p > 0.5) pos_plus.push_back(id);
        } else if (p <= 0.5) {
            neg_plus.push_back(id);
        }
    }
    auto by_sim = [&](int a, int b) { return sims[a - 1] < sims[b - 1]; };
    std::stable_sort(pos_plus.begin(), pos_plus.end(), by_sim);
    std::stable_sort(neg_plus.begin(), neg_plus.end(), by_sim);
    pos_plus.resize(gamma_quota(gamma_pct, pos_plus.size()));
    neg_plus.resize(gamma_quota(gamma_pct, neg_plus.size()));

    MiningState next = state;
    next.iteration = state.iteration + 1;
    for (int id : pos_plus) {
        next.pos.insert(id);
        next.uncertain.erase(id);
    }
    for (int id : neg_plus) {
        next.neg.insert(id);
        next.uncertain.erase(id);
    }
    if (admitted != nullptr) *admitted = {std::move(pos_plus), std::move(neg_plus)};
    return next;
}

std::vector<double> compute_sequence_pms(const SequenceManifest& manifest) {
    std::vector<double> pms;
    pms.reserve(manifest.proposal_count());
    for (std::size_t t = 0; t < manifest.frames.size(); ++t) {
        const auto& frame = manifest.frames[t];
        const auto ms = load_saliency_map(manifest.resolve(frame.motion_map_path));
        if (ms.width() != manifest.frame_width || ms.height() != manifest.frame_height) {
            throw Error("frame " + std::to_string(t) + ": motion map is " + std::to_string(ms.width()) + "x" +
                        std::to_string(ms.height()) + ", expected frame size");
        }
        for (const auto& p : frame.proposals) pms.push_back(proposal_motion_saliency(ms, p.box));
    }
    return pms;
}

MiningResult run_mining(const SequenceManifest& manifest, std::span<const FeatureVector> features,
                        std::span<const double> pms, const PipelineConfig& config) {
    config.validate();
    const std::size_t n = manifest.proposal_count();
    if (features.size() != n || pms.size() != n) {
        throw Error("run_mining: features/pms must cover all " + std::to_string(n) + " proposals");
    }

    MiningResult result;
    result.sims.resize(n);
    const auto ranges = chunk_ranges(manifest.frame_count, config.max_chunk_frames);
    std::size_t offset = 0;
    for (std::size_t c = 0; c < ranges.size(); ++c) {
        const auto [first, count] = ranges[c];
        std::size_t chunk_n = 0;
        for (int t = first; t < first + count; ++t) chunk_n += manifest.frames[static_cast<std::size_t>(t)].proposals.size();

        auto outcome = mine_chunk(features.subspan(offset, chunk_n), pms.subspan(offset, chunk_n), config,
                                  config.seed + 2 * static_cast<std::uint64_t>(c));
        const int shift = static_cast<int>(offset);
        auto lift = [shift](const std::set<int>& ids, std::set<int>& into) {
            for (int id : ids) into.insert(id + shift);
        };
        lift(outcome.state.pos, result.state.pos);
        lift(outcome.state.neg, result.state.neg);
        lift(outcome.state.uncertain, result.state.uncertain);
        result.state.iteration = outcome.state.iteration;
        std::copy(outcome.sims.begin(), outcome.sims.end(), result.sims.begin() + static_cast<std::ptrdiff_t>(offset));

        if (result.trace.empty()) result.trace.resize(outcome.trace.size());
        for (std::size_t i = 0; i < outcome.trace.size(); ++i) {
            auto& dst = result.trace[i];
            const auto& src = outcome.trace[i];
            dst.iteration = src.iteration;
            for (int id : src.admitted_pos) dst.admitted_pos.push_back(id + shift);
            for (int id : src.admitted_neg) dst.admitted_neg.push_back(id + shift);
            dst.pos_size += src.pos_size;
            dst.neg_size += src.neg_size;
            dst.uncertain_size += src.uncertain_size;
            if (dst.classifier_losses.empty()) dst.classifier_losses = src.classifier_losses;
        }

        outcome.summary.first_frame = first;
        outcome.summary.frame_count = count;
        outcome.summary.first_id = shift + 1;
        result.chunks.push_back(std::move(outcome.summary));
        result.classifiers.push_back(std::move(outcome.classifier));
        offset += chunk_n;
    }
    validate_state(result.state, n);
    return result;
}

std::vector<double> resample_nearest(std::span<const double> values, int cells) {
    if (values.empty()) throw Error("resample_nearest: empty input");
    std::vector<double> out(static_cast<std::size_t>(cells));
    const auto n = static_cast<std::uint64_t>(values.size());
    for (int j = 0; j < cells; ++j) {
        out[static_cast<std::size_t>(j)] = values[static_cast<std::size_t>(static_cast<std::uint64_t>(j) * n / static_cast<std::uint64_t>(cells))];
    }
    return out;
}

std::vector<MiningMatrix> emit_mining_matrix(std::span<const IterationTrace> trace, std::span<const int> trust_order) {
    const std::size_t n = trust_order.size();
    std::vector<int> seen(n, 0);
    for (int id : trust_order) {
        if (id < 1 || static_cast<std::size_t>(id) > n || seen[static_cast<std::size_t>(id - 1)]++ != 0) {
            throw Error("emit_mining_matrix: trust order is not a permutation of 1.." + std::to_string(n));
        }
    }
    std::vector<MiningMatrix> matrices;
    for (const auto& t : trace) {
        std::vector<char> selected(n, 0);
        for (int id : t.admitted_pos) {
            if (id < 1 || static_cast<std::size_t>(id) > n) throw Error("emit_mining_matrix: trace id out of range");
            selected[static_cast<std::size_t>(id - 1)] = 1;
        }
        std::vector<double> ordered(n);
        for (std::size_t r = 0; r < n; ++r) ordered[r] = selected[static_cast<std::size_t>(trust_order[r] - 1)];
        const auto cells = resample_nearest(ordered);
        MiningMatrix m{};
        for (int i = 0; i < kMatrixCells; ++i) m[i / kMatrixSide][i % kMatrixSide] = cells[static_cast<std::size_t>(i)];
        matrices.push_back(m);
    }
    return matrices;
}

std::vector<MiningMatrix> average_matrices(std::span<const std::vector<MiningMatrix>> per_sequence) {
    if (per_sequence.empty()) return {};
    const std::size_t len = per_sequence.front().size();
    std::vector<MiningMatrix> mean(len, MiningMatrix{});
    for (const auto& seq : per_sequence) {
        if (seq.size() != len) throw Error("average_matrices: sequences have different iteration counts");
        for (std::size_t it = 0; it < len; ++it) {
            for (int r = 0; r < kMatrixSide; ++r) {
                for (int c = 0; c < kMatrixSide; ++c) mean[it][r][c] += seq[it][r][c];
            }
        }
    }
    for (auto& m : mean) {
        for (auto& row : m) {
            for (auto& v : row) v /= static_cast<double>(per_sequence.size());
        }
    }
    return mean;
}

nlohmann::json trace_to_json(const IterationTrace& t) {
    return nlohmann::json{{"iteration", t.iteration},
                          {"admitted_pos", t.admitted_pos},
                          {"admitted_neg", t.admitted_neg},
                          {"pos_size", t.pos_size},
                          {"neg_size", t.neg_size},
                          {"uncertain_size", t.uncertain_size},
                          {"classifier_losses", t.classifier_losses}};
}

}  // namespace sopm

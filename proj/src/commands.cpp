#include "sopm/commands.hpp"

#include <cstdio>
#include <ostream>

#include "sopm/classifier.hpp"
#include "sopm/error.hpp"
#include "sopm/ingest.hpp"
#include "sopm/metrics.hpp"
#include "sopm/miner.hpp"
#include "sopm/refine.hpp"
#include "sopm/synth.hpp"

namespace sopm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename F>
int run_stage(const char* stage, std::ostream& err, F&& body) {
    try {
        body();
        return 0;
    } catch (const std::exception& e) {
        err << "sopm " << stage << ": " << e.what() << "\n";
        return 1;
    }
}

json matrix_json(const MiningMatrix& m) {
    json rows = json::array();
    for (const auto& row : m) rows.push_back(row);
    return rows;
}

std::string numbered(const char* pattern, int n) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, n);
    return buf;
}

}  // namespace

PipelineConfig resolve_config(const ConfigOverrides& o) {
    PipelineConfig c;
    if (o.config_path) {
        try {
            apply_config_json(read_json(*o.config_path), c);
        } catch (const Error& e) {
            throw Error("config " + o.config_path->string() + ": " + e.what());
        }
    }
    if (o.seed) c.seed = *o.seed;
    if (o.paste_mode) c.paste_mode = paste_mode_from_string(*o.paste_mode);
    if (o.k) c.k = *o.k;
    if (o.b) c.b = *o.b;
    if (o.iterations) c.max_iterations = *o.iterations;
    c.validate();
    return c;
}

json hyperparameters_json(const PipelineConfig& c) {
    return json{{"K", c.k},
                {"B", c.b},
                {"gamma_pct", c.gamma_pct},
                {"xi_frac", c.xi_frac},
                {"iterations", c.max_iterations},
                {"classifier_epochs", c.classifier_epochs},
                {"export_epochs", c.finetune_epochs}};
}

int cmd_synth(const fs::path& spec_path, const fs::path& out_dir, std::uint64_t seed, std::ostream& err,
              const RandomSceneArgs& random) {
    return run_stage("synth", err, [&] {
        const SceneSpec spec = spec_path.empty()
                                   ? random_scene(random.salient, random.distractors, random.frames, seed)
                                   : load_scene(spec_path);
        generate_sequence(spec, seed, out_dir);
    });
}

int cmd_mine(const fs::path& manifest_path, const PipelineConfig& config, const fs::path& out_dir,
             std::ostream& err) {
    return run_stage("mine", err, [&] {
        config.validate();
        const auto manifest = load_manifest(manifest_path);
        const auto features = load_sequence_features(manifest);
        const auto pms = compute_sequence_pms(manifest);
        const auto result = run_mining(manifest, features, pms, config);

        json trace = json::array();
        for (const auto& t : result.trace) trace.push_back(trace_to_json(t));

        json chunks = json::array();
        for (const auto& c : result.chunks) {
            json cutoffs = json::array();
            for (const auto& cut : c.cutoffs) cutoffs.push_back({{"alpha", cut.alpha}, {"beta", cut.beta}});
            chunks.push_back({{"first_frame", c.first_frame},
                              {"frame_count", c.frame_count},
                              {"first_id", c.first_id},
                              {"partition", c.partition},
                              {"ams", c.ams},
                              {"nu", c.nu},
                              {"salient_clusters", c.salient_clusters},
                              {"cutoffs", cutoffs}});
        }

        json matrices = nullptr;
        if (manifest.has_ground_truth()) {
            const auto order = oracle_trust_order(manifest, load_gt_masks(manifest));
            matrices = json::array();
            for (const auto& m : emit_mining_matrix(result.trace, order)) matrices.push_back(matrix_json(m));
        }

        json report{{"sequence", manifest.name},
                    {"frame_count", manifest.frame_count},
                    {"proposal_count", manifest.proposal_count()},
                    {"hyperparameters", hyperparameters_json(config)},
                    {"config", config},
                    {"trace", trace},
                    {"chunks", chunks},
                    {"final", {{"pos", result.state.pos.size()},
                               {"neg", result.state.neg.size()},
                               {"uncertain", result.state.uncertain.size()}}},
                    {"matrices", matrices}};

        write_json(out_dir / "mining_report.json", report);
        write_json(out_dir / "sets.json", result.state);
        for (std::size_t c = 0; c < result.classifiers.size(); ++c) {
            save_classifier(result.classifiers[c], out_dir / "classifiers" / numbered("chunk_%02d.limc", static_cast<int>(c)));
        }
    });
}

int cmd_refine(const fs::path& manifest_path, const fs::path& mining_dir, const PipelineConfig& config,
               const fs::path& out_dir, std::ostream& err) {
    return run_stage("refine", err, [&] {
        config.validate();
        const auto manifest = load_manifest(manifest_path);
        const fs::path sets_path = mining_dir / "sets.json";
        if (!fs::exists(sets_path)) throw Error("mining output missing: " + sets_path.string());
        const auto state = read_json(sets_path).get<MiningState>();
        validate_state(state, manifest.proposal_count());

        std::vector<SaliencyMap> fs_maps;
        std::vector<double> scores;
        for (int t = 0; t < manifest.frame_count; ++t) {
            const auto& frame = manifest.frames[static_cast<std::size_t>(t)];
            const auto motion = load_saliency_map(manifest.resolve(frame.motion_map_path));
            std::vector<PlacedPatch> patches;
            for (std::size_t r = 0; r < frame.proposals.size(); ++r) {
                const auto& p = frame.proposals[r];
                if (!state.pos.contains(p.id)) continue;
                patches.push_back({load_patch(manifest, t, static_cast<int>(r), motion), p.box});
            }
            auto map = paste_frame_saliency(manifest.frame_width, manifest.frame_height, patches, config.paste_mode);
            scores.push_back(spatiotemporal_consistency(map, motion));
            save_saliency_map(map, out_dir / "fs" / numbered("frame_%04d.pgm", t));
            fs_maps.push_back(std::move(map));
        }

        const auto keyframes = select_keyframes(scores, config.b);
        export_finetune_set(manifest.name, keyframes, fs_maps, out_dir / "finetune", config.finetune_epochs);
        write_json(out_dir / "consistency.json", {{"sequence", manifest.name},
                                                  {"hyperparameters", hyperparameters_json(config)},
                                                  {"b", config.b},
                                                  {"paste_mode", to_string(config.paste_mode)},
                                                  {"finetune_epochs", config.finetune_epochs},
                                                  {"scores", scores},
                                                  {"keyframes", keyframes},
                                                  {"keyframe_count", keyframes.size()}});
    });
}

int cmd_eval(const fs::path& pred_dir, const fs::path& gt_dir, const fs::path& report_path, std::ostream& err) {
    return run_stage("eval", err, [&] { write_json(report_path, evaluate_directories(pred_dir, gt_dir).to_json()); });
}

PosScore score_pos(const std::set<int>& pos, const std::vector<bool>& labels) {
    PosScore s;
    s.pos_size = pos.size();
    for (bool l : labels) s.true_salient += l ? 1 : 0;
    for (int id : pos) {
        if (id < 1 || static_cast<std::size_t>(id) > labels.size()) throw Error("Pos id " + std::to_string(id) + " out of range");
        s.hits += labels[static_cast<std::size_t>(id - 1)] ? 1 : 0;
    }
    s.precision = s.pos_size == 0 ? 1.0 : static_cast<double>(s.hits) / static_cast<double>(s.pos_size);
    s.recall = s.true_salient == 0 ? 1.0 : static_cast<double>(s.hits) / static_cast<double>(s.true_salient);
    return s;
}

int cmd_report(const fs::path& manifest_path, const fs::path& mining_dir, const fs::path& report_path,
               std::ostream& out, std::ostream& err) {
    return run_stage("report", err, [&] {
        const auto manifest = load_manifest(manifest_path);
        const auto mining = read_json(mining_dir / "mining_report.json");
        const auto state = read_json(mining_dir / "sets.json").get<MiningState>();
        validate_state(state, manifest.proposal_count());

        json sizes = json::array();
        for (const auto& t : mining.at("trace")) {
            sizes.push_back({{"iteration", t.at("iteration")}, {"pos", t.at("pos_size")}, {"neg", t.at("neg_size")}});
        }
        json summary{{"sequence", manifest.name},
                     {"hyperparameters", mining.at("hyperparameters")},
                     {"set_sizes", sizes},
                     {"oracle", nullptr}};

        out << "sequence " << manifest.name << ": " << manifest.proposal_count() << " proposals\n";
        for (const auto& s : sizes) {
            out << "  iteration " << s.at("iteration") << ": |Pos| " << s.at("pos") << ", |Neg| " << s.at("neg") << "\n";
        }
        if (manifest.has_ground_truth()) {
            const auto labels = oracle_label(manifest, load_gt_masks(manifest));
            const auto score = score_pos(state.pos, labels);
            summary["oracle"] = {{"threshold", 0.5},
                                 {"pos_size", score.pos_size},
                                 {"true_salient", score.true_salient},
                                 {"hits", score.hits},
                                 {"precision", score.precision},
                                 {"recall", score.recall}};
            char line[128];
            std::snprintf(line, sizeof line, "  Pos precision %.3f, recall %.3f\n", score.precision, score.recall);
            out << line;
        }
        if (!report_path.empty()) write_json(report_path, summary);
    });
}

}  // namespace sopm

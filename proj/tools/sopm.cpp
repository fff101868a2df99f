// Command-line front end: synth | mine | refine | eval | report.

#include <CLI11.hpp>

#include <iostream>

#include "sopm/commands.hpp"
#include "sopm/error.hpp"

namespace {

void add_config_flags(CLI::App* cmd, sopm::ConfigOverrides& o, bool refine_flags) {
    cmd->add_option("--config", o.config_path, "JSON file mirroring PipelineConfig")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Pipeline seed");
    cmd->add_option("--k", o.k, "Number of clusters (>= 4)");
    cmd->add_option("--iterations", o.iterations, "Mining iterations");
    if (refine_flags) {
        cmd->add_option("--b", o.b, "Keyframe batch length");
        cmd->add_option("--paste-mode", o.paste_mode, "Patch combination")->check(CLI::IsMember({"max", "ave"}));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Salient object proposal mining pipeline"};
    app.require_subcommand(1);

    std::string spec, manifest, mining, pred, gt, report;
    std::string out = ".";
    std::uint64_t synth_seed = 0;
    sopm::RandomSceneArgs random;
    sopm::ConfigOverrides mine_opts, refine_opts;

    auto* synth = app.add_subcommand("synth", "Generate a synthetic sequence with ground truth");
    synth->add_option("--spec", spec, "Scene spec JSON (random scene when omitted)")->check(CLI::ExistingFile);
    synth->add_option("--seed", synth_seed, "Generator seed");
    synth->add_option("--salient", random.salient, "Random scene: salient blobs");
    synth->add_option("--distractors", random.distractors, "Random scene: distractor blobs");
    synth->add_option("--frames", random.frames, "Random scene: frame count");
    synth->add_option("--out", out, "Output directory")->required();

    auto* mine = app.add_subcommand("mine", "Mine salient proposals");
    mine->add_option("--manifest", manifest, "Sequence manifest")->required()->check(CLI::ExistingFile);
    add_config_flags(mine, mine_opts, true);
    mine->add_option("--out", out, "Output directory")->required();

    auto* refine = app.add_subcommand("refine", "Frame saliency, consistency and keyframes");
    refine->add_option("--manifest", manifest, "Sequence manifest")->required()->check(CLI::ExistingFile);
    refine->add_option("--mining", mining, "Directory written by `mine`")->required()->check(CLI::ExistingDirectory);
    add_config_flags(refine, refine_opts, true);
    refine->add_option("--out", out, "Output directory")->required();

    auto* eval = app.add_subcommand("eval", "Score predicted maps against ground truth");
    eval->add_option("--pred", pred, "Directory of predicted PGMs")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--gt", gt, "Directory of ground-truth PGMs")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--out,--report", report, "Report JSON path")->required();

    auto* rep = app.add_subcommand("report", "Summarize a mining run");
    rep->add_option("--manifest", manifest, "Sequence manifest")->required()->check(CLI::ExistingFile);
    rep->add_option("--mining", mining, "Directory written by `mine`")->required()->check(CLI::ExistingDirectory);
    rep->add_option("--out,--report", report, "Summary JSON path");

    CLI11_PARSE(app, argc, argv);

    auto config_for = [](const char* stage, const sopm::ConfigOverrides& o, sopm::PipelineConfig& c) {
        try {
            c = sopm::resolve_config(o);
            return true;
        } catch (const std::exception& e) {
            std::cerr << "sopm " << stage << ": " << e.what() << "\n";
            return false;
        }
    };

    sopm::PipelineConfig config;
    if (*synth) return sopm::cmd_synth(spec, out, synth_seed, std::cerr, random);
    if (*mine) {
        if (!config_for("mine", mine_opts, config)) return 2;
        return sopm::cmd_mine(manifest, config, out, std::cerr);
    }
    if (*refine) {
        if (!config_for("refine", refine_opts, config)) return 2;
        return sopm::cmd_refine(manifest, mining, config, out, std::cerr);
    }
    if (*eval) return sopm::cmd_eval(pred, gt, report, std::cerr);
    return sopm::cmd_report(manifest, mining, report, std::cout, std::cerr);
}

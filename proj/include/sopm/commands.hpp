#pragma once

// Pipeline stages as callable units. Each stage reads its inputs from files
// and writes its outputs to a directory, so any stage can be rerun on its own.
// Every cmd_* returns a process exit code and reports failures on `err`.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sopm/model.hpp"

namespace sopm {

/// Layered configuration: defaults, then the config file, then flags.
struct ConfigOverrides {
    std::optional<std::filesystem::path> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> paste_mode;
    std::optional<int> k;
    std::optional<int> b;
    std::optional<int> iterations;
};

PipelineConfig resolve_config(const ConfigOverrides& overrides);

/// Headline hyperparameters as they appear in every report.
nlohmann::json hyperparameters_json(const PipelineConfig& config);

struct RandomSceneArgs {
    int salient = 2;
    int distractors = 6;
    int frames = 60;
};

/// Generates a synthetic sequence from a scene spec, or from a random scene
/// when spec_path is empty.
int cmd_synth(const std::filesystem::path& spec_path, const std::filesystem::path& out_dir, std::uint64_t seed,
              std::ostream& err, const RandomSceneArgs& random = {});

/// Writes mining_report.json, sets.json and classifiers/chunk_NN.limc.
int cmd_mine(const std::filesystem::path& manifest_path, const PipelineConfig& config,
             const std::filesystem::path& out_dir, std::ostream& err);

/// Writes fs/frame_NNNN.pgm, consistency.json and finetune/.
int cmd_refine(const std::filesystem::path& manifest_path, const std::filesystem::path& mining_dir,
               const PipelineConfig& config, const std::filesystem::path& out_dir, std::ostream& err);

int cmd_eval(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
             const std::filesystem::path& report_path, std::ostream& err);

/// Summarizes a mining run; with ground truth in the manifest, also scores the
/// final Pos set against oracle labels.
int cmd_report(const std::filesystem::path& manifest_path, const std::filesystem::path& mining_dir,
               const std::filesystem::path& report_path, std::ostream& out, std::ostream& err);

struct PosScore {
    std::size_t pos_size = 0;
    std::size_t true_salient = 0;
    std::size_t hits = 0;
    double precision = 0.0;  // 1 when Pos is empty
    double recall = 0.0;     // 1 when nothing is salient
};

/// `labels` is indexed by id-1.
PosScore score_pos(const std::set<int>& pos, const std::vector<bool>& labels);

}  // namespace sopm

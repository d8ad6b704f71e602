#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "newsalpha/pipeline.hpp"
#include "newsalpha/synthetic.hpp"

namespace newsalpha::cli {

namespace fs = std::filesystem;

struct SynthOptions {
    SyntheticSpec spec;
    fs::path out_dir;
    std::size_t table_dim = 16;
    std::vector<int> layers;  // synthetic contextual layers to export
};

void cmd_synth(const SynthOptions& opt);
void cmd_label(const RunConfig& cfg, const fs::path& output);
void cmd_train(const RunConfig& cfg, const fs::path& labels, const fs::path& output);
void cmd_score(const RunConfig& cfg, const fs::path& labels, const fs::path& model, const fs::path& precomputed,
               const fs::path& output);
void cmd_eval(const RunConfig& cfg, const fs::path& labels, const fs::path& scores, const fs::path& output);
void cmd_backtest(const RunConfig& cfg, const fs::path& scores, const fs::path& output, const fs::path& ledger_dir);
void cmd_ablate(const RunConfig& cfg, const fs::path& labels, const std::vector<fs::path>& embeddings,
                const fs::path& output);

}  // namespace newsalpha::cli

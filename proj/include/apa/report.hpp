#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "apa/datagen.hpp"
#include "apa/nn.hpp"
#include "apa/stats.hpp"

namespace apa {

using Json = nlohmann::ordered_json;

inline constexpr int kReportVersion = 1;

/// Everything a toy training run needs: data spec, model shape, optimizer
/// settings. One seed drives data generation, init and batching.
struct ToyRunConfig {
    std::uint64_t seed = 0;
    LongTailSpec data{20, 16, 500, 100.0, 0.35, 0};
    std::size_t eval_per_class = 100;
    ModelConfig model;
    TrainConfig train;
};

Json to_json(const ToyRunConfig& cfg);
/// Parses a config; absent fields keep their defaults. `fallback_seed` is
/// used when the document carries no "seed" (APA_SEED at the CLI).
ToyRunConfig toy_config_from_json(const Json& j, std::uint64_t fallback_seed = 0);

/// Serialized record of one training run, sufficient to reproduce the model.
struct RunReport {
    int version = kReportVersion;
    ToyRunConfig config;
    std::vector<double> per_epoch_loss;
    GroupAccuracy final_accuracy;
    double train_avg_acc = 0.0;
    std::vector<SiteTrajectory> trajectories;
    std::vector<double> model_state;

    bool operator==(const RunReport& other) const;
};

Json to_json(const RunReport& report);
RunReport run_report_from_json(const Json& j);

struct RunOutput {
    RunReport report;
    Model model;
    SampledDataset train_data;
    SampledDataset eval_data;
};

/// Generates the datasets, builds and trains the model, and assembles the
/// report. Deterministic per config.
RunOutput run_toy(const ToyRunConfig& cfg);

/// Rebuilds the trained model recorded in a report.
Model model_from_report(const RunReport& report);

Json alignment_to_json(const AlignmentReport& report, const std::string& source);
void write_alignment_csv(const std::string& path, const AlignmentReport& report);

/// Per-layer, per-group gate entropy/variance for a trained run.
Json entropy_report(const RunReport& report);

}  // namespace apa

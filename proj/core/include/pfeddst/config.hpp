#pragma once

#include "pfeddst/client.hpp"
#include "pfeddst/scoring.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pfeddst {

enum class SelectionStrategy { Score, Random, LocalOnly, PlainAverage };

std::string to_string(SelectionStrategy s);
SelectionStrategy strategy_from_string(const std::string& s);

enum class DataSource { Synthetic, Flatfile };

/// Full experiment description. Parsed from a sectioned key=value config
/// file; every field has a desk-scale default except the model dimensions.
struct SimConfig {
    // [model]
    int input_dim = 0;              // required
    std::vector<int> hidden_dims;   // required
    int num_classes = 0;            // required
    int split_index = -1;           // default: all hidden layers in the feature part

    // [data]
    DataSource source = DataSource::Synthetic;
    int per_class = 120;
    double spread = 0.6;
    int classes_per_client = 2;
    std::string data_path; // flatfile source only

    // [scoring]
    double alpha = 1.0;
    double lambda = 0.2;
    HeaderScoreMode header_mode = HeaderScoreMode::Cosine;
    std::optional<int> top_k;
    std::optional<double> threshold;
    bool top_k_wins = false; // both were configured; top_k governs
    double comm_cost_constant = 1.0;
    std::string comm_cost_file;
    int eval_sample = 64;

    // [train]
    int epochs_feature = 5;
    int epochs_header = 1;
    int batch_size = 32;
    double lr_feature = 0.1;
    double lr_header = 0.1;
    double momentum = 0.9;
    double weight_decay = 0.005;

    // [sim]
    int num_clients = 20;
    int rounds = 60;
    double clients_per_round = 1.0;
    int neighbors_visible = -1; // -1 = all peers visible
    SelectionStrategy strategy = SelectionStrategy::Score;
    AggregateMode aggregate = AggregateMode::MeanWithSelf;
    std::uint64_t master_seed = 1;
    int threads = 1;
    bool record_wall_time = false;

    ScoringParams scoring_params() const;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;
};

/// Parses a config file. Unknown sections or keys are hard errors.
SimConfig parse_config(const std::filesystem::path& path);

/// Writes every effective parameter (including defaulted ones) in the same
/// format parse_config reads, so a run can be reproduced from its echo.
void write_config_echo(const SimConfig& cfg, const std::filesystem::path& path);

} // namespace pfeddst

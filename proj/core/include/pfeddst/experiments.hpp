#pragma once

#include "pfeddst/simulator.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pfeddst {

/// Overrides applied on top of a parsed config (CLI flags).
struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<SelectionStrategy> strategy;
};

struct RunOutputs {
    std::vector<RoundMetrics> rows;
    std::filesystem::path metrics_path;
    std::filesystem::path echo_path;
};

/// Runs one simulation and writes metrics.csv plus config_echo.ini under
/// out_dir (created if needed).
RunOutputs run_experiment(const SimConfig& cfg, const std::filesystem::path& out_dir,
                          const WarnFn& warn = stderr_warner());

/// Experiment matrix for the strategy comparison: each (strategy, seed) cell
/// is a full run; the summary reports per-strategy medians across seeds.
struct CompareSpec {
    std::filesystem::path base_config;
    std::vector<SelectionStrategy> strategies;
    std::vector<std::uint64_t> seeds;
    double target_accuracy = 0.9;
    std::filesystem::path out_dir = "compare_out";
};

CompareSpec parse_compare_spec(const std::filesystem::path& path);

struct CompareSummaryRow {
    SelectionStrategy strategy{};
    std::optional<int> median_rounds_to_target; // nullopt = "not reached"
    double final_mean_acc = 0.0;                // median across seeds
};

/// Runs every cell, writes per-cell outputs under out_dir/<strategy>_seed<s>/
/// and the summary CSV (strategy,median_rounds_to_target,final_mean_acc) to
/// out_dir/summary.csv. A failed cell is recorded as a warning and treated
/// as "not reached"; remaining cells still run.
std::vector<CompareSummaryRow> run_compare(const CompareSpec& spec,
                                           const WarnFn& warn = stderr_warner());

std::filesystem::path write_compare_summary(const std::vector<CompareSummaryRow>& rows,
                                            const std::filesystem::path& out_dir);

/// One row of the selection-validation report: the accuracy of a selected
/// peer's published model on the designated client's test data. The row with
/// peer_id == client_id carries the client's own post-round accuracy.
struct PeerValidationRow {
    int round = 0;
    int peer_id = 0;
    double accuracy = 0.0;
};

/// Per-round evaluation of every peer the designated client selected,
/// mirroring a selected-peer validation sweep. Emits report.csv under
/// out_dir when out_dir is nonempty.
std::vector<PeerValidationRow> run_validate_selection(const SimConfig& cfg, int client_id,
                                                      const std::filesystem::path& out_dir = {},
                                                      const WarnFn& warn = stderr_warner());

/// Mean accuracy over the peer rows (self rows excluded) whose round lies in
/// [first_round, last_round].
double mean_selected_peer_accuracy(const std::vector<PeerValidationRow>& rows, int client_id,
                                   int first_round, int last_round);

} // namespace pfeddst

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pfeddst {

/// One row of the per-round metrics file.
struct RoundMetrics {
    int round = 0;
    int client_id = 0;
    double test_acc = 0.0;
    double train_loss = 0.0;
    std::vector<int> selected;         // peer ids, ascending, never the client itself
    std::optional<double> mean_score;  // mean composite of selected (score strategy only)
    std::optional<double> rho;         // selection skew; nullopt = undefined this round
    std::int64_t wall_ms = 0;
};

/// Shortest-round-trip decimal rendering; keeps metrics byte-reproducible
/// and exactly re-parseable.
std::string format_double(double v);

inline constexpr const char* kMetricsHeader =
    "round,client_id,test_acc,train_loss,selected,mean_score,rho,wall_ms";

std::string to_csv_row(const RoundMetrics& m);

void write_metrics_csv(const std::vector<RoundMetrics>& rows, const std::filesystem::path& path);

} // namespace pfeddst

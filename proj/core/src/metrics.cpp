#include "pfeddst/metrics.hpp"

#include "pfeddst/error.hpp"

#include <charconv>
#include <fstream>

namespace pfeddst {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string to_csv_row(const RoundMetrics& m) {
    std::string row;
    row += std::to_string(m.round);
    row += ',';
    row += std::to_string(m.client_id);
    row += ',';
    row += format_double(m.test_acc);
    row += ',';
    row += format_double(m.train_loss);
    row += ',';
    for (std::size_t i = 0; i < m.selected.size(); ++i) {
        if (i) row += ';';
        row += std::to_string(m.selected[i]);
    }
    row += ',';
    if (m.mean_score) row += format_double(*m.mean_score);
    row += ',';
    if (m.rho) row += format_double(*m.rho);
    row += ',';
    row += std::to_string(m.wall_ms);
    return row;
}

void write_metrics_csv(const std::vector<RoundMetrics>& rows,
                       const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary); // fixed \n endings on all platforms
    if (!out) throw Error("cannot write metrics file: " + path.string());
    out << kMetricsHeader << "\n";
    for (const RoundMetrics& m : rows) out << to_csv_row(m) << "\n";
}

} // namespace pfeddst

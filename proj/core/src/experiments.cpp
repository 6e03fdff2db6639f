#include "pfeddst/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace pfeddst {

RunOutputs run_experiment(const SimConfig& cfg, const std::filesystem::path& out_dir,
                          const WarnFn& warn) {
    std::filesystem::create_directories(out_dir);
    RunOutputs out;
    out.metrics_path = out_dir / "metrics.csv";
    out.echo_path = out_dir / "config_echo.ini";

    write_config_echo(cfg, out.echo_path);
    SimResult result = run_simulation(cfg, warn);
    write_metrics_csv(result.rows, out.metrics_path);
    out.rows = std::move(result.rows);
    return out;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

CompareSpec parse_compare_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open compare spec: " + path.string());

    CompareSpec spec;
    bool in_section = false;
    bool saw_config = false, saw_strategies = false, saw_seeds = false, saw_target = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line == "[compare]") {
            in_section = true;
            continue;
        }
        if (line.front() == '[')
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": unknown section '" + line + "' (only [compare] is allowed)");
        if (!in_section)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": keys must appear inside [compare]");
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "config") {
            spec.base_config = value;
            saw_config = true;
        } else if (key == "strategies") {
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ','))
                spec.strategies.push_back(strategy_from_string(trim(item)));
            saw_strategies = true;
        } else if (key == "seeds") {
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = trim(item);
                unsigned long long seed = 0;
                auto res = std::from_chars(item.data(), item.data() + item.size(), seed);
                if (res.ec != std::errc() || res.ptr != item.data() + item.size())
                    throw ConfigError("compare.seeds: bad seed '" + item + "'");
                spec.seeds.push_back(seed);
            }
            saw_seeds = true;
        } else if (key == "target_accuracy") {
            double v = 0.0;
            auto res = std::from_chars(value.data(), value.data() + value.size(), v);
            if (res.ec != std::errc() || res.ptr != value.data() + value.size())
                throw ConfigError("compare.target_accuracy: bad number '" + value + "'");
            spec.target_accuracy = v;
            saw_target = true;
        } else if (key == "out") {
            spec.out_dir = value;
        } else {
            throw ConfigError(path.string() + ": unknown key '" + key + "' in [compare]");
        }
    }
    if (!saw_config) throw ConfigError(path.string() + ": missing required key 'config'");
    if (!saw_strategies || spec.strategies.empty())
        throw ConfigError(path.string() + ": missing required key 'strategies'");
    if (!saw_seeds || spec.seeds.empty())
        throw ConfigError(path.string() + ": missing required key 'seeds'");
    if (!saw_target) throw ConfigError(path.string() + ": missing required key 'target_accuracy'");
    return spec;
}

namespace {

/// Median with "not reached" sorted last; returns nullopt when the median
/// cell itself is unreached.
std::optional<int> median_rounds(std::vector<std::optional<int>> values) {
    auto key = [](const std::optional<int>& v) {
        return v ? *v : std::numeric_limits<int>::max();
    };
    std::sort(values.begin(), values.end(),
              [&](const auto& a, const auto& b) { return key(a) < key(b); });
    return values[values.size() / 2];
}

double median_double(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return values[values.size() / 2];
}

double final_round_mean_acc(const std::vector<RoundMetrics>& rows) {
    if (rows.empty()) return std::numeric_limits<double>::quiet_NaN();
    const int last = rows.back().round;
    double sum = 0.0;
    int n = 0;
    for (auto it = rows.rbegin(); it != rows.rend() && it->round == last; ++it) {
        sum += it->test_acc;
        ++n;
    }
    return sum / n;
}

} // namespace

std::vector<CompareSummaryRow> run_compare(const CompareSpec& spec, const WarnFn& warn) {
    SimConfig base = parse_config(spec.base_config);
    std::filesystem::create_directories(spec.out_dir);

    std::vector<CompareSummaryRow> summary;
    for (SelectionStrategy strat : spec.strategies) {
        std::vector<std::optional<int>> rounds;
        std::vector<double> finals;
        for (std::uint64_t seed : spec.seeds) {
            SimConfig cfg = base;
            cfg.strategy = strat;
            cfg.master_seed = seed;
            const std::filesystem::path cell_dir =
                spec.out_dir / (to_string(strat) + "_seed" + std::to_string(seed));
            try {
                RunOutputs out = run_experiment(cfg, cell_dir, warn);
                rounds.push_back(rounds_to_target(out.rows, spec.target_accuracy));
                finals.push_back(final_round_mean_acc(out.rows));
            } catch (const Error& e) {
                if (warn)
                    warn("compare cell " + to_string(strat) + " seed " + std::to_string(seed) +
                         " failed: " + e.what());
                rounds.push_back(std::nullopt);
            }
        }
        CompareSummaryRow row;
        row.strategy = strat;
        row.median_rounds_to_target = median_rounds(std::move(rounds));
        row.final_mean_acc = finals.empty() ? std::numeric_limits<double>::quiet_NaN()
                                            : median_double(std::move(finals));
        summary.push_back(row);
    }

    write_compare_summary(summary, spec.out_dir);
    return summary;
}

std::filesystem::path write_compare_summary(const std::vector<CompareSummaryRow>& rows,
                                            const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path path = out_dir / "summary.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write summary: " + path.string());
    out << "strategy,median_rounds_to_target,final_mean_acc\n";
    for (const CompareSummaryRow& r : rows) {
        out << to_string(r.strategy) << ',';
        if (r.median_rounds_to_target) out << *r.median_rounds_to_target;
        else out << "not reached";
        out << ',' << format_double(r.final_mean_acc) << "\n";
    }
    return path;
}

std::vector<PeerValidationRow> run_validate_selection(const SimConfig& cfg, int client_id,
                                                      const std::filesystem::path& out_dir,
                                                      const WarnFn& warn) {
    if (client_id < 0 || client_id >= cfg.num_clients)
        throw PreconditionError("validate-selection: client " + std::to_string(client_id) +
                                " out of range [0, " + std::to_string(cfg.num_clients) + ")");

    Simulation sim(cfg, warn);
    std::vector<PeerValidationRow> rows;
    for (int t = 1; t <= cfg.rounds; ++t) {
        // Snapshot the registry the designated client will read this round.
        Registry before = sim.registry();
        sim.run_round();

        const auto& active = sim.last_active();
        if (!std::binary_search(active.begin(), active.end(), client_id)) continue;

        // The metrics row for this client carries the selected set.
        const auto& metrics = sim.metrics();
        auto it = std::find_if(metrics.rbegin(), metrics.rend(), [&](const RoundMetrics& m) {
            return m.round == t && m.client_id == client_id;
        });
        for (int peer : it->selected) {
            PeerValidationRow row;
            row.round = t;
            row.peer_id = peer;
            row.accuracy = sim.snapshot_accuracy(*before[static_cast<std::size_t>(peer)],
                                                 client_id);
            rows.push_back(row);
        }
        rows.push_back({t, client_id, it->test_acc});
    }

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream out(out_dir / "report.csv", std::ios::binary);
        if (!out) throw Error("cannot write report: " + (out_dir / "report.csv").string());
        out << "round,peer_id,accuracy\n";
        for (const PeerValidationRow& r : rows)
            out << r.round << ',' << r.peer_id << ',' << format_double(r.accuracy) << "\n";
    }
    return rows;
}

double mean_selected_peer_accuracy(const std::vector<PeerValidationRow>& rows, int client_id,
                                   int first_round, int last_round) {
    double sum = 0.0;
    long n = 0;
    for (const PeerValidationRow& r : rows) {
        if (r.peer_id == client_id) continue;
        if (r.round < first_round || r.round > last_round) continue;
        sum += r.accuracy;
        ++n;
    }
    if (n == 0) throw PreconditionError("mean_selected_peer_accuracy: no peer rows in range");
    return sum / static_cast<double>(n);
}

} // namespace pfeddst

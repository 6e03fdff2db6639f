#pragma once

#include "pfeddst/client.hpp"
#include "pfeddst/config.hpp"
#include "pfeddst/metrics.hpp"

#include <optional>
#include <vector>

namespace pfeddst {

/// Accuracy of argmax predictions on a test set; prediction ties resolve to
/// the lowest class index.
double evaluate_accuracy(const SplitModel& model, const Dataset& test);

/// Personalized test accuracy of a client on its own test shard.
double evaluate_client(const ClientState& me);

enum class ClientStage { RoundStart, PostAggregate, PostFeaturePhase, PostHeaderPhase };

/// Observation hooks for integration checks. With threads > 1 callbacks fire
/// from worker threads, so observers used there must be thread-safe.
class RoundObserver {
public:
    virtual ~RoundObserver() = default;
    virtual void on_client_stage(int /*round*/, const ClientState&, ClientStage) {}
    virtual void on_selection(int /*round*/, int /*client_id*/,
                              const std::vector<int>& /*selected*/) {}
};

/// Synchronous-round simulator for one experiment. Clients active in a round
/// read only the previous round's published snapshots, so rounds can run
/// client-parallel with results bit-identical to sequential execution.
class Simulation {
public:
    explicit Simulation(SimConfig cfg, WarnFn warn = stderr_warner());

    void set_observer(RoundObserver* obs) { observer_ = obs; }

    /// Runs one communication round (clients are sampled, trained, published).
    void run_round();

    /// Runs all configured rounds.
    void run_all();

    int current_round() const { return round_; }
    const SimConfig& config() const { return cfg_; }
    const std::vector<RoundMetrics>& metrics() const { return metrics_; }
    const std::vector<ClientState>& clients() const { return clients_; }
    const Registry& registry() const { return registry_; }
    const std::vector<int>& visible_peers(int client) const;
    const std::vector<int>& last_active() const { return last_active_; }

    /// Accuracy of an arbitrary published snapshot on `client`'s test shard;
    /// the probe behind the selection-validation report.
    double snapshot_accuracy(const PublishedState& snap, int client) const;

private:
    struct ClientRoundResult {
        PublishedState snapshot;
        RoundMetrics row;
    };

    ClientRoundResult run_client_round(int client_id, int round);
    double eval_loss(int client_id, const SplitModel& model) const;

    SimConfig cfg_;
    WarnFn warn_;
    ScoringParams params_;
    std::vector<ClientState> clients_;
    Registry registry_;
    std::vector<std::vector<int>> visible_;
    std::vector<double> data_fraction_;
    std::vector<Batch> eval_batches_;
    std::vector<RoundMetrics> metrics_;
    std::vector<int> last_active_;
    RoundObserver* observer_ = nullptr;
    int round_ = 0;
};

struct SimResult {
    std::vector<RoundMetrics> rows;
};

/// Builds a Simulation from the config and runs every round.
SimResult run_simulation(const SimConfig& cfg, WarnFn warn = stderr_warner(),
                         RoundObserver* observer = nullptr);

/// First round whose mean test accuracy over that round's rows reaches the
/// target; nullopt when the target is never reached.
std::optional<int> rounds_to_target(const std::vector<RoundMetrics>& rows,
                                    double target_accuracy);

/// Number of clients sampled per round: ceil(ratio * num_clients).
int active_count(double ratio, int num_clients);

} // namespace pfeddst

#pragma once

#include "pfeddst/error.hpp"
#include "pfeddst/partition.hpp"
#include "pfeddst/scoring.hpp"
#include "pfeddst/training.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace pfeddst {

/// Deep-copied snapshot a client registers for its peers to read next round.
struct PublishedState {
    int client_id = 0;
    std::vector<Layer> feature_layers;
    std::vector<Layer> header_layers;
    int round_stamp = 0;
    /// Best local loss observed so far on the owner's evaluation sample;
    /// the L_j(w_j*) stand-in used by the selection-skew diagnostic.
    double best_local_loss = 0.0;

    Vector flatten_header() const;
};

/// One simulated client.
struct ClientState {
    int id = 0;
    SplitModel model;
    ClientShard shard;
    OptimizerState opt_feature;
    OptimizerState opt_header;
    std::map<int, double> loss_array; // latest s_loss per visible peer
    RecencyArray recency;
    double best_local_loss = 0.0;
    std::uint64_t rng_seed = 0;
};

/// Previous-round snapshots, indexed by client id. An engaged entry exists
/// for every client that has published.
using Registry = std::vector<std::optional<PublishedState>>;

/// Reports the scalar loss of `model` evaluated on a peer's data. In the
/// simulator this closes over the peer's evaluation sample; a real
/// deployment would have the peer compute and report the same scalar.
using LossProbe = std::function<double(int peer_id, const SplitModel& model)>;

enum class AggregateMode { MeanWithSelf, SumPeers };

/// Scores every visible candidate (excluding self) and refreshes the loss
/// array. Peers missing from the registry are skipped with a warning.
std::vector<PeerScore> score_candidates(ClientState& me, const Registry& registry,
                                        const std::vector<int>& visible,
                                        const ScoringParams& params, const LossProbe& probe,
                                        const WarnFn& warn = {});

/// Replaces the feature layers with the element-wise mean over {me} union
/// selected snapshots (MeanWithSelf) or the literal sum over the snapshots
/// (SumPeers). Headers are untouched. An empty selection leaves the model
/// unchanged in both modes.
void aggregate_features(ClientState& me, const std::vector<const PublishedState*>& selected,
                        AggregateMode mode = AggregateMode::MeanWithSelf);

/// Mini-batch SGD over the local shard with the header frozen. Returns the
/// mean loss of each epoch. The header is bit-identical before and after.
std::vector<double> train_feature_phase(ClientState& me, int epochs, int batch_size, Rng& rng);

/// Mirror of the feature phase with the roles swapped.
std::vector<double> train_header_phase(ClientState& me, int epochs, int batch_size, Rng& rng);

/// Deep-copy snapshot of the current model; stamps the recency array for the
/// peers selected this round.
PublishedState publish(ClientState& me, int round, const std::vector<int>& selected_now);

} // namespace pfeddst

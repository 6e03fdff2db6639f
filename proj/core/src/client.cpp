#include "pfeddst/client.hpp"

#include <algorithm>
#include <string>

namespace pfeddst {

Vector PublishedState::flatten_header() const {
    Vector flat;
    for (const Layer& l : header_layers) {
        flat.insert(flat.end(), l.weights.data.begin(), l.weights.data.end());
        flat.insert(flat.end(), l.bias.begin(), l.bias.end());
    }
    return flat;
}

std::vector<PeerScore> score_candidates(ClientState& me, const Registry& registry,
                                        const std::vector<int>& visible,
                                        const ScoringParams& params, const LossProbe& probe,
                                        const WarnFn& warn) {
    const Vector my_header = me.model.flatten_header();
    std::vector<PeerScore> scores;
    scores.reserve(visible.size());
    for (int peer : visible) {
        if (peer == me.id) continue;
        if (peer < 0 || peer >= static_cast<int>(registry.size()) ||
            !registry[static_cast<std::size_t>(peer)]) {
            if (warn)
                warn("client " + std::to_string(me.id) + ": peer " + std::to_string(peer) +
                     " has no published state, skipping");
            continue;
        }
        const PublishedState& snap = *registry[static_cast<std::size_t>(peer)];

        PeerScore s;
        s.peer_id = peer;
        s.s_loss = probe(peer, me.model);
        const double cosine = header_distance_score(my_header, snap.flatten_header());
        s.s_header =
            params.header_mode == HeaderScoreMode::CosineDistance ? 1.0 - cosine : cosine;
        s.s_recency = recency_score(me.recency, peer, params.lambda);
        s.composite = composite_score(s.s_loss, s.s_header, s.s_recency, params, me.id, peer);
        scores.push_back(s);

        me.loss_array[peer] = s.s_loss;
    }
    return scores;
}

void aggregate_features(ClientState& me, const std::vector<const PublishedState*>& selected,
                        AggregateMode mode) {
    if (selected.empty()) return;

    auto check_shapes = [&](const PublishedState& snap) {
        if (snap.feature_layers.size() != me.model.feature_layers.size())
            throw ShapeError("aggregate_features: peer " + std::to_string(snap.client_id) +
                             " has " + std::to_string(snap.feature_layers.size()) +
                             " feature layers, expected " +
                             std::to_string(me.model.feature_layers.size()));
        for (std::size_t l = 0; l < snap.feature_layers.size(); ++l) {
            const Layer& a = me.model.feature_layers[l];
            const Layer& b = snap.feature_layers[l];
            if (!a.weights.same_shape(b.weights) || a.bias.size() != b.bias.size())
                throw ShapeError("aggregate_features: peer " + std::to_string(snap.client_id) +
                                 " feature layer " + std::to_string(l) + " shape mismatch");
        }
    };
    for (const PublishedState* snap : selected) check_shapes(*snap);

    if (mode == AggregateMode::SumPeers) {
        for (std::size_t l = 0; l < me.model.feature_layers.size(); ++l) {
            Layer& mine = me.model.feature_layers[l];
            mine.weights.fill(0.0);
            std::fill(mine.bias.begin(), mine.bias.end(), 0.0);
            for (const PublishedState* snap : selected) {
                const Layer& peer = snap->feature_layers[l];
                for (std::size_t i = 0; i < mine.weights.data.size(); ++i)
                    mine.weights.data[i] += peer.weights.data[i];
                for (std::size_t i = 0; i < mine.bias.size(); ++i) mine.bias[i] += peer.bias[i];
            }
        }
        return;
    }

    // Mean over {me} plus peers, accumulated as deltas from my own values so
    // identical inputs aggregate to exactly the identity.
    const double inv = 1.0 / static_cast<double>(selected.size() + 1);
    for (std::size_t l = 0; l < me.model.feature_layers.size(); ++l) {
        Layer& mine = me.model.feature_layers[l];
        for (std::size_t i = 0; i < mine.weights.data.size(); ++i) {
            double delta = 0.0;
            for (const PublishedState* snap : selected)
                delta += snap->feature_layers[l].weights.data[i] - mine.weights.data[i];
            mine.weights.data[i] += delta * inv;
        }
        for (std::size_t i = 0; i < mine.bias.size(); ++i) {
            double delta = 0.0;
            for (const PublishedState* snap : selected)
                delta += snap->feature_layers[l].bias[i] - mine.bias[i];
            mine.bias[i] += delta * inv;
        }
    }
    for (const Layer& l : me.model.feature_layers)
        if (!l.weights.all_finite() || !all_finite(l.bias))
            throw SimulationError("aggregate_features: non-finite parameters for client " +
                                  std::to_string(me.id));
}

namespace {

std::vector<double> train_phase(ClientState& me, int epochs, int batch_size, Rng& rng,
                                FreezeMode freeze, UpdateScope scope, OptimizerState& opt,
                                const char* op) {
    if (epochs < 0) throw PreconditionError(std::string(op) + ": negative epoch count");
    if (batch_size < 1) throw PreconditionError(std::string(op) + ": batch_size must be >= 1");
    const Dataset& train = me.shard.train;
    if (train.size() == 0) throw PreconditionError(std::string(op) + ": empty training shard");

    std::vector<double> epoch_losses;
    std::vector<int> order(static_cast<std::size_t>(train.size()));
    for (int i = 0; i < train.size(); ++i) order[static_cast<std::size_t>(i)] = i;

    Gradients grads;
    for (int e = 0; e < epochs; ++e) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (int start = 0; start < train.size(); start += batch_size) {
            const int n = std::min(batch_size, train.size() - start);
            Batch batch;
            batch.inputs = DenseMatrix(n, train.dim());
            batch.labels.resize(static_cast<std::size_t>(n));
            for (int r = 0; r < n; ++r) {
                const int src = order[static_cast<std::size_t>(start + r)];
                for (int j = 0; j < train.dim(); ++j) batch.inputs(r, j) = train.inputs(src, j);
                batch.labels[static_cast<std::size_t>(r)] =
                    train.labels[static_cast<std::size_t>(src)];
            }
            const double loss = loss_and_grads(me.model, batch, freeze, grads);
            loss_sum += loss * n;
            sgd_step(me.model, grads, opt, scope);
        }
        epoch_losses.push_back(loss_sum / train.size());
    }
    return epoch_losses;
}

} // namespace

std::vector<double> train_feature_phase(ClientState& me, int epochs, int batch_size, Rng& rng) {
    return train_phase(me, epochs, batch_size, rng, FreezeMode::HeaderFrozen,
                       UpdateScope::FeatureOnly, me.opt_feature, "train_feature_phase");
}

std::vector<double> train_header_phase(ClientState& me, int epochs, int batch_size, Rng& rng) {
    return train_phase(me, epochs, batch_size, rng, FreezeMode::FeatureFrozen,
                       UpdateScope::HeaderOnly, me.opt_header, "train_header_phase");
}

PublishedState publish(ClientState& me, int round, const std::vector<int>& selected_now) {
    PublishedState snap;
    snap.client_id = me.id;
    snap.feature_layers = me.model.feature_layers;
    snap.header_layers = me.model.header_layers;
    snap.round_stamp = round;
    snap.best_local_loss = me.best_local_loss;

    for (int peer : selected_now) {
        auto it = me.recency.last_selected.find(peer);
        if (it == me.recency.last_selected.end())
            throw PreconditionError("publish: selected peer " + std::to_string(peer) +
                                    " is not tracked by client " + std::to_string(me.id));
        it->second = round;
    }
    return snap;
}

} // namespace pfeddst

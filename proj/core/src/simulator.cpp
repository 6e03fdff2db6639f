#include "pfeddst/simulator.hpp"

#include "pfeddst/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <set>
#include <string>
#include <thread>

namespace pfeddst {

double evaluate_accuracy(const SplitModel& model, const Dataset& test) {
    if (test.size() == 0) throw PreconditionError("evaluate_accuracy: empty test set");
    DenseMatrix logits = forward(model, test.inputs);
    int correct = 0;
    for (int i = 0; i < logits.rows; ++i) {
        int best = 0;
        for (int j = 1; j < logits.cols; ++j)
            if (logits(i, j) > logits(i, best)) best = j;
        if (best == test.labels[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / test.size();
}

double evaluate_client(const ClientState& me) {
    return evaluate_accuracy(me.model, me.shard.test);
}

int active_count(double ratio, int num_clients) {
    // Small slack keeps exact products like 0.1 * 20 from ceiling to 3.
    return static_cast<int>(std::ceil(ratio * num_clients - 1e-9));
}

Simulation::Simulation(SimConfig cfg, WarnFn warn) : cfg_(std::move(cfg)), warn_(std::move(warn)) {
    cfg_.validate();
    params_ = cfg_.scoring_params();

    Dataset data;
    if (cfg_.source == DataSource::Synthetic) {
        data = generate_synthetic(cfg_.num_classes, cfg_.input_dim, cfg_.per_class, cfg_.spread,
                                  cfg_.master_seed);
    } else {
        data = load_flatfile(cfg_.data_path);
        if (data.dim() != cfg_.input_dim)
            throw ConfigError("dataset dim " + std::to_string(data.dim()) +
                              " does not match model.input_dim " + std::to_string(cfg_.input_dim));
        if (data.num_classes != cfg_.num_classes)
            throw ConfigError("dataset classes " + std::to_string(data.num_classes) +
                              " does not match model.num_classes " +
                              std::to_string(cfg_.num_classes));
    }

    std::vector<ClientShard> shards = pathological_partition(
        data, cfg_.num_clients, cfg_.classes_per_client, cfg_.master_seed, warn_);

    const int m = cfg_.num_clients;

    // Peer visibility: everyone, or a seeded undirected graph with degree of
    // at least neighbors_visible.
    visible_.assign(static_cast<std::size_t>(m), {});
    if (cfg_.neighbors_visible == -1) {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                if (j != i) visible_[static_cast<std::size_t>(i)].push_back(j);
    } else {
        Rng gr(derive_seed(cfg_.master_seed, kSeedGraph));
        std::vector<std::set<int>> adj(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) {
            long attempts = 0;
            const long cap = 100L * m;
            while (static_cast<int>(adj[static_cast<std::size_t>(i)].size()) <
                       cfg_.neighbors_visible &&
                   attempts++ < cap) {
                int j = static_cast<int>(gr.bounded(static_cast<std::uint64_t>(m)));
                if (j == i) continue;
                adj[static_cast<std::size_t>(i)].insert(j);
                adj[static_cast<std::size_t>(j)].insert(i);
            }
            if (static_cast<int>(adj[static_cast<std::size_t>(i)].size()) <
                cfg_.neighbors_visible)
                warn_("client " + std::to_string(i) + " reached only " +
                      std::to_string(adj[static_cast<std::size_t>(i)].size()) + " neighbors");
        }
        for (int i = 0; i < m; ++i)
            visible_[static_cast<std::size_t>(i)].assign(adj[static_cast<std::size_t>(i)].begin(),
                                                         adj[static_cast<std::size_t>(i)].end());
    }

    clients_.reserve(static_cast<std::size_t>(m));
    data_fraction_.resize(static_cast<std::size_t>(m));
    eval_batches_.resize(static_cast<std::size_t>(m));
    registry_.resize(static_cast<std::size_t>(m));

    for (int i = 0; i < m; ++i) {
        ClientState c;
        c.id = i;
        c.rng_seed = derive_seed(cfg_.master_seed, kSeedInit, static_cast<std::uint64_t>(i));
        Rng init_rng(c.rng_seed);
        c.model = make_split_mlp(cfg_.input_dim, cfg_.hidden_dims, cfg_.num_classes, init_rng,
                                 cfg_.split_index);
        c.shard = std::move(shards[static_cast<std::size_t>(i)]);
        c.opt_feature = OptimizerState::for_scope(c.model, UpdateScope::FeatureOnly,
                                                  cfg_.lr_feature, cfg_.momentum,
                                                  cfg_.weight_decay);
        c.opt_header = OptimizerState::for_scope(c.model, UpdateScope::HeaderOnly, cfg_.lr_header,
                                                 cfg_.momentum, cfg_.weight_decay);
        for (int peer : visible_[static_cast<std::size_t>(i)])
            c.recency.last_selected[peer] = RecencyArray::kNever;
        data_fraction_[static_cast<std::size_t>(i)] = c.shard.data_fraction;

        // Fixed evaluation subsample of the training shard; used for loss
        // disparity probes and the skew baseline so scoring cost is bounded.
        const int n = c.shard.train.size();
        const int take = std::min(cfg_.eval_sample, n);
        std::vector<int> order(static_cast<std::size_t>(n));
        for (int r = 0; r < n; ++r) order[static_cast<std::size_t>(r)] = r;
        Rng eval_rng(derive_seed(cfg_.master_seed, kSeedEval, static_cast<std::uint64_t>(i)));
        eval_rng.shuffle(order);
        Batch eval;
        eval.inputs = DenseMatrix(take, c.shard.train.dim());
        eval.labels.resize(static_cast<std::size_t>(take));
        for (int r = 0; r < take; ++r) {
            const int src = order[static_cast<std::size_t>(r)];
            for (int j = 0; j < c.shard.train.dim(); ++j)
                eval.inputs(r, j) = c.shard.train.inputs(src, j);
            eval.labels[static_cast<std::size_t>(r)] =
                c.shard.train.labels[static_cast<std::size_t>(src)];
        }
        eval_batches_[static_cast<std::size_t>(i)] = std::move(eval);

        clients_.push_back(std::move(c));
    }

    // Initial publications so scoring has snapshots in round 1, plus the
    // initial best-loss baselines.
    for (int i = 0; i < m; ++i) {
        ClientState& c = clients_[static_cast<std::size_t>(i)];
        c.best_local_loss = eval_loss(i, c.model);
        registry_[static_cast<std::size_t>(i)] = publish(c, 0, {});
    }
}

const std::vector<int>& Simulation::visible_peers(int client) const {
    return visible_.at(static_cast<std::size_t>(client));
}

double Simulation::eval_loss(int client_id, const SplitModel& model) const {
    return mean_cross_entropy(model, eval_batches_[static_cast<std::size_t>(client_id)]);
}

double Simulation::snapshot_accuracy(const PublishedState& snap, int client) const {
    SplitModel probe = clients_[static_cast<std::size_t>(client)].model;
    probe.feature_layers = snap.feature_layers;
    probe.header_layers = snap.header_layers;
    return evaluate_accuracy(probe, clients_[static_cast<std::size_t>(client)].shard.test);
}

Simulation::ClientRoundResult Simulation::run_client_round(int client_id, int round) {
    const auto started = std::chrono::steady_clock::now();
    ClientState& me = clients_[static_cast<std::size_t>(client_id)];
    me.recency.current_iter = round;
    if (observer_) observer_->on_client_stage(round, me, ClientStage::RoundStart);

    const std::vector<int>& visible = visible_[static_cast<std::size_t>(client_id)];
    LossProbe probe = [this](int peer, const SplitModel& model) {
        return eval_loss(peer, model);
    };

    std::vector<PeerScore> scores;
    std::vector<int> selected;
    switch (cfg_.strategy) {
    case SelectionStrategy::Score: {
        scores = score_candidates(me, registry_, visible, params_, probe, warn_);
        if (scores.empty()) {
            if (warn_) warn_("client " + std::to_string(client_id) + ": no scoreable peers");
        } else {
            if (params_.top_k && *params_.top_k > static_cast<int>(scores.size()) && warn_)
                warn_("client " + std::to_string(client_id) + ": top_k " +
                      std::to_string(*params_.top_k) + " exceeds " +
                      std::to_string(scores.size()) + " candidates, selecting all");
            selected = select_peers(scores, params_);
        }
        break;
    }
    case SelectionStrategy::Random: {
        const int k = params_.top_k ? std::min<int>(*params_.top_k,
                                                    static_cast<int>(visible.size()))
                                    : static_cast<int>(visible.size());
        Rng sel(derive_seed(cfg_.master_seed, kSeedSelect,
                            static_cast<std::uint64_t>(client_id),
                            static_cast<std::uint64_t>(round)));
        std::vector<int> idx = sel.sample_without_replacement(static_cast<int>(visible.size()), k);
        for (int t : idx) selected.push_back(visible[static_cast<std::size_t>(t)]);
        std::sort(selected.begin(), selected.end());
        break;
    }
    case SelectionStrategy::PlainAverage:
        selected = visible;
        break;
    case SelectionStrategy::LocalOnly:
        break;
    }
    if (observer_) observer_->on_selection(round, client_id, selected);

    // Selection-skew diagnostic against the previous round's baselines.
    std::optional<double> rho;
    if (!selected.empty()) {
        SkewTerms terms;
        terms.own_loss = eval_loss(client_id, me.model);
        for (int peer : selected) {
            double loss_on_peer = 0.0;
            if (!scores.empty()) {
                auto it = std::find_if(scores.begin(), scores.end(),
                                       [peer](const PeerScore& s) { return s.peer_id == peer; });
                loss_on_peer = it->s_loss;
            } else {
                loss_on_peer = eval_loss(peer, me.model);
            }
            terms.selected_losses.push_back(loss_on_peer);
            terms.selected_fractions.push_back(data_fraction_[static_cast<std::size_t>(peer)]);
            terms.selected_baselines.push_back(
                registry_[static_cast<std::size_t>(peer)]->best_local_loss);
        }
        for (int peer : visible) {
            if (!registry_[static_cast<std::size_t>(peer)]) continue;
            terms.all_fractions.push_back(data_fraction_[static_cast<std::size_t>(peer)]);
            terms.all_baselines.push_back(
                registry_[static_cast<std::size_t>(peer)]->best_local_loss);
        }
        rho = selection_skew(terms);
    }

    if (cfg_.strategy != SelectionStrategy::LocalOnly) {
        std::vector<const PublishedState*> snaps;
        snaps.reserve(selected.size());
        for (int peer : selected) snaps.push_back(&*registry_[static_cast<std::size_t>(peer)]);
        aggregate_features(me, snaps, cfg_.aggregate);
        // Averaged parameters invalidate the feature momentum trajectory.
        me.opt_feature.reset();
    }
    if (observer_) observer_->on_client_stage(round, me, ClientStage::PostAggregate);

    Rng train_rng(derive_seed(cfg_.master_seed, kSeedTrain, static_cast<std::uint64_t>(client_id),
                              static_cast<std::uint64_t>(round)));
    std::vector<double> epoch_losses =
        train_feature_phase(me, cfg_.epochs_feature, cfg_.batch_size, train_rng);
    if (observer_) observer_->on_client_stage(round, me, ClientStage::PostFeaturePhase);

    std::vector<double> header_losses =
        train_header_phase(me, cfg_.epochs_header, cfg_.batch_size, train_rng);
    if (observer_) observer_->on_client_stage(round, me, ClientStage::PostHeaderPhase);
    epoch_losses.insert(epoch_losses.end(), header_losses.begin(), header_losses.end());

    const double post_loss = eval_loss(client_id, me.model);
    me.best_local_loss = std::min(me.best_local_loss, post_loss);

    ClientRoundResult result;
    result.snapshot = publish(me, round, selected);

    RoundMetrics& row = result.row;
    row.round = round;
    row.client_id = client_id;
    row.test_acc = evaluate_client(me);
    if (epoch_losses.empty()) {
        row.train_loss = post_loss;
    } else {
        double sum = 0.0;
        for (double l : epoch_losses) sum += l;
        row.train_loss = sum / static_cast<double>(epoch_losses.size());
    }
    row.selected = selected;
    if (cfg_.strategy == SelectionStrategy::Score && !selected.empty()) {
        double sum = 0.0;
        for (int peer : selected) {
            auto it = std::find_if(scores.begin(), scores.end(),
                                   [peer](const PeerScore& s) { return s.peer_id == peer; });
            sum += it->composite;
        }
        row.mean_score = sum / static_cast<double>(selected.size());
    }
    row.rho = rho;
    if (cfg_.record_wall_time)
        row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - started)
                          .count();
    return result;
}

void Simulation::run_round() {
    if (round_ >= cfg_.rounds)
        throw PreconditionError("run_round: all " + std::to_string(cfg_.rounds) +
                                " rounds already executed");
    const int t = ++round_;

    const int n_active = active_count(cfg_.clients_per_round, cfg_.num_clients);
    Rng sampler(derive_seed(cfg_.master_seed, kSeedSampling, static_cast<std::uint64_t>(t)));
    std::vector<int> active = sampler.sample_without_replacement(cfg_.num_clients, n_active);
    std::sort(active.begin(), active.end());
    last_active_ = active;

    std::vector<ClientRoundResult> results(active.size());

    auto process_range = [&](std::size_t begin, std::size_t end, std::exception_ptr& err) {
        try {
            for (std::size_t a = begin; a < end; ++a) {
                try {
                    results[a] = run_client_round(active[a], t);
                } catch (const Error& e) {
                    throw SimulationError("round " + std::to_string(t) + " client " +
                                          std::to_string(active[a]) + ": " + e.what());
                }
            }
        } catch (...) {
            err = std::current_exception();
        }
    };

    const int n_threads = std::min<int>(cfg_.threads, static_cast<int>(active.size()));
    if (n_threads <= 1) {
        std::exception_ptr err;
        process_range(0, active.size(), err);
        if (err) std::rethrow_exception(err);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));
        const std::size_t chunk = (active.size() + static_cast<std::size_t>(n_threads) - 1) /
                                  static_cast<std::size_t>(n_threads);
        for (int w = 0; w < n_threads; ++w) {
            const std::size_t begin = static_cast<std::size_t>(w) * chunk;
            const std::size_t end = std::min(active.size(), begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(process_range, begin, end,
                              std::ref(errors[static_cast<std::size_t>(w)]));
        }
        for (auto& th : pool) th.join();
        for (auto& err : errors)
            if (err) std::rethrow_exception(err);
    }

    // Round barrier: publications become visible and metrics land in client
    // order, independent of thread interleaving.
    for (std::size_t a = 0; a < active.size(); ++a) {
        registry_[static_cast<std::size_t>(active[a])] = std::move(results[a].snapshot);
        metrics_.push_back(std::move(results[a].row));
    }
}

void Simulation::run_all() {
    while (round_ < cfg_.rounds) run_round();
}

SimResult run_simulation(const SimConfig& cfg, WarnFn warn, RoundObserver* observer) {
    Simulation sim(cfg, std::move(warn));
    sim.set_observer(observer);
    sim.run_all();
    return SimResult{sim.metrics()};
}

std::optional<int> rounds_to_target(const std::vector<RoundMetrics>& rows,
                                    double target_accuracy) {
    int current = -1;
    double sum = 0.0;
    int count = 0;
    for (const RoundMetrics& r : rows) {
        if (r.round != current) {
            if (count > 0 && sum / count >= target_accuracy) return current;
            current = r.round;
            sum = 0.0;
            count = 0;
        }
        sum += r.test_acc;
        ++count;
    }
    if (count > 0 && sum / count >= target_accuracy) return current;
    return std::nullopt;
}

} // namespace pfeddst

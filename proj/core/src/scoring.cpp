#include "pfeddst/scoring.hpp"

#include "pfeddst/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pfeddst {

double ScoringParams::comm_cost(int me, int peer) const {
    if (comm_cost_matrix.size() == 0) return comm_cost_constant;
    if (me < 0 || me >= comm_cost_matrix.rows || peer < 0 || peer >= comm_cost_matrix.cols)
        throw PreconditionError("comm_cost: client pair (" + std::to_string(me) + ", " +
                                std::to_string(peer) + ") outside cost matrix");
    return comm_cost_matrix(me, peer);
}

double loss_disparity_score(const SplitModel& model, std::span<const Batch> peer_data) {
    if (peer_data.empty()) throw PreconditionError("loss_disparity_score: no peer data");
    double total = 0.0;
    long n = 0;
    for (const Batch& b : peer_data) {
        total += mean_cross_entropy(model, b) * b.size();
        n += b.size();
    }
    return std::fabs(total / static_cast<double>(n));
}

double header_distance_score(const Vector& h, const Vector& g) {
    if (h.empty() || h.size() != g.size())
        throw PreconditionError("header_distance_score: vectors must be nonempty and equal size");
    double dot = 0.0, nh = 0.0, ng = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        dot += h[i] * g[i];
        nh += h[i] * h[i];
        ng += g[i] * g[i];
    }
    if (nh == 0.0 || ng == 0.0)
        throw PreconditionError("header_distance_score: zero-norm header vector");
    const double cos = dot / (std::sqrt(nh) * std::sqrt(ng));
    return std::clamp(cos, -1.0, 1.0);
}

double recency_score(const RecencyArray& rec, int peer_id, double lambda) {
    if (lambda <= 0.0) throw PreconditionError("recency_score: lambda must be > 0");
    auto it = rec.last_selected.find(peer_id);
    if (it == rec.last_selected.end())
        throw PreconditionError("recency_score: peer " + std::to_string(peer_id) +
                                " not tracked by this recency array");
    if (it->second == RecencyArray::kNever) return 1.0;
    const int delta = rec.current_iter - it->second;
    if (delta < 0)
        throw PreconditionError("recency_score: peer " + std::to_string(peer_id) +
                                " was selected at iteration " + std::to_string(it->second) +
                                " which is after the current iteration " +
                                std::to_string(rec.current_iter));
    return 1.0 - std::exp(-lambda * delta);
}

double composite_score(double s_loss, double s_header, double s_recency,
                       const ScoringParams& params, int me, int peer_id) {
    return s_recency * (params.alpha * s_loss - s_header + params.comm_cost(me, peer_id));
}

std::vector<int> select_peers(const std::vector<PeerScore>& scores, const ScoringParams& params) {
    if (scores.empty()) throw PreconditionError("select_peers: no candidates");

    std::vector<int> chosen;
    if (params.top_k) {
        std::vector<const PeerScore*> order;
        order.reserve(scores.size());
        for (const PeerScore& s : scores) order.push_back(&s);
        std::sort(order.begin(), order.end(), [](const PeerScore* a, const PeerScore* b) {
            if (a->composite != b->composite) return a->composite > b->composite;
            return a->peer_id < b->peer_id;
        });
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(*params.top_k),
                                                    order.size());
        for (std::size_t i = 0; i < k; ++i) chosen.push_back(order[i]->peer_id);
    } else if (params.threshold) {
        for (const PeerScore& s : scores)
            if (s.composite > *params.threshold) chosen.push_back(s.peer_id);
    } else {
        throw PreconditionError("select_peers: neither top_k nor threshold configured");
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

std::optional<double> selection_skew(const SkewTerms& t) {
    const std::size_t ns = t.selected_losses.size();
    if (ns == 0) throw PreconditionError("selection_skew: empty selected set");
    if (t.selected_fractions.size() != ns || t.selected_baselines.size() != ns)
        throw PreconditionError("selection_skew: selected vectors must be parallel");
    if (t.all_fractions.size() != t.all_baselines.size() || t.all_fractions.empty())
        throw PreconditionError("selection_skew: all-peer vectors must be parallel and nonempty");

    double num = 0.0, num_w = 0.0;
    for (std::size_t i = 0; i < ns; ++i) {
        num += t.selected_fractions[i] * (t.selected_losses[i] - t.selected_baselines[i]);
        num_w += t.selected_fractions[i];
    }
    double base = 0.0, base_w = 0.0;
    for (std::size_t i = 0; i < t.all_fractions.size(); ++i) {
        base += t.all_fractions[i] * t.all_baselines[i];
        base_w += t.all_fractions[i];
    }
    if (num_w <= 0.0 || base_w <= 0.0)
        throw PreconditionError("selection_skew: nonpositive fraction weights");

    const double denom = t.own_loss - base / base_w;
    if (denom <= 0.0) return std::nullopt;
    return (num / num_w) / denom;
}

} // namespace pfeddst

#pragma once

#include "pfeddst/model.hpp"
#include "pfeddst/training.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace pfeddst {

/// One candidate peer's scores for a selection event.
struct PeerScore {
    int peer_id = 0;
    double s_loss = 0.0;       // loss disparity, >= 0
    double s_header = 0.0;     // header score as fed into the composite
    double s_recency = 0.0;    // in [0, 1]
    double composite = 0.0;    // s_recency * (alpha * s_loss - s_header + comm_cost)
};

/// How the header cosine enters the composite. Cosine feeds the raw
/// similarity in; CosineDistance feeds 1 - cosine, so similar peers score
/// higher overall.
enum class HeaderScoreMode { Cosine, CosineDistance };

struct ScoringParams {
    double alpha = 1.0;   // scaling of the loss score
    double lambda = 0.2;  // recency rate
    HeaderScoreMode header_mode = HeaderScoreMode::Cosine;
    std::optional<double> threshold; // select peers with composite > threshold
    std::optional<int> top_k;        // or the k best (wins when both are set)

    /// Communication cost for scoring peer `peer` from client `me`.
    /// Constant by default; an explicit per-pair matrix overrides it.
    double comm_cost_constant = 1.0;
    DenseMatrix comm_cost_matrix; // empty, or num_clients x num_clients

    double comm_cost(int me, int peer) const;
};

/// Rounds-since-last-selected bookkeeping for one client. kNever marks peers
/// this client has not selected yet.
struct RecencyArray {
    static constexpr int kNever = -1;
    std::map<int, int> last_selected;
    int current_iter = 0;
};

/// Mean cross-entropy of `model` on the peer's evaluation batches (the norm
/// of the scalar expected loss, which is the loss itself since it is
/// nonnegative). The batches are weighted by example count.
double loss_disparity_score(const SplitModel& model, std::span<const Batch> peer_data);

/// Cosine similarity of two flattened header parameter vectors.
double header_distance_score(const Vector& h, const Vector& g);

/// 1 - exp(-lambda * (current_iter - last_selected[peer])). A peer never
/// selected scores the maximum 1.
double recency_score(const RecencyArray& rec, int peer_id, double lambda);

/// composite = s_recency * (alpha * s_loss - s_header + comm_cost(me, peer)).
double composite_score(double s_loss, double s_header, double s_recency,
                       const ScoringParams& params, int me, int peer_id);

/// Selected peer ids, ascending. Threshold mode returns every peer with
/// composite strictly above the threshold; top-k mode the k largest
/// composites with ties broken toward the lower peer id. If top_k exceeds
/// the candidate count all candidates are returned (callers may warn).
std::vector<int> select_peers(const std::vector<PeerScore>& scores, const ScoringParams& params);

/// Inputs for the selection-skew diagnostic. Vectors `selected_*` are
/// parallel over the selected peers; `all_*` parallel over every peer
/// visible to the client.
struct SkewTerms {
    double own_loss = 0.0;                  // L_i(w_i)
    std::vector<double> selected_losses;    // L_j(w_i)
    std::vector<double> selected_fractions; // n_j
    std::vector<double> selected_baselines; // L_j(w_j*)
    std::vector<double> all_fractions;
    std::vector<double> all_baselines;
};

/// Selection skew rho. With uniform fractions, identical losses and
/// selected == all peers it equals 1. Returns nullopt when the denominator
/// is zero or negative (the undefined sentinel recorded in metrics).
std::optional<double> selection_skew(const SkewTerms& terms);

} // namespace pfeddst

#pragma once

#include "pfeddst/dataset.hpp"
#include "pfeddst/error.hpp"

#include <set>
#include <vector>

namespace pfeddst {

/// One client's slice of the data. Train and test labels are confined to
/// class_subset; data_fraction is this shard's share of all training rows.
struct ClientShard {
    int client_id = 0;
    Dataset train;
    Dataset test;
    std::set<int> class_subset;
    double data_fraction = 0.0;
};

/// Pathological non-IID partition: every client receives classes_per_client
/// distinct classes, each class's examples are split evenly among the clients
/// holding it, and each per-class chunk is split 80/20 into train/test.
///
/// Class slots are dealt from consecutive seeded permutations of the class
/// set, so whenever num_clients * classes_per_client >= num_classes every
/// class is held by at least one client. When that product is too small to
/// cover all classes a warning is emitted and uncovered classes are dropped.
std::vector<ClientShard> pathological_partition(const Dataset& data, int num_clients,
                                                int classes_per_client, std::uint64_t seed,
                                                const WarnFn& warn = {});

} // namespace pfeddst

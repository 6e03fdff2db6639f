#include "pfeddst/partition.hpp"

#include <algorithm>
#include <string>

namespace pfeddst {

namespace {

Dataset gather_rows(const Dataset& src, const std::vector<int>& rows) {
    Dataset out;
    out.num_classes = src.num_classes;
    out.inputs = DenseMatrix(static_cast<int>(rows.size()), src.dim());
    out.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int r = rows[i];
        for (int j = 0; j < src.dim(); ++j) out.inputs(static_cast<int>(i), j) = src.inputs(r, j);
        out.labels[i] = src.labels[static_cast<std::size_t>(r)];
    }
    return out;
}

} // namespace

std::vector<ClientShard> pathological_partition(const Dataset& data, int num_clients,
                                                int classes_per_client, std::uint64_t seed,
                                                const WarnFn& warn) {
    const int k = data.num_classes;
    if (num_clients < 1) throw PreconditionError("pathological_partition: num_clients must be >= 1");
    if (classes_per_client < 1 || classes_per_client > k)
        throw PreconditionError("pathological_partition: classes_per_client must be in [1, " +
                                std::to_string(k) + "]");

    const int total_slots = num_clients * classes_per_client;
    if (total_slots < k && warn)
        warn("pathological_partition: " + std::to_string(num_clients) + " clients x " +
             std::to_string(classes_per_client) + " classes cannot cover all " + std::to_string(k) +
             " classes; some classes will be unassigned");

    Rng rng(derive_seed(seed, kSeedPartition));

    // Deal class slots from consecutive seeded permutations of the class set
    // (one spare block at the end so duplicate repair always finds a swap).
    std::vector<int> slots;
    while (static_cast<int>(slots.size()) < total_slots + k) {
        std::vector<int> block(static_cast<std::size_t>(k));
        for (int c = 0; c < k; ++c) block[static_cast<std::size_t>(c)] = c;
        rng.shuffle(block);
        slots.insert(slots.end(), block.begin(), block.end());
    }

    std::vector<ClientShard> shards(static_cast<std::size_t>(num_clients));
    for (int i = 0; i < num_clients; ++i) {
        ClientShard& s = shards[static_cast<std::size_t>(i)];
        s.client_id = i;
        for (int t = 0; t < classes_per_client; ++t) {
            std::size_t p = static_cast<std::size_t>(i * classes_per_client + t);
            if (s.class_subset.count(slots[p])) {
                // Duplicate across a permutation boundary: swap in the next
                // class this client does not hold yet.
                for (std::size_t q = p + 1; q < slots.size(); ++q) {
                    if (!s.class_subset.count(slots[q])) {
                        std::swap(slots[p], slots[q]);
                        break;
                    }
                }
            }
            s.class_subset.insert(slots[p]);
        }
    }

    // Rows per class, then a seeded shuffle so chunks are random.
    std::vector<std::vector<int>> class_rows(static_cast<std::size_t>(k));
    for (int r = 0; r < data.size(); ++r)
        class_rows[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(r)])].push_back(r);
    for (auto& rows : class_rows) rng.shuffle(rows);

    std::vector<std::vector<int>> train_rows(static_cast<std::size_t>(num_clients));
    std::vector<std::vector<int>> test_rows(static_cast<std::size_t>(num_clients));

    for (int c = 0; c < k; ++c) {
        std::vector<int> holders;
        for (int i = 0; i < num_clients; ++i)
            if (shards[static_cast<std::size_t>(i)].class_subset.count(c)) holders.push_back(i);
        if (holders.empty()) continue; // uncovered class (warned above)

        const auto& rows = class_rows[static_cast<std::size_t>(c)];
        const std::size_t m = holders.size();
        const std::size_t base = rows.size() / m;
        const std::size_t extra = rows.size() % m;
        std::size_t pos = 0;
        for (std::size_t h = 0; h < m; ++h) {
            const std::size_t chunk = base + (h < extra ? 1 : 0);
            if (chunk == 0)
                throw Error("pathological_partition: class " + std::to_string(c) +
                            " has no examples left for client " + std::to_string(holders[h]));
            const std::size_t n_train = std::max<std::size_t>(1, chunk * 4 / 5);
            for (std::size_t t = 0; t < chunk; ++t, ++pos) {
                if (t < n_train)
                    train_rows[static_cast<std::size_t>(holders[h])].push_back(rows[pos]);
                else
                    test_rows[static_cast<std::size_t>(holders[h])].push_back(rows[pos]);
            }
        }
    }

    std::size_t total_train = 0;
    for (const auto& rows : train_rows) total_train += rows.size();

    for (int i = 0; i < num_clients; ++i) {
        ClientShard& s = shards[static_cast<std::size_t>(i)];
        s.train = gather_rows(data, train_rows[static_cast<std::size_t>(i)]);
        s.test = gather_rows(data, test_rows[static_cast<std::size_t>(i)]);
        s.data_fraction =
            static_cast<double>(train_rows[static_cast<std::size_t>(i)].size()) /
            static_cast<double>(total_train);
    }
    return shards;
}

} // namespace pfeddst

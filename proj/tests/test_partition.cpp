#include "pfeddst/partition.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>

using namespace pfeddst;

namespace {

/// Multiset of (label, row values) across train and test of all shards.
std::multiset<std::pair<int, std::vector<double>>> example_multiset(
    const std::vector<ClientShard>& shards) {
    std::multiset<std::pair<int, std::vector<double>>> out;
    auto add = [&](const Dataset& d) {
        for (int i = 0; i < d.size(); ++i) {
            std::vector<double> row(static_cast<std::size_t>(d.dim()));
            for (int j = 0; j < d.dim(); ++j) row[static_cast<std::size_t>(j)] = d.inputs(i, j);
            out.emplace(d.labels[static_cast<std::size_t>(i)], std::move(row));
        }
    };
    for (const ClientShard& s : shards) {
        add(s.train);
        add(s.test);
    }
    return out;
}

std::multiset<std::pair<int, std::vector<double>>> example_multiset(const Dataset& d) {
    std::multiset<std::pair<int, std::vector<double>>> out;
    for (int i = 0; i < d.size(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(d.dim()));
        for (int j = 0; j < d.dim(); ++j) row[static_cast<std::size_t>(j)] = d.inputs(i, j);
        out.emplace(d.labels[static_cast<std::size_t>(i)], std::move(row));
    }
    return out;
}

} // namespace

TEST_CASE("every shard holds exactly classes_per_client classes") {
    Dataset d = generate_synthetic(10, 4, 100, 0.5, 42);
    auto shards = pathological_partition(d, 100, 2, 42);
    REQUIRE(shards.size() == 100);
    for (const ClientShard& s : shards) {
        CHECK(s.class_subset.size() == 2);
        for (int y : s.train.labels) CHECK(s.class_subset.count(y) == 1);
        for (int y : s.test.labels) CHECK(s.class_subset.count(y) == 1);
    }
}

TEST_CASE("single client with all classes receives the whole dataset") {
    Dataset d = generate_synthetic(4, 3, 12, 0.5, 5);
    auto shards = pathological_partition(d, 1, 4, 5);
    REQUIRE(shards.size() == 1);
    CHECK(shards[0].train.size() + shards[0].test.size() == d.size());
    CHECK(example_multiset(shards) == example_multiset(d));
    CHECK(shards[0].data_fraction == doctest::Approx(1.0));
}

TEST_CASE("partition is exact and fractions sum to one") {
    Dataset d = generate_synthetic(10, 4, 60, 0.5, 9);
    auto shards = pathological_partition(d, 20, 2, 9);

    CHECK(example_multiset(shards) == example_multiset(d));

    double frac = 0.0;
    std::size_t total_train = 0;
    for (const ClientShard& s : shards) {
        frac += s.data_fraction;
        total_train += static_cast<std::size_t>(s.train.size());
        CHECK(s.train.size() >= 1);
        CHECK(s.test.size() >= 1);
    }
    CHECK(frac == doctest::Approx(1.0).epsilon(1e-12));
    for (const ClientShard& s : shards)
        CHECK(s.data_fraction ==
              doctest::Approx(static_cast<double>(s.train.size()) /
                              static_cast<double>(total_train))
                  .epsilon(1e-12));
}

TEST_CASE("every class covered when slots suffice") {
    Dataset d = generate_synthetic(10, 3, 20, 0.5, 17);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        auto shards = pathological_partition(d, 5, 2, seed);
        std::set<int> covered;
        for (const ClientShard& s : shards) covered.insert(s.class_subset.begin(), s.class_subset.end());
        CHECK(covered.size() == 10);
    }
}

TEST_CASE("impossible coverage warns instead of failing") {
    Dataset d = generate_synthetic(10, 3, 20, 0.5, 4);
    std::vector<std::string> warnings;
    auto shards = pathological_partition(d, 2, 2, 4,
                                         [&](const std::string& w) { warnings.push_back(w); });
    CHECK(shards.size() == 2);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("cannot cover") != std::string::npos);
}

TEST_CASE("deterministic under seed") {
    Dataset d = generate_synthetic(6, 3, 30, 0.5, 8);
    auto a = pathological_partition(d, 6, 2, 8);
    auto b = pathological_partition(d, 6, 2, 8);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].class_subset == b[i].class_subset);
        CHECK(a[i].train.inputs.data == b[i].train.inputs.data);
        CHECK(a[i].test.labels == b[i].test.labels);
    }
}

TEST_CASE("empty class shard is an error") {
    // 3 examples of one class split across 4 holders cannot work.
    Dataset d;
    d.num_classes = 1;
    d.inputs = DenseMatrix(3, 2, 0.5);
    d.labels = {0, 0, 0};
    CHECK_THROWS_AS(pathological_partition(d, 4, 1, 1), Error);
}

TEST_CASE("classes_per_client out of range is rejected") {
    Dataset d = generate_synthetic(4, 3, 10, 0.5, 2);
    CHECK_THROWS_AS(pathological_partition(d, 3, 5, 2), PreconditionError);
    CHECK_THROWS_AS(pathological_partition(d, 3, 0, 2), PreconditionError);
}

#include "pfeddst/config.hpp"
#include "pfeddst/error.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace pfeddst;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << body;
    return path;
}

const char* kMinimal = R"(
[model]
input_dim = 8
hidden_dims = 16
num_classes = 5
)";

} // namespace

TEST_CASE("minimal config parses with desk-scale defaults") {
    auto path = write_temp("pfeddst_min.ini", kMinimal);
    SimConfig c = parse_config(path);
    std::filesystem::remove(path);

    CHECK(c.input_dim == 8);
    CHECK(c.hidden_dims == std::vector<int>{16});
    CHECK(c.num_classes == 5);
    CHECK(c.num_clients == 20);
    CHECK(c.rounds == 60);
    CHECK(c.top_k == 4);
    CHECK(c.epochs_feature == 5);
    CHECK(c.epochs_header == 1);
    CHECK(c.batch_size == 32);
    CHECK(c.lr_feature == 0.1);
    CHECK(c.momentum == 0.9);
    CHECK(c.weight_decay == 0.005);
    CHECK(c.alpha == 1.0);
    CHECK(c.lambda == 0.2);
    CHECK(c.comm_cost_constant == 1.0);
    CHECK(c.clients_per_round == 1.0);
    CHECK(c.strategy == SelectionStrategy::Score);
    CHECK(c.header_mode == HeaderScoreMode::Cosine);
    CHECK(c.neighbors_visible == -1);
}

TEST_CASE("missing required keys are named") {
    auto path = write_temp("pfeddst_missing.ini", "[model]\ninput_dim = 4\nnum_classes = 3\n");
    CHECK_THROWS_WITH_AS(parse_config(path), doctest::Contains("hidden_dims"), ConfigError);
    std::filesystem::remove(path);
}

TEST_CASE("unknown keys and sections are hard errors") {
    auto path = write_temp("pfeddst_unknown.ini",
                           std::string(kMinimal) + "[train]\nlearning_rate = 0.1\n");
    CHECK_THROWS_WITH_AS(parse_config(path), doctest::Contains("learning_rate"), ConfigError);
    std::filesystem::remove(path);

    auto path2 = write_temp("pfeddst_unknown2.ini", std::string(kMinimal) + "[training]\n");
    CHECK_THROWS_WITH_AS(parse_config(path2), doctest::Contains("training"), ConfigError);
    std::filesystem::remove(path2);
}

TEST_CASE("validation rejects out-of-range values") {
    auto bad = [](const std::string& extra) {
        auto path = write_temp("pfeddst_bad.ini", std::string(kMinimal) + extra);
        CHECK_THROWS_AS(parse_config(path), ConfigError);
        std::filesystem::remove(path);
    };
    bad("[sim]\nnum_clients = 1\n");
    bad("[sim]\nclients_per_round = 0\n");
    bad("[sim]\nclients_per_round = 1.5\n");
    bad("[train]\nmomentum = 1.0\n");
    bad("[scoring]\nalpha = 0\n");
    bad("[scoring]\nlambda = -1\n");
    bad("[data]\nclasses_per_client = 9\n");
    bad("[sim]\nneighbors_visible = 25\n");
    bad("[sim]\nstrategy = gossip\n");
}

TEST_CASE("top_k wins when both selectors are configured") {
    auto path = write_temp("pfeddst_both.ini",
                           std::string(kMinimal) + "[scoring]\ntop_k = 3\nthreshold = 0.5\n");
    SimConfig c = parse_config(path);
    std::filesystem::remove(path);
    CHECK(c.top_k == 3);
    CHECK(c.top_k_wins);
    ScoringParams p = c.scoring_params();
    CHECK(p.top_k == 3);
    CHECK_FALSE(p.threshold.has_value());
}

TEST_CASE("echo round-trips to an equivalent config") {
    auto path = write_temp("pfeddst_echo_src.ini",
                           std::string(kMinimal) +
                               "[scoring]\nalpha = 2.5\nlambda = 0.35\n"
                               "[sim]\nnum_clients = 7\nrounds = 9\nmaster_seed = 99\n");
    SimConfig c = parse_config(path);
    std::filesystem::remove(path);

    const auto echo_path = std::filesystem::temp_directory_path() / "pfeddst_echo.ini";
    write_config_echo(c, echo_path);
    SimConfig back = parse_config(echo_path);
    std::filesystem::remove(echo_path);

    CHECK(back.alpha == c.alpha);
    CHECK(back.lambda == c.lambda);
    CHECK(back.num_clients == 7);
    CHECK(back.rounds == 9);
    CHECK(back.master_seed == 99);
    CHECK(back.top_k == c.top_k);
    CHECK(back.spread == c.spread);
    CHECK(back.strategy == c.strategy);
}

TEST_CASE("per-pair comm cost matrix loads from file") {
    const auto costs = std::filesystem::temp_directory_path() / "pfeddst_costs.csv";
    {
        std::ofstream out(costs);
        for (int i = 0; i < 4; ++i)
            out << "1.0, 2.0, 3.0, 4.0\n";
    }
    auto path = write_temp("pfeddst_costcfg.ini",
                           std::string(kMinimal) +
                               "[scoring]\ncomm_cost_file = " + costs.string() +
                               "\n[sim]\nnum_clients = 4\n");
    SimConfig c = parse_config(path);
    ScoringParams p = c.scoring_params();
    CHECK(p.comm_cost(0, 2) == 3.0);
    CHECK(p.comm_cost(3, 0) == 1.0);
    std::filesystem::remove(path);

    // Wrong row count is a parse error.
    {
        std::ofstream out(costs, std::ios::trunc);
        out << "1.0, 2.0, 3.0, 4.0\n";
    }
    auto path2 = write_temp("pfeddst_costcfg2.ini",
                            std::string(kMinimal) +
                                "[scoring]\ncomm_cost_file = " + costs.string() +
                                "\n[sim]\nnum_clients = 4\n");
    SimConfig c2 = parse_config(path2);
    CHECK_THROWS_AS(c2.scoring_params(), ParseError);
    std::filesystem::remove(path2);
    std::filesystem::remove(costs);
}

TEST_CASE("strategy names round-trip") {
    for (SelectionStrategy s : {SelectionStrategy::Score, SelectionStrategy::Random,
                                SelectionStrategy::LocalOnly, SelectionStrategy::PlainAverage})
        CHECK(strategy_from_string(to_string(s)) == s);
    CHECK_THROWS_AS(strategy_from_string("bogus"), ConfigError);
}

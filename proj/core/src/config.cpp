#include "pfeddst/config.hpp"

#include "pfeddst/error.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace pfeddst {

std::string to_string(SelectionStrategy s) {
    switch (s) {
    case SelectionStrategy::Score: return "score";
    case SelectionStrategy::Random: return "random";
    case SelectionStrategy::LocalOnly: return "local_only";
    case SelectionStrategy::PlainAverage: return "plain_average";
    }
    return "score";
}

SelectionStrategy strategy_from_string(const std::string& s) {
    if (s == "score") return SelectionStrategy::Score;
    if (s == "random") return SelectionStrategy::Random;
    if (s == "local_only") return SelectionStrategy::LocalOnly;
    if (s == "plain_average") return SelectionStrategy::PlainAverage;
    throw ConfigError("unknown strategy '" + s +
                      "' (expected score, random, local_only or plain_average)");
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct KeyValue {
    std::string value;
    bool used = false;
};

/// section -> key -> value, with usage tracking for unknown-key detection.
struct ParsedFile {
    std::map<std::string, std::map<std::string, KeyValue>> sections;
    std::string path;

    std::optional<std::string> get(const std::string& section, const std::string& key) {
        auto s = sections.find(section);
        if (s == sections.end()) return std::nullopt;
        auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        k->second.used = true;
        return k->second.value;
    }

    void fail_on_unused(const std::set<std::string>& known_sections) const {
        for (const auto& [section, keys] : sections) {
            if (!known_sections.count(section))
                throw ConfigError(path + ": unknown section [" + section + "]");
            for (const auto& [key, kv] : keys)
                if (!kv.used)
                    throw ConfigError(path + ": unknown key '" + key + "' in section [" +
                                      section + "]");
        }
    }
};

ParsedFile parse_ini(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());

    ParsedFile out;
    out.path = path.string();
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                                  ": malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            out.sections[section]; // a section may be empty
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected key = value, got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": empty key");
        if (out.sections[section].count(key))
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": duplicate key '" + key + "'");
        out.sections[section][key] = {value, false};
    }
    return out;
}

long to_long(const std::string& v, const std::string& what) {
    long x = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError(what + ": expected integer, got '" + v + "'");
    return x;
}

double to_double(const std::string& v, const std::string& what) {
    double x = 0.0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError(what + ": expected number, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& v, const std::string& what) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(what + ": expected true or false, got '" + v + "'");
}

std::vector<int> to_int_list(const std::string& v, const std::string& what) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(static_cast<int>(to_long(item, what)));
    }
    return out;
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

DenseMatrix load_cost_matrix(const std::filesystem::path& path, int num_clients) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open comm_cost_file: " + path.string());
    DenseMatrix m(num_clients, num_clients);
    std::string line;
    int row = 0;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (row >= num_clients)
            throw ParseError(path.string() + ": more than " + std::to_string(num_clients) +
                             " rows");
        std::stringstream ss(line);
        std::string cell;
        int col = 0;
        while (std::getline(ss, cell, ',')) {
            if (col >= num_clients)
                throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                 ": more than " + std::to_string(num_clients) + " columns");
            m(row, col) = to_double(trim(cell), "comm_cost_file entry");
            ++col;
        }
        if (col != num_clients)
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(num_clients) + " columns, got " + std::to_string(col));
        ++row;
    }
    if (row != num_clients)
        throw ParseError(path.string() + ": expected " + std::to_string(num_clients) +
                         " rows, got " + std::to_string(row));
    return m;
}

} // namespace

ScoringParams SimConfig::scoring_params() const {
    ScoringParams p;
    p.alpha = alpha;
    p.lambda = lambda;
    p.header_mode = header_mode;
    p.top_k = top_k;
    p.threshold = top_k ? std::nullopt : threshold;
    p.comm_cost_constant = comm_cost_constant;
    if (!comm_cost_file.empty()) p.comm_cost_matrix = load_cost_matrix(comm_cost_file, num_clients);
    return p;
}

void SimConfig::validate() const {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(input_dim >= 1, "model.input_dim is required and must be >= 1");
    require(num_classes >= 2, "model.num_classes is required and must be >= 2");
    require(!hidden_dims.empty() || split_index <= 0,
            "model.split_index needs at least one hidden layer");
    for (int h : hidden_dims) require(h >= 1, "model.hidden_dims entries must be >= 1");
    require(split_index >= -1 && split_index <= static_cast<int>(hidden_dims.size()),
            "model.split_index must be in [0, number of layers - 1]");

    require(per_class >= 1, "data.per_class must be >= 1");
    require(spread > 0.0, "data.spread must be > 0");
    require(classes_per_client >= 1 && classes_per_client <= num_classes,
            "data.classes_per_client must be in [1, num_classes]");
    require(source == DataSource::Synthetic || !data_path.empty(),
            "data.path is required when data.source = flatfile");

    require(alpha > 0.0, "scoring.alpha must be > 0");
    require(lambda > 0.0, "scoring.lambda must be > 0");
    require(!top_k || *top_k >= 1, "scoring.top_k must be >= 1");
    require(eval_sample >= 1, "scoring.eval_sample must be >= 1");

    require(epochs_feature >= 0, "train.epochs_feature must be >= 0");
    require(epochs_header >= 0, "train.epochs_header must be >= 0");
    require(batch_size >= 1, "train.batch_size must be >= 1");
    require(lr_feature > 0.0 && lr_header > 0.0, "train learning rates must be > 0");
    require(momentum >= 0.0 && momentum < 1.0, "train.momentum must be in [0, 1)");
    require(weight_decay >= 0.0, "train.weight_decay must be >= 0");

    require(num_clients >= 2, "sim.num_clients must be >= 2");
    require(rounds >= 1, "sim.rounds must be >= 1");
    require(clients_per_round > 0.0 && clients_per_round <= 1.0,
            "sim.clients_per_round must be in (0, 1]");
    require(neighbors_visible == -1 ||
                (neighbors_visible >= 1 && neighbors_visible <= num_clients - 1),
            "sim.neighbors_visible must be 'all' or in [1, num_clients - 1]");
    require(threads >= 1, "sim.threads must be >= 1");
}

SimConfig parse_config(const std::filesystem::path& path) {
    ParsedFile f = parse_ini(path);
    SimConfig c;

    auto missing = [&](const char* key) {
        throw ConfigError(path.string() + ": missing required key '" + key + "'");
    };

    if (auto v = f.get("model", "input_dim")) c.input_dim = static_cast<int>(to_long(*v, "model.input_dim"));
    else missing("model.input_dim");
    if (auto v = f.get("model", "hidden_dims")) c.hidden_dims = to_int_list(*v, "model.hidden_dims");
    else missing("model.hidden_dims");
    if (auto v = f.get("model", "num_classes")) c.num_classes = static_cast<int>(to_long(*v, "model.num_classes"));
    else missing("model.num_classes");
    if (auto v = f.get("model", "split_index")) c.split_index = static_cast<int>(to_long(*v, "model.split_index"));

    if (auto v = f.get("data", "source")) {
        if (*v == "synthetic") c.source = DataSource::Synthetic;
        else if (*v == "flatfile") c.source = DataSource::Flatfile;
        else throw ConfigError("data.source: expected synthetic or flatfile, got '" + *v + "'");
    }
    if (auto v = f.get("data", "per_class")) c.per_class = static_cast<int>(to_long(*v, "data.per_class"));
    if (auto v = f.get("data", "spread")) c.spread = to_double(*v, "data.spread");
    if (auto v = f.get("data", "classes_per_client"))
        c.classes_per_client = static_cast<int>(to_long(*v, "data.classes_per_client"));
    if (auto v = f.get("data", "path")) c.data_path = *v;

    if (auto v = f.get("scoring", "alpha")) c.alpha = to_double(*v, "scoring.alpha");
    if (auto v = f.get("scoring", "lambda")) c.lambda = to_double(*v, "scoring.lambda");
    if (auto v = f.get("scoring", "header_score")) {
        if (*v == "cosine") c.header_mode = HeaderScoreMode::Cosine;
        else if (*v == "cosine_distance") c.header_mode = HeaderScoreMode::CosineDistance;
        else throw ConfigError("scoring.header_score: expected cosine or cosine_distance, got '" +
                               *v + "'");
    }
    std::optional<std::string> raw_top_k = f.get("scoring", "top_k");
    std::optional<std::string> raw_threshold = f.get("scoring", "threshold");
    if (raw_top_k) c.top_k = static_cast<int>(to_long(*raw_top_k, "scoring.top_k"));
    if (raw_threshold) c.threshold = to_double(*raw_threshold, "scoring.threshold");
    if (raw_top_k && raw_threshold) c.top_k_wins = true;
    if (!raw_top_k && !raw_threshold) c.top_k = 4; // desk-scale default selector
    if (auto v = f.get("scoring", "comm_cost"))
        c.comm_cost_constant = to_double(*v, "scoring.comm_cost");
    if (auto v = f.get("scoring", "comm_cost_file")) c.comm_cost_file = *v;
    if (auto v = f.get("scoring", "eval_sample"))
        c.eval_sample = static_cast<int>(to_long(*v, "scoring.eval_sample"));

    if (auto v = f.get("train", "epochs_feature"))
        c.epochs_feature = static_cast<int>(to_long(*v, "train.epochs_feature"));
    if (auto v = f.get("train", "epochs_header"))
        c.epochs_header = static_cast<int>(to_long(*v, "train.epochs_header"));
    if (auto v = f.get("train", "batch_size"))
        c.batch_size = static_cast<int>(to_long(*v, "train.batch_size"));
    if (auto v = f.get("train", "lr_feature")) c.lr_feature = to_double(*v, "train.lr_feature");
    if (auto v = f.get("train", "lr_header")) c.lr_header = to_double(*v, "train.lr_header");
    if (auto v = f.get("train", "momentum")) c.momentum = to_double(*v, "train.momentum");
    if (auto v = f.get("train", "weight_decay"))
        c.weight_decay = to_double(*v, "train.weight_decay");

    if (auto v = f.get("sim", "num_clients"))
        c.num_clients = static_cast<int>(to_long(*v, "sim.num_clients"));
    if (auto v = f.get("sim", "rounds")) c.rounds = static_cast<int>(to_long(*v, "sim.rounds"));
    if (auto v = f.get("sim", "clients_per_round"))
        c.clients_per_round = to_double(*v, "sim.clients_per_round");
    if (auto v = f.get("sim", "neighbors_visible")) {
        if (*v == "all") c.neighbors_visible = -1;
        else c.neighbors_visible = static_cast<int>(to_long(*v, "sim.neighbors_visible"));
    }
    if (auto v = f.get("sim", "strategy")) c.strategy = strategy_from_string(*v);
    if (auto v = f.get("sim", "aggregate")) {
        if (*v == "mean_with_self") c.aggregate = AggregateMode::MeanWithSelf;
        else if (*v == "sum_peers") c.aggregate = AggregateMode::SumPeers;
        else throw ConfigError("sim.aggregate: expected mean_with_self or sum_peers, got '" + *v +
                               "'");
    }
    if (auto v = f.get("sim", "master_seed")) {
        unsigned long long seed = 0;
        auto res = std::from_chars(v->data(), v->data() + v->size(), seed);
        if (res.ec != std::errc() || res.ptr != v->data() + v->size())
            throw ConfigError("sim.master_seed: expected unsigned integer, got '" + *v + "'");
        c.master_seed = seed;
    }
    if (auto v = f.get("sim", "threads")) c.threads = static_cast<int>(to_long(*v, "sim.threads"));
    if (auto v = f.get("sim", "record_wall_time"))
        c.record_wall_time = to_bool(*v, "sim.record_wall_time");

    f.fail_on_unused({"model", "data", "scoring", "train", "sim"});
    c.validate();
    return c;
}

void write_config_echo(const SimConfig& c, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write config echo: " + path.string());

    out << "# effective configuration (machine written; reruns reproduce the metrics)\n";
    out << "[model]\n";
    out << "input_dim = " << c.input_dim << "\n";
    out << "hidden_dims = ";
    for (std::size_t i = 0; i < c.hidden_dims.size(); ++i)
        out << (i ? "," : "") << c.hidden_dims[i];
    out << "\n";
    out << "num_classes = " << c.num_classes << "\n";
    out << "split_index = " << c.split_index << "\n";

    out << "\n[data]\n";
    out << "source = " << (c.source == DataSource::Synthetic ? "synthetic" : "flatfile") << "\n";
    if (!c.data_path.empty()) out << "path = " << c.data_path << "\n";
    out << "per_class = " << c.per_class << "\n";
    out << "spread = " << format_double(c.spread) << "\n";
    out << "classes_per_client = " << c.classes_per_client << "\n";

    out << "\n[scoring]\n";
    out << "alpha = " << format_double(c.alpha) << "\n";
    out << "lambda = " << format_double(c.lambda) << "\n";
    out << "header_score = "
        << (c.header_mode == HeaderScoreMode::Cosine ? "cosine" : "cosine_distance") << "\n";
    if (c.top_k_wins)
        out << "# both top_k and threshold were configured; top_k governs selection\n";
    if (c.top_k) out << "top_k = " << *c.top_k << "\n";
    if (c.threshold && !c.top_k) out << "threshold = " << format_double(*c.threshold) << "\n";
    out << "comm_cost = " << format_double(c.comm_cost_constant) << "\n";
    if (!c.comm_cost_file.empty()) out << "comm_cost_file = " << c.comm_cost_file << "\n";
    out << "eval_sample = " << c.eval_sample << "\n";

    out << "\n[train]\n";
    out << "epochs_feature = " << c.epochs_feature << "\n";
    out << "epochs_header = " << c.epochs_header << "\n";
    out << "batch_size = " << c.batch_size << "\n";
    out << "lr_feature = " << format_double(c.lr_feature) << "\n";
    out << "lr_header = " << format_double(c.lr_header) << "\n";
    out << "momentum = " << format_double(c.momentum) << "\n";
    out << "weight_decay = " << format_double(c.weight_decay) << "\n";

    out << "\n[sim]\n";
    out << "num_clients = " << c.num_clients << "\n";
    out << "rounds = " << c.rounds << "\n";
    out << "clients_per_round = " << format_double(c.clients_per_round) << "\n";
    if (c.neighbors_visible == -1) out << "neighbors_visible = all\n";
    else out << "neighbors_visible = " << c.neighbors_visible << "\n";
    out << "strategy = " << to_string(c.strategy) << "\n";
    out << "aggregate = "
        << (c.aggregate == AggregateMode::MeanWithSelf ? "mean_with_self" : "sum_peers") << "\n";
    out << "master_seed = " << c.master_seed << "\n";
    out << "threads = " << c.threads << "\n";
    out << "record_wall_time = " << (c.record_wall_time ? "true" : "false") << "\n";
}

} // namespace pfeddst

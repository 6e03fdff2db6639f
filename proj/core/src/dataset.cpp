#include "pfeddst/dataset.hpp"

#include "pfeddst/error.hpp"

#include <charconv>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>

namespace pfeddst {

Dataset generate_synthetic(int num_classes, int dim, int per_class, double spread,
                           std::uint64_t seed) {
    if (num_classes < 1 || dim < 1 || per_class < 1)
        throw PreconditionError("generate_synthetic: counts must be >= 1");
    if (spread <= 0.0) throw PreconditionError("generate_synthetic: spread must be > 0");

    Rng rng(derive_seed(seed, kSeedData));
    DenseMatrix centers(num_classes, dim);
    for (double& v : centers.data) v = rng.uniform(-1.0, 1.0);

    Dataset out;
    out.num_classes = num_classes;
    out.inputs = DenseMatrix(num_classes * per_class, dim);
    out.labels.resize(static_cast<std::size_t>(num_classes) * per_class);
    int row = 0;
    for (int c = 0; c < num_classes; ++c) {
        for (int i = 0; i < per_class; ++i, ++row) {
            for (int j = 0; j < dim; ++j)
                out.inputs(row, j) = centers(c, j) + spread * rng.normal();
            out.labels[static_cast<std::size_t>(row)] = c;
        }
    }
    return out;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, int line_no) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" + std::string(s) +
                         "'");
    return v;
}

long parse_long(std::string_view s, int line_no) {
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("line " + std::to_string(line_no) + ": bad integer '" + std::string(s) +
                         "'");
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(s.substr(start));
            break;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

} // namespace

Dataset load_flatfile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dataset file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw ParseError("line 1: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto head = split(line, ',');
    if (head.size() != 2 || !head[0].starts_with("dim=") || !head[1].starts_with("classes="))
        throw ParseError("line 1: expected header 'dim=<d>,classes=<k>', got '" + line + "'");
    const long dim = parse_long(head[0].substr(4), 1);
    const long classes = parse_long(head[1].substr(8), 1);
    if (dim < 1 || classes < 1) throw ParseError("line 1: dim and classes must be >= 1");

    std::vector<double> values;
    std::vector<int> labels;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto parts = split(line, ',');
        if (static_cast<long>(parts.size()) != dim + 1)
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(dim + 1) + " fields, got " +
                             std::to_string(parts.size()));
        const long label = parse_long(parts[0], line_no);
        if (label < 0 || label >= classes)
            throw ParseError("line " + std::to_string(line_no) + ": label " +
                             std::to_string(label) + " outside [0, " + std::to_string(classes) +
                             ")");
        labels.push_back(static_cast<int>(label));
        for (long j = 1; j <= dim; ++j)
            values.push_back(parse_double(parts[static_cast<std::size_t>(j)], line_no));
    }
    if (labels.empty()) throw ParseError("dataset has no examples: " + path.string());

    Dataset out;
    out.num_classes = static_cast<int>(classes);
    out.inputs.rows = static_cast<int>(labels.size());
    out.inputs.cols = static_cast<int>(dim);
    out.inputs.data = std::move(values);
    out.labels = std::move(labels);
    return out;
}

void save_flatfile(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write dataset file: " + path.string());
    out << "dim=" << data.dim() << ",classes=" << data.num_classes << "\n";
    for (int i = 0; i < data.size(); ++i) {
        out << data.labels[static_cast<std::size_t>(i)];
        for (int j = 0; j < data.dim(); ++j) out << ',' << format_double(data.inputs(i, j));
        out << "\n";
    }
}

} // namespace pfeddst

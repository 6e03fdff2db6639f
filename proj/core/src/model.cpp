#include "pfeddst/model.hpp"

#include "pfeddst/error.hpp"

#include <cmath>
#include <string>

namespace pfeddst {

const Layer& SplitModel::layer(int i) const {
    const int nf = static_cast<int>(feature_layers.size());
    if (i < nf) return feature_layers[static_cast<std::size_t>(i)];
    return header_layers[static_cast<std::size_t>(i - nf)];
}

Layer& SplitModel::layer(int i) {
    const int nf = static_cast<int>(feature_layers.size());
    if (i < nf) return feature_layers[static_cast<std::size_t>(i)];
    return header_layers[static_cast<std::size_t>(i - nf)];
}

std::size_t SplitModel::parameter_count() const {
    std::size_t n = 0;
    for (int i = 0; i < total_layers(); ++i) {
        const Layer& l = layer(i);
        n += l.weights.size() + l.bias.size();
    }
    return n;
}

Vector SplitModel::flatten_header() const {
    Vector flat;
    for (const Layer& l : header_layers) {
        flat.insert(flat.end(), l.weights.data.begin(), l.weights.data.end());
        flat.insert(flat.end(), l.bias.begin(), l.bias.end());
    }
    return flat;
}

SplitModel make_split_mlp(int input_dim, const std::vector<int>& hidden_dims, int num_classes,
                          Rng& init_rng, int split_index) {
    if (input_dim < 1) throw PreconditionError("make_split_mlp: input_dim must be >= 1");
    if (num_classes < 2) throw PreconditionError("make_split_mlp: num_classes must be >= 2");
    for (int h : hidden_dims)
        if (h < 1) throw PreconditionError("make_split_mlp: hidden dims must be >= 1");

    const int total = static_cast<int>(hidden_dims.size()) + 1;
    if (split_index < 0) split_index = total - 1;
    if (split_index >= total)
        throw PreconditionError("make_split_mlp: split_index " + std::to_string(split_index) +
                                " leaves no header layer (model has " + std::to_string(total) +
                                " layers)");

    SplitModel m;
    m.input_dim = input_dim;
    m.hidden_dims = hidden_dims;
    m.num_classes = num_classes;

    int in = input_dim;
    for (int i = 0; i < total; ++i) {
        const int out = (i == total - 1) ? num_classes : hidden_dims[static_cast<std::size_t>(i)];
        Layer l;
        l.weights = DenseMatrix(in, out);
        l.bias.assign(static_cast<std::size_t>(out), 0.0);
        l.act = (i == total - 1) ? Activation::Identity : Activation::ReLU;
        const double bound = std::sqrt(6.0 / (in + out));
        for (double& w : l.weights.data) w = init_rng.uniform(-bound, bound);
        for (double& v : l.bias) v = init_rng.uniform(-bound, bound);
        if (i < split_index)
            m.feature_layers.push_back(std::move(l));
        else
            m.header_layers.push_back(std::move(l));
        in = out;
    }
    return m;
}

DenseMatrix forward(const SplitModel& model, const DenseMatrix& inputs, ForwardCache* cache) {
    if (inputs.cols != model.input_dim)
        throw ShapeError("forward: inputs have " + std::to_string(inputs.cols) +
                         " columns, model expects " + std::to_string(model.input_dim));
    if (cache) {
        cache->inputs.clear();
        cache->pre_act.clear();
    }

    DenseMatrix a = inputs;
    const int total = model.total_layers();
    const int nf = static_cast<int>(model.feature_layers.size());
    for (int i = 0; i < total; ++i) {
        const Layer& l = model.layer(i);
        const std::string where = (i < nf ? "feature layer " + std::to_string(i)
                                          : "header layer " + std::to_string(i - nf));
        if (cache) cache->inputs.push_back(a);
        DenseMatrix z = matmul(a, l.weights, where);
        add_row_bias(z, l.bias);
        if (cache) cache->pre_act.push_back(z);
        if (l.act == Activation::ReLU) {
            for (double& v : z.data)
                if (v < 0.0) v = 0.0;
        }
        a = std::move(z);
    }
    return a;
}

} // namespace pfeddst

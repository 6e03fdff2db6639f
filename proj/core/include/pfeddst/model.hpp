#pragma once

#include "pfeddst/matrix.hpp"
#include "pfeddst/rng.hpp"

#include <vector>

namespace pfeddst {

enum class Activation { ReLU, Identity };

/// One fully-connected layer. weights is (in x out) so a batch forward is
/// inputs * weights + bias.
struct Layer {
    DenseMatrix weights;
    Vector bias;
    Activation act = Activation::Identity;

    int in_dim() const { return weights.rows; }
    int out_dim() const { return weights.cols; }
};

/// MLP partitioned into feature-extraction layers (shared via aggregation)
/// and header layers (personalized, never aggregated). The partition is fixed
/// at construction.
struct SplitModel {
    std::vector<Layer> feature_layers;
    std::vector<Layer> header_layers;
    int input_dim = 0;
    std::vector<int> hidden_dims;
    int num_classes = 0;

    int total_layers() const {
        return static_cast<int>(feature_layers.size() + header_layers.size());
    }
    const Layer& layer(int i) const;
    Layer& layer(int i);

    std::size_t parameter_count() const;

    /// Header weights and biases flattened row-major in layer order; the
    /// operand of the header-similarity score. Both sides of a comparison
    /// must use this exact order.
    Vector flatten_header() const;
};

/// Builds a split MLP: layers are input->hidden...->num_classes with ReLU
/// after every layer except the last. split_index is the number of layers in
/// the feature part; the default (-1) puts all hidden layers in the feature
/// part and the final linear layer in the header.
SplitModel make_split_mlp(int input_dim, const std::vector<int>& hidden_dims, int num_classes,
                          Rng& init_rng, int split_index = -1);

/// A labeled minibatch: inputs is batch_size x input_dim, labels hold class
/// indices in [0, num_classes).
struct Batch {
    DenseMatrix inputs;
    std::vector<int> labels;

    int size() const { return inputs.rows; }
};

/// Activations recorded during forward, enough to run backward.
struct ForwardCache {
    std::vector<DenseMatrix> inputs;   // input to each layer (index 0 = batch inputs)
    std::vector<DenseMatrix> pre_act;  // pre-activation z of each layer
};

/// Returns logits (batch_size x num_classes). If cache is non-null it is
/// filled for a subsequent backward pass.
DenseMatrix forward(const SplitModel& model, const DenseMatrix& inputs,
                    ForwardCache* cache = nullptr);

} // namespace pfeddst

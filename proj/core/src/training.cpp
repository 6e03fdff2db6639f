#include "pfeddst/training.hpp"

#include "pfeddst/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pfeddst {

namespace {

void validate_batch(const SplitModel& model, const Batch& batch, const char* op) {
    if (batch.size() < 1) throw PreconditionError(std::string(op) + ": empty batch");
    if (static_cast<int>(batch.labels.size()) != batch.size())
        throw PreconditionError(std::string(op) + ": labels size != batch size");
    for (int y : batch.labels)
        if (y < 0 || y >= model.num_classes)
            throw PreconditionError(std::string(op) + ": label " + std::to_string(y) +
                                    " outside [0, " + std::to_string(model.num_classes) + ")");
}

/// Softmax probabilities and mean cross-entropy, log-sum-exp stabilized.
double softmax_ce(const DenseMatrix& logits, const std::vector<int>& labels, DenseMatrix* probs) {
    const int n = logits.rows;
    const int k = logits.cols;
    if (probs) *probs = DenseMatrix(n, k);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        double m = logits(i, 0);
        for (int j = 1; j < k; ++j) m = std::max(m, logits(i, j));
        double sum = 0.0;
        for (int j = 0; j < k; ++j) sum += std::exp(logits(i, j) - m);
        const double lse = std::log(sum) + m;
        total += lse - logits(i, labels[static_cast<std::size_t>(i)]);
        if (probs)
            for (int j = 0; j < k; ++j) (*probs)(i, j) = std::exp(logits(i, j) - lse);
    }
    return total / n;
}

LayerGrad zero_like(const Layer& l) {
    LayerGrad g;
    g.d_weights = DenseMatrix(l.weights.rows, l.weights.cols);
    g.d_bias.assign(l.bias.size(), 0.0);
    return g;
}

} // namespace

Gradients zero_gradients(const SplitModel& model) {
    Gradients g;
    for (const Layer& l : model.feature_layers) g.feature.push_back(zero_like(l));
    for (const Layer& l : model.header_layers) g.header.push_back(zero_like(l));
    return g;
}

double mean_cross_entropy(const SplitModel& model, const Batch& batch) {
    validate_batch(model, batch, "mean_cross_entropy");
    DenseMatrix logits = forward(model, batch.inputs);
    const double loss = softmax_ce(logits, batch.labels, nullptr);
    if (!std::isfinite(loss)) throw Error("mean_cross_entropy: non-finite loss");
    return loss;
}

double loss_and_grads(const SplitModel& model, const Batch& batch, FreezeMode freeze,
                      Gradients& out) {
    validate_batch(model, batch, "loss_and_grads");

    ForwardCache cache;
    DenseMatrix logits = forward(model, batch.inputs, &cache);
    DenseMatrix probs;
    const double loss = softmax_ce(logits, batch.labels, &probs);
    if (!std::isfinite(loss)) throw Error("loss_and_grads: non-finite loss");

    out = zero_gradients(model);

    const int total = model.total_layers();
    const int nf = static_cast<int>(model.feature_layers.size());
    const bool want_feature = freeze != FreezeMode::FeatureFrozen && nf > 0;
    const bool want_header = freeze != FreezeMode::HeaderFrozen;

    // dL/dz for the last layer: (softmax - onehot) / batch_size.
    DenseMatrix delta = probs;
    const double inv_n = 1.0 / batch.size();
    for (int i = 0; i < delta.rows; ++i) {
        delta(i, batch.labels[static_cast<std::size_t>(i)]) -= 1.0;
        for (int j = 0; j < delta.cols; ++j) delta(i, j) *= inv_n;
    }

    for (int li = total - 1; li >= 0; --li) {
        const bool is_header = li >= nf;
        const bool store = is_header ? want_header : want_feature;
        const Layer& l = model.layer(li);
        if (store) {
            LayerGrad& g = is_header ? out.header[static_cast<std::size_t>(li - nf)]
                                     : out.feature[static_cast<std::size_t>(li)];
            g.d_weights = matmul_transA(cache.inputs[static_cast<std::size_t>(li)], delta,
                                        "loss_and_grads dW");
            g.d_bias = column_sums(delta);
        }
        // Early out: nothing below the feature/header boundary is needed.
        if (li == 0 || (!want_feature && li <= nf)) break;

        DenseMatrix prev = matmul_transB(delta, l.weights, "loss_and_grads dA");
        const Layer& below = model.layer(li - 1);
        if (below.act == Activation::ReLU) {
            const DenseMatrix& z = cache.pre_act[static_cast<std::size_t>(li - 1)];
            for (std::size_t idx = 0; idx < prev.data.size(); ++idx)
                if (z.data[idx] <= 0.0) prev.data[idx] = 0.0;
        }
        delta = std::move(prev);
    }
    return loss;
}

OptimizerState OptimizerState::for_scope(const SplitModel& model, UpdateScope scope,
                                         double lr, double momentum, double weight_decay) {
    OptimizerState s;
    s.learning_rate = lr;
    s.momentum = momentum;
    s.weight_decay = weight_decay;
    if (scope != UpdateScope::HeaderOnly)
        for (const Layer& l : model.feature_layers) s.buffers.push_back(zero_like(l));
    if (scope != UpdateScope::FeatureOnly)
        for (const Layer& l : model.header_layers) s.buffers.push_back(zero_like(l));
    return s;
}

void OptimizerState::reset() {
    for (LayerGrad& b : buffers) {
        b.d_weights.fill(0.0);
        std::fill(b.d_bias.begin(), b.d_bias.end(), 0.0);
    }
}

namespace {

void step_layer(Layer& l, const LayerGrad& g, LayerGrad& buf, const OptimizerState& opt) {
    if (!l.weights.same_shape(g.d_weights) || l.bias.size() != g.d_bias.size())
        throw ShapeError("sgd_step: gradient shape does not match layer");
    if (!l.weights.same_shape(buf.d_weights))
        throw ShapeError("sgd_step: momentum buffer shape does not match layer");
    for (std::size_t i = 0; i < l.weights.data.size(); ++i) {
        double& b = buf.d_weights.data[i];
        b = opt.momentum * b + (g.d_weights.data[i] + opt.weight_decay * l.weights.data[i]);
        l.weights.data[i] -= opt.learning_rate * b;
    }
    for (std::size_t i = 0; i < l.bias.size(); ++i) {
        double& b = buf.d_bias[i];
        b = opt.momentum * b + (g.d_bias[i] + opt.weight_decay * l.bias[i]);
        l.bias[i] -= opt.learning_rate * b;
    }
}

} // namespace

void sgd_step(SplitModel& model, const Gradients& grads, OptimizerState& opt, UpdateScope scope) {
    const std::size_t nf = model.feature_layers.size();
    const std::size_t nh = model.header_layers.size();
    std::size_t expected = (scope == UpdateScope::FeatureOnly)  ? nf
                           : (scope == UpdateScope::HeaderOnly) ? nh
                                                                : nf + nh;
    if (opt.buffers.size() != expected)
        throw ShapeError("sgd_step: optimizer state has " + std::to_string(opt.buffers.size()) +
                         " buffers, scope needs " + std::to_string(expected));

    std::size_t b = 0;
    if (scope != UpdateScope::HeaderOnly) {
        if (grads.feature.size() != nf) throw ShapeError("sgd_step: feature gradient count");
        for (std::size_t i = 0; i < nf; ++i)
            step_layer(model.feature_layers[i], grads.feature[i], opt.buffers[b++], opt);
    }
    if (scope != UpdateScope::FeatureOnly) {
        if (grads.header.size() != nh) throw ShapeError("sgd_step: header gradient count");
        for (std::size_t i = 0; i < nh; ++i)
            step_layer(model.header_layers[i], grads.header[i], opt.buffers[b++], opt);
    }
}

namespace {

double rel_err(double a, double b) {
    const double scale = std::max({std::fabs(a), std::fabs(b), 1e-6});
    return std::fabs(a - b) / scale;
}

/// Central-difference check of one parameter array against analytic grads.
void check_array(SplitModel& scratch, const Batch& batch, double step,
                 std::vector<double>& params, const std::vector<double>& analytic,
                 double& layer_max) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double orig = params[i];
        params[i] = orig + step;
        const double lp = mean_cross_entropy(scratch, batch);
        params[i] = orig - step;
        const double lm = mean_cross_entropy(scratch, batch);
        params[i] = orig;
        const double fd = (lp - lm) / (2.0 * step);
        layer_max = std::max(layer_max, rel_err(analytic[i], fd));
    }
}

bool array_all_zero(const std::vector<double>& v) {
    for (double x : v)
        if (x != 0.0) return false;
    return true;
}

} // namespace

GradCheckReport check_gradients_against(const SplitModel& model, const Batch& batch,
                                        FreezeMode freeze, double step, double tolerance,
                                        const Gradients& analytic) {
    if (step <= 0.0) throw PreconditionError("gradient_check: step must be > 0");
    validate_batch(model, batch, "gradient_check");
    if (analytic.feature.size() != model.feature_layers.size() ||
        analytic.header.size() != model.header_layers.size())
        throw ShapeError("gradient_check: gradient layer count does not match model");

    SplitModel scratch = model;
    GradCheckReport report;

    const bool feature_active = freeze != FreezeMode::FeatureFrozen;
    const bool header_active = freeze != FreezeMode::HeaderFrozen;

    for (std::size_t i = 0; i < scratch.feature_layers.size(); ++i) {
        const LayerGrad& g = analytic.feature[i];
        if (!feature_active) {
            if (!array_all_zero(g.d_weights.data) || !array_all_zero(g.d_bias))
                report.frozen_grads_zero = false;
            continue;
        }
        double layer_max = 0.0;
        Layer& l = scratch.feature_layers[i];
        check_array(scratch, batch, step, l.weights.data, g.d_weights.data, layer_max);
        check_array(scratch, batch, step, l.bias, g.d_bias, layer_max);
        report.layers.push_back({"feature " + std::to_string(i), layer_max});
        report.max_rel_err = std::max(report.max_rel_err, layer_max);
    }
    for (std::size_t i = 0; i < scratch.header_layers.size(); ++i) {
        const LayerGrad& g = analytic.header[i];
        if (!header_active) {
            if (!array_all_zero(g.d_weights.data) || !array_all_zero(g.d_bias))
                report.frozen_grads_zero = false;
            continue;
        }
        double layer_max = 0.0;
        Layer& l = scratch.header_layers[i];
        check_array(scratch, batch, step, l.weights.data, g.d_weights.data, layer_max);
        check_array(scratch, batch, step, l.bias, g.d_bias, layer_max);
        report.layers.push_back({"header " + std::to_string(i), layer_max});
        report.max_rel_err = std::max(report.max_rel_err, layer_max);
    }

    report.pass = report.frozen_grads_zero && report.max_rel_err < tolerance;
    return report;
}

GradCheckReport gradient_check(const SplitModel& model, const Batch& batch, FreezeMode freeze,
                               double step, double tolerance) {
    Gradients g;
    loss_and_grads(model, batch, freeze, g);
    return check_gradients_against(model, batch, freeze, step, tolerance, g);
}

} // namespace pfeddst

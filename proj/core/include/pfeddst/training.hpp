#pragma once

#include "pfeddst/model.hpp"

#include <string>
#include <vector>

namespace pfeddst {

enum class FreezeMode { NoneFrozen, FeatureFrozen, HeaderFrozen };
enum class UpdateScope { FeatureOnly, HeaderOnly, All };

/// Per-layer gradient (or momentum buffer) with the same shapes as the layer.
struct LayerGrad {
    DenseMatrix d_weights;
    Vector d_bias;
};

/// Gradients for a whole SplitModel. Frozen parts are present and exactly
/// zero so callers never have to special-case shapes.
struct Gradients {
    std::vector<LayerGrad> feature;
    std::vector<LayerGrad> header;
};

Gradients zero_gradients(const SplitModel& model);

/// Mean cross-entropy of the model's softmax outputs on the batch.
double mean_cross_entropy(const SplitModel& model, const Batch& batch);

/// Mean cross-entropy plus analytic gradients. Gradients of the frozen part
/// are identically zero; active-part gradients are exact.
double loss_and_grads(const SplitModel& model, const Batch& batch, FreezeMode freeze,
                      Gradients& out);

/// SGD with heavy-ball momentum and L2 weight decay folded into the gradient:
///   buf <- momentum * buf + (g + weight_decay * p);  p <- p - lr * buf
/// The buffers mirror only the layers the state is scoped to (feature part,
/// header part, or all layers).
struct OptimizerState {
    double learning_rate = 0.1;
    double momentum = 0.0;
    double weight_decay = 0.0;
    std::vector<LayerGrad> buffers;

    static OptimizerState for_scope(const SplitModel& model, UpdateScope scope,
                                    double lr, double momentum, double weight_decay);

    void reset();
};

/// Applies one optimizer step to the parameters inside `scope`. Parameters
/// outside the scope are left bit-identical.
void sgd_step(SplitModel& model, const Gradients& grads, OptimizerState& opt, UpdateScope scope);

/// Gradient verification against central finite differences, restricted to
/// the parameters that are active under `freeze`.
struct GradCheckReport {
    struct LayerReport {
        std::string name;
        double max_rel_err = 0.0;
    };
    std::vector<LayerReport> layers;
    double max_rel_err = 0.0;
    bool pass = false;
    bool frozen_grads_zero = true;
};

/// Computes analytic gradients and compares them against central differences
/// ( L(p+step) - L(p-step) ) / (2 step) for every active parameter.
GradCheckReport gradient_check(const SplitModel& model, const Batch& batch, FreezeMode freeze,
                               double step, double tolerance);

/// Same comparison but against caller-provided gradients; lets tests plant a
/// wrong gradient as a negative control.
GradCheckReport check_gradients_against(const SplitModel& model, const Batch& batch,
                                        FreezeMode freeze, double step, double tolerance,
                                        const Gradients& analytic);

} // namespace pfeddst

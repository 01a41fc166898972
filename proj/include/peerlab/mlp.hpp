#pragma once

#include "peerlab/checkpoint.hpp"
#include "peerlab/core.hpp"

#include <Eigen/Dense>

namespace peerlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class OutputActivation { Linear, Tanh };

/// Fully connected network with tanh hidden layers. Batches are stored
/// column-wise: an input batch is (input_dim x batch).
class Mlp {
public:
    struct Cache {
        std::vector<Matrix> activations;  // activations[0] is the input
    };

    struct Gradients {
        std::vector<Matrix> weights;
        std::vector<Vector> biases;
    };

    Mlp() = default;
    /// Uniform fan-in initialisation: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    Mlp(std::vector<int> layer_sizes, OutputActivation output, Rng& rng);

    Matrix forward(const Matrix& input, Cache* cache = nullptr) const;

    /// Accumulates parameter gradients of a loss whose gradient w.r.t. the
    /// network output is `grad_output`; returns the gradient w.r.t. the input.
    Matrix backward(const Cache& cache, const Matrix& grad_output, Gradients& grads) const;

    Gradients zero_gradients() const;

    std::size_t parameter_count() const;
    std::vector<double> flat_parameters() const;
    void set_flat_parameters(std::span<const double> params);
    static std::vector<double> flatten(const Gradients& g);

    /// this <- (1 - rate) * this + rate * source
    void soft_update(const Mlp& source, double rate);

    int input_dim() const { return sizes_.front(); }
    int output_dim() const { return sizes_.back(); }
    const std::vector<int>& layer_sizes() const { return sizes_; }
    OutputActivation output_activation() const { return output_; }

    std::vector<Tensor> to_tensors(const std::string& prefix) const;
    void from_tensors(const std::vector<Tensor>& tensors, const std::string& prefix);

    bool finite() const;

    std::vector<Matrix>& weights() { return weights_; }
    std::vector<Vector>& biases() { return biases_; }

private:
    std::vector<int> sizes_;
    OutputActivation output_ = OutputActivation::Linear;
    std::vector<Matrix> weights_;  // weights_[l] is (sizes_[l+1] x sizes_[l])
    std::vector<Vector> biases_;
};

/// Adam optimiser state for one network.
class Adam {
public:
    Adam() = default;
    Adam(const Mlp& net, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);

    void step(Mlp& net, const Mlp::Gradients& grads);
    double learning_rate() const { return lr_; }

private:
    double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    long t_ = 0;
    Mlp::Gradients m_, v_;
};

} // namespace peerlab

#include "peerlab/mlp.hpp"

#include <cmath>

namespace peerlab {

namespace {

// tanh through exp: Eigen vectorises exp for doubles but not tanh, and this is
// the hot loop of every network update.
void tanh_in_place(Matrix& z) {
    z = 1.0 - 2.0 / ((2.0 * z.array()).exp() + 1.0);
}

} // namespace

Mlp::Mlp(std::vector<int> layer_sizes, OutputActivation output, Rng& rng)
    : sizes_(std::move(layer_sizes)), output_(output) {
    if (sizes_.size() < 2) throw ContractViolation("mlp needs at least input and output sizes");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
        Matrix w(sizes_[l + 1], sizes_[l]);
        Vector b(sizes_[l + 1]);
        // Fill in a fixed order so initialisation does not depend on Eigen internals.
        for (int r = 0; r < w.rows(); ++r)
            for (int c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-bound, bound);
        for (int r = 0; r < b.size(); ++r) b(r) = rng.uniform(-bound, bound);
        weights_.push_back(std::move(w));
        biases_.push_back(std::move(b));
    }
}

Matrix Mlp::forward(const Matrix& input, Cache* cache) const {
    if (input.rows() != input_dim()) throw ContractViolation("mlp input dimension mismatch");
    Matrix a = input;
    if (cache) {
        cache->activations.clear();
        cache->activations.push_back(a);
    }
    const std::size_t layers = weights_.size();
    for (std::size_t l = 0; l < layers; ++l) {
        Matrix z = weights_[l] * a;
        z.colwise() += biases_[l];
        const bool last = l + 1 == layers;
        if (!last || output_ == OutputActivation::Tanh) tanh_in_place(z);
        a = std::move(z);
        if (cache) cache->activations.push_back(a);
    }
    return a;
}

Matrix Mlp::backward(const Cache& cache, const Matrix& grad_output, Gradients& grads) const {
    const std::size_t layers = weights_.size();
    Matrix delta = grad_output;
    for (std::size_t l = layers; l-- > 0;) {
        const Matrix& out = cache.activations[l + 1];
        const bool last = l + 1 == layers;
        if (!last || output_ == OutputActivation::Tanh)
            delta = (delta.array() * (1.0 - out.array().square())).matrix();
        const Matrix& in = cache.activations[l];
        grads.weights[l].noalias() += delta * in.transpose();
        grads.biases[l] += delta.rowwise().sum();
        delta = weights_[l].transpose() * delta;
    }
    return delta;
}

Mlp::Gradients Mlp::zero_gradients() const {
    Gradients g;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        g.weights.push_back(Matrix::Zero(weights_[l].rows(), weights_[l].cols()));
        g.biases.push_back(Vector::Zero(biases_[l].size()));
    }
    return g;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l)
        n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
    return n;
}

namespace {

template <typename W, typename B>
std::vector<double> flatten_layers(const std::vector<W>& ws, const std::vector<B>& bs) {
    std::vector<double> out;
    for (std::size_t l = 0; l < ws.size(); ++l) {
        for (int r = 0; r < ws[l].rows(); ++r)
            for (int c = 0; c < ws[l].cols(); ++c) out.push_back(ws[l](r, c));
        for (int r = 0; r < bs[l].size(); ++r) out.push_back(bs[l](r));
    }
    return out;
}

} // namespace

std::vector<double> Mlp::flat_parameters() const { return flatten_layers(weights_, biases_); }

std::vector<double> Mlp::flatten(const Gradients& g) { return flatten_layers(g.weights, g.biases); }

void Mlp::set_flat_parameters(std::span<const double> params) {
    if (params.size() != parameter_count()) throw ContractViolation("parameter vector size mismatch");
    std::size_t k = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        for (int r = 0; r < weights_[l].rows(); ++r)
            for (int c = 0; c < weights_[l].cols(); ++c) weights_[l](r, c) = params[k++];
        for (int r = 0; r < biases_[l].size(); ++r) biases_[l](r) = params[k++];
    }
}

void Mlp::soft_update(const Mlp& source, double rate) {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        weights_[l] = (1.0 - rate) * weights_[l] + rate * source.weights_[l];
        biases_[l] = (1.0 - rate) * biases_[l] + rate * source.biases_[l];
    }
}

std::vector<Tensor> Mlp::to_tensors(const std::string& prefix) const {
    std::vector<Tensor> out;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Tensor w{prefix + ".w" + std::to_string(l), static_cast<std::size_t>(weights_[l].rows()),
                 static_cast<std::size_t>(weights_[l].cols()), {}};
        for (int r = 0; r < weights_[l].rows(); ++r)
            for (int c = 0; c < weights_[l].cols(); ++c) w.data.push_back(weights_[l](r, c));
        Tensor b{prefix + ".b" + std::to_string(l), static_cast<std::size_t>(biases_[l].size()), 1, {}};
        for (int r = 0; r < biases_[l].size(); ++r) b.data.push_back(biases_[l](r));
        out.push_back(std::move(w));
        out.push_back(std::move(b));
    }
    return out;
}

void Mlp::from_tensors(const std::vector<Tensor>& tensors, const std::string& prefix) {
    auto find = [&](const std::string& name) -> const Tensor& {
        for (const auto& t : tensors)
            if (t.name == name) return t;
        throw std::runtime_error("checkpoint: missing tensor " + name);
    };
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        const Tensor& w = find(prefix + ".w" + std::to_string(l));
        const Tensor& b = find(prefix + ".b" + std::to_string(l));
        if (w.rows != static_cast<std::size_t>(weights_[l].rows()) ||
            w.cols != static_cast<std::size_t>(weights_[l].cols()) ||
            b.rows != static_cast<std::size_t>(biases_[l].size()))
            throw std::runtime_error("checkpoint: shape mismatch for layer " + std::to_string(l));
        for (int r = 0; r < weights_[l].rows(); ++r)
            for (int c = 0; c < weights_[l].cols(); ++c) weights_[l](r, c) = w.data[r * w.cols + c];
        for (int r = 0; r < biases_[l].size(); ++r) biases_[l](r) = b.data[r];
    }
}

bool Mlp::finite() const {
    for (std::size_t l = 0; l < weights_.size(); ++l)
        if (!weights_[l].allFinite() || !biases_[l].allFinite()) return false;
    return true;
}

Adam::Adam(const Mlp& net, double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps), m_(net.zero_gradients()),
      v_(net.zero_gradients()) {}

void Adam::step(Mlp& net, const Mlp::Gradients& g) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    auto apply = [&](auto& param, auto& m, auto& v, const auto& grad) {
        m = beta1_ * m + (1.0 - beta1_) * grad;
        v = beta2_ * v + (1.0 - beta2_) * grad.cwiseProduct(grad);
        param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
    };
    for (std::size_t l = 0; l < net.weights().size(); ++l) {
        apply(net.weights()[l], m_.weights[l], v_.weights[l], g.weights[l]);
        apply(net.biases()[l], m_.biases[l], v_.biases[l], g.biases[l]);
    }
}

} // namespace peerlab

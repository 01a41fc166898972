#include "peerlab/learners.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

namespace peerlab {

double EpsilonSchedule::at(std::size_t step) const {
    if (decay_steps == 0 || step >= decay_steps) return end;
    const double frac = static_cast<double>(step) / static_cast<double>(decay_steps);
    return start + (end - start) * frac;
}

double Learner::update(Batch batch) {
    if (frozen_) throw ContractViolation("update() on a frozen learner");
    if (batch.empty()) throw ContractViolation("update() with an empty batch");
    return do_update(batch);
}

double Learner::update(std::span<const Transition> batch) {
    std::vector<const Transition*> ptrs;
    ptrs.reserve(batch.size());
    for (const auto& t : batch) ptrs.push_back(&t);
    return update(Batch(ptrs));
}

void Learner::save(std::ostream& out) const { write_checkpoint(out, kind(), to_tensors()); }

void Learner::load(std::istream& in) { from_tensors(read_checkpoint(in, kind())); }

std::uint64_t Learner::checksum() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : parameters()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int k = 0; k < 8; ++k) {
            h ^= (bits >> (8 * k)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

// ---------------------------------------------------------------------------

std::size_t StateGrid::cell_count() const {
    std::size_t n = 1;
    for (std::size_t d = 0; d < dims; ++d) n *= static_cast<std::size_t>(levels);
    return n;
}

std::size_t StateGrid::index(std::span<const double> obs) const {
    if (obs.size() != dims) throw ContractViolation("observation dimension mismatch");
    std::size_t idx = 0;
    const double scale = (levels - 1) / (hi - lo);
    const long top = levels - 1;
    for (std::size_t d = dims; d-- > 0;) {
        // Round half up, clamped to the grid.
        const double v = (obs[d] - lo) * scale + 0.5;
        const long cell = v <= 0.0 ? 0 : std::min(static_cast<long>(v), top);
        idx = idx * static_cast<std::size_t>(levels) + static_cast<std::size_t>(cell);
    }
    return idx;
}

TabularQ::TabularQ(StateGrid grid, std::size_t action_count, double learning_rate, double gamma)
    : grid_(grid), actions_(action_count), lr_(learning_rate), gamma_(gamma),
      table_(grid.cell_count() * action_count, 0.0) {
    if (action_count == 0) throw ConfigError("tabular learner needs at least one action");
    if (grid.levels < 2) throw ConfigError("tabular grid needs at least 2 levels");
}

std::size_t TabularQ::greedy(std::size_t state) const {
    const double* row = &table_[state * actions_];
    std::size_t best = 0;
    for (std::size_t a = 1; a < actions_; ++a)
        if (row[a] > row[best]) best = a;
    return best;
}

ActionValue TabularQ::act(const Observation& obs, ActMode mode, Rng& rng) const {
    const std::size_t s = grid_.index(obs);
    if (mode == ActMode::Explore && rng.uniform() < epsilon())
        return ActionValue::discrete(rng.uniform_index(actions_));
    return ActionValue::discrete(greedy(s));
}

ActionValue TabularQ::greedy_action(const Observation& obs) const {
    return ActionValue::discrete(greedy(grid_.index(obs)));
}

double TabularQ::q_value(const Observation& obs, const ActionValue& action) const {
    if (action.index() >= actions_) throw ContractViolation("action index out of range");
    return entry(grid_.index(obs), action.index());
}

double TabularQ::do_update(Batch batch) {
    double loss = 0.0;
    for (const Transition* t : batch) {
        const std::size_t s = grid_.index(t->state);
        const std::size_t a = t->action.index();
        double target = t->reward;
        if (!t->done) {
            const std::size_t s2 = grid_.index(t->next_state);
            target += gamma_ * entry(s2, greedy(s2));
        }
        double& q = table_[s * actions_ + a];
        const double td = target - q;
        loss += td * td;
        q += lr_ * td;
    }
    return loss / static_cast<double>(batch.size());
}

void TabularQ::randomize(double lo, double hi, Rng& rng) {
    for (auto& v : table_) v = rng.uniform(lo, hi);
}

std::vector<Tensor> TabularQ::to_tensors() const {
    return {Tensor{"q", grid_.cell_count(), actions_, table_}};
}

void TabularQ::from_tensors(const std::vector<Tensor>& tensors) {
    if (tensors.size() != 1 || tensors[0].rows != grid_.cell_count() || tensors[0].cols != actions_)
        throw std::runtime_error("checkpoint: tabular table shape mismatch");
    table_ = tensors[0].data;
}

// ---------------------------------------------------------------------------

namespace {

Matrix column(const Observation& obs) {
    return Eigen::Map<const Vector>(obs.data(), static_cast<Eigen::Index>(obs.size()));
}

} // namespace

NeuralQ::NeuralQ(std::size_t observation_dim, std::size_t action_count, double gamma,
                 NetworkConfig cfg, Rng& init_rng)
    : obs_dim_(observation_dim), actions_(action_count), gamma_(gamma), cfg_(cfg),
      online_({static_cast<int>(observation_dim), cfg.hidden, cfg.hidden, static_cast<int>(action_count)},
              OutputActivation::Linear, init_rng),
      target_(online_), optimizer_(online_, cfg.learning_rate) {}

Vector NeuralQ::q_values(const Observation& obs) const {
    if (obs.size() != obs_dim_) throw ContractViolation("observation dimension mismatch");
    return online_.forward(column(obs)).col(0);
}

ActionValue NeuralQ::act(const Observation& obs, ActMode mode, Rng& rng) const {
    if (mode == ActMode::Explore && rng.uniform() < epsilon())
        return ActionValue::discrete(rng.uniform_index(actions_));
    return greedy_action(obs);
}

ActionValue NeuralQ::greedy_action(const Observation& obs) const {
    const Vector q = q_values(obs);
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < q.size(); ++a)
        if (q(a) > q(best)) best = a;
    return ActionValue::discrete(static_cast<std::size_t>(best));
}

double NeuralQ::q_value(const Observation& obs, const ActionValue& action) const {
    if (action.index() >= actions_) throw ContractViolation("action index out of range");
    return q_values(obs)(static_cast<Eigen::Index>(action.index()));
}

Matrix NeuralQ::gather_states(Batch batch, bool next) const {
    Matrix x(static_cast<Eigen::Index>(obs_dim_), static_cast<Eigen::Index>(batch.size()));
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const Observation& o = next ? batch[b]->next_state : batch[b]->state;
        if (o.size() != obs_dim_) throw ContractViolation("observation dimension mismatch");
        for (std::size_t d = 0; d < obs_dim_; ++d) x(d, b) = o[d];
    }
    return x;
}

double NeuralQ::td_loss(Batch batch, Mlp::Gradients& grads) const {
    const auto n = static_cast<Eigen::Index>(batch.size());
    const Matrix next_q = target_.forward(gather_states(batch, true));
    Mlp::Cache cache;
    const Matrix q = online_.forward(gather_states(batch, false), &cache);
    Matrix grad = Matrix::Zero(q.rows(), n);
    double loss = 0.0;
    for (Eigen::Index b = 0; b < n; ++b) {
        const Transition& t = *batch[b];
        double y = t.reward;
        if (!t.done) y += gamma_ * next_q.col(b).maxCoeff();
        const auto a = static_cast<Eigen::Index>(t.action.index());
        const double err = q(a, b) - y;
        loss += err * err;
        grad(a, b) = 2.0 * err / static_cast<double>(n);
    }
    online_.backward(cache, grad, grads);
    return loss / static_cast<double>(n);
}

std::pair<double, std::vector<double>> NeuralQ::loss_and_gradient(Batch batch) const {
    auto g = online_.zero_gradients();
    const double loss = td_loss(batch, g);
    return {loss, Mlp::flatten(g)};
}

double NeuralQ::do_update(Batch batch) {
    auto g = online_.zero_gradients();
    const double loss = td_loss(batch, g);
    optimizer_.step(online_, g);
    if (++updates_ % cfg_.target_period == 0) target_ = online_;
    return loss;
}

std::vector<Tensor> NeuralQ::to_tensors() const {
    auto t = online_.to_tensors("online");
    auto u = target_.to_tensors("target");
    t.insert(t.end(), u.begin(), u.end());
    return t;
}

void NeuralQ::from_tensors(const std::vector<Tensor>& tensors) {
    online_.from_tensors(tensors, "online");
    target_.from_tensors(tensors, "target");
}

// ---------------------------------------------------------------------------

ActorCriticLite::ActorCriticLite(std::size_t observation_dim, const ActionSpace& space, double gamma,
                                 NetworkConfig cfg, Rng& init_rng)
    : obs_dim_(observation_dim), space_(space), gamma_(gamma), cfg_(cfg) {
    if (space.discrete()) throw ConfigError("actor-critic learner needs a continuous action space");
    if (!(space.high > 0.0) || space.low != -space.high)
        throw ConfigError("actor-critic learner needs symmetric action bounds");
    const int in = static_cast<int>(observation_dim);
    const int dims = static_cast<int>(space.dims);
    actor_ = Mlp({in, cfg.hidden, cfg.hidden, dims}, OutputActivation::Tanh, init_rng);
    critic_ = Mlp({in + dims, cfg.hidden, cfg.hidden, 1}, OutputActivation::Linear, init_rng);
    actor_target_ = actor_;
    critic_target_ = critic_;
    actor_opt_ = Adam(actor_, cfg.learning_rate * cfg.actor_rate);
    critic_opt_ = Adam(critic_, cfg.learning_rate);
}

RealVec ActorCriticLite::policy(const Observation& obs) const {
    if (obs.size() != obs_dim_) throw ContractViolation("observation dimension mismatch");
    const Matrix u = actor_.forward(column(obs));
    RealVec a(space_.dims);
    for (std::size_t d = 0; d < space_.dims; ++d) a[d] = u(static_cast<Eigen::Index>(d), 0);
    return a;
}

ActionValue ActorCriticLite::act(const Observation& obs, ActMode mode, Rng& rng) const {
    auto u = policy(obs);
    for (auto& v : u) {
        if (mode == ActMode::Explore) v = std::clamp(v + cfg_.noise_sigma * rng.normal(), -1.0, 1.0);
        v *= space_.high;
    }
    return ActionValue::continuous(std::move(u));
}

ActionValue ActorCriticLite::greedy_action(const Observation& obs) const {
    auto u = policy(obs);
    for (auto& v : u) v *= space_.high;
    return ActionValue::continuous(std::move(u));
}

double ActorCriticLite::q_value(const Observation& obs, const ActionValue& action) const {
    if (obs.size() != obs_dim_ || action.values().size() != space_.dims)
        throw ContractViolation("dimension mismatch in q_value");
    Matrix x(static_cast<Eigen::Index>(obs_dim_ + space_.dims), 1);
    for (std::size_t d = 0; d < obs_dim_; ++d) x(d, 0) = obs[d];
    for (std::size_t d = 0; d < space_.dims; ++d) x(obs_dim_ + d, 0) = action.values()[d] / space_.high;
    return critic_.forward(x)(0, 0);
}

double ActorCriticLite::do_update(Batch batch) {
    const auto n = static_cast<Eigen::Index>(batch.size());
    const auto od = static_cast<Eigen::Index>(obs_dim_);
    const auto ad = static_cast<Eigen::Index>(space_.dims);
    Matrix s(od, n), s2(od, n), sa(od + ad, n);
    for (Eigen::Index b = 0; b < n; ++b) {
        const Transition& t = *batch[b];
        for (Eigen::Index d = 0; d < od; ++d) {
            s(d, b) = t.state[d];
            s2(d, b) = t.next_state[d];
            sa(d, b) = t.state[d];
        }
        for (Eigen::Index d = 0; d < ad; ++d) sa(od + d, b) = t.action.values()[d] / space_.high;
    }

    // Critic: regress on r + gamma * Q'(s', mu'(s')).
    Matrix s2a(od + ad, n);
    s2a.topRows(od) = s2;
    s2a.bottomRows(ad) = actor_target_.forward(s2);
    const Matrix next_q = critic_target_.forward(s2a);
    Mlp::Cache cache;
    const Matrix q = critic_.forward(sa, &cache);
    Matrix grad(1, n);
    double loss = 0.0;
    for (Eigen::Index b = 0; b < n; ++b) {
        const Transition& t = *batch[b];
        const double y = t.reward + (t.done ? 0.0 : gamma_ * next_q(0, b));
        const double err = q(0, b) - y;
        loss += err * err;
        grad(0, b) = 2.0 * err / static_cast<double>(n);
    }
    auto cg = critic_.zero_gradients();
    critic_.backward(cache, grad, cg);
    critic_opt_.step(critic_, cg);

    // Actor: ascend Q(s, mu(s)) through the updated critic.
    Mlp::Cache actor_cache, critic_cache;
    const Matrix u = actor_.forward(s, &actor_cache);
    Matrix su(od + ad, n);
    su.topRows(od) = s;
    su.bottomRows(ad) = u;
    critic_.forward(su, &critic_cache);
    auto scratch = critic_.zero_gradients();
    const Matrix dq = critic_.backward(critic_cache, Matrix::Constant(1, n, -1.0 / static_cast<double>(n)), scratch);
    auto ag = actor_.zero_gradients();
    actor_.backward(actor_cache, dq.bottomRows(ad), ag);
    actor_opt_.step(actor_, ag);

    actor_target_.soft_update(actor_, cfg_.soft_rate);
    critic_target_.soft_update(critic_, cfg_.soft_rate);
    return loss / static_cast<double>(n);
}

std::vector<double> ActorCriticLite::parameters() const {
    auto p = actor_.flat_parameters();
    const auto c = critic_.flat_parameters();
    p.insert(p.end(), c.begin(), c.end());
    return p;
}

std::vector<Tensor> ActorCriticLite::to_tensors() const {
    std::vector<Tensor> out;
    for (auto [net, name] : {std::pair{&actor_, "actor"}, std::pair{&critic_, "critic"},
                             std::pair{&actor_target_, "actor_target"},
                             std::pair{&critic_target_, "critic_target"}}) {
        auto t = net->to_tensors(name);
        out.insert(out.end(), t.begin(), t.end());
    }
    return out;
}

void ActorCriticLite::from_tensors(const std::vector<Tensor>& tensors) {
    actor_.from_tensors(tensors, "actor");
    critic_.from_tensors(tensors, "critic");
    actor_target_.from_tensors(tensors, "actor_target");
    critic_target_.from_tensors(tensors, "critic_target");
}

} // namespace peerlab

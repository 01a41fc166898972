#include "peerlab/core.hpp"

#include <cstring>

namespace peerlab {

ActionValue ActionValue::continuous(RealVec values) {
    if (!all_finite(values)) throw ContractViolation("continuous action has non-finite component");
    return ActionValue(std::move(values));
}

std::size_t ActionValue::index() const {
    if (!is_discrete()) throw ContractViolation("index() on continuous action");
    return std::get<std::size_t>(value_);
}

const RealVec& ActionValue::values() const {
    if (is_discrete()) throw ContractViolation("values() on discrete action");
    return std::get<RealVec>(value_);
}

bool operator==(const ActionValue& a, const ActionValue& b) {
    if (a.is_discrete() != b.is_discrete()) return false;
    if (a.is_discrete()) return a.index() == b.index();
    const auto& x = a.values();
    const auto& y = b.values();
    return x.size() == y.size() &&
           (x.empty() || std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0);
}

Transition make_transition(Observation state, ActionValue action, double reward,
                           Observation next_state, bool done, AgentId advisor,
                           std::size_t group_size) {
    if (advisor >= group_size) throw ContractViolation("advisor id out of range");
    if (!std::isfinite(reward)) throw ContractViolation("non-finite reward");
    if (!all_finite(state) || !all_finite(next_state))
        throw ContractViolation("non-finite observation in transition");
    return Transition{std::move(state), std::move(action), reward, std::move(next_state), done,
                      advisor};
}

std::size_t Rng::uniform_index(std::size_t n) {
    if (n == 0) throw ContractViolation("uniform_index(0)");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void fnv_byte(std::uint64_t& h, unsigned char b) {
    h ^= b;
    h *= kFnvPrime;
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::span<const PathPart> path) {
    if (path.empty()) throw ContractViolation("derive_rng: empty path");
    std::uint64_t h = kFnvOffset;
    for (const auto& part : path) {
        // Type tag and length prefix keep ("a","b") distinct from ("ab").
        if (part.is_label()) {
            const auto label = part.label();
            fnv_byte(h, 's');
            for (int k = 0; k < 8; ++k) fnv_byte(h, static_cast<unsigned char>(label.size() >> (8 * k)));
            for (char c : label) fnv_byte(h, static_cast<unsigned char>(c));
        } else {
            const std::uint64_t v = part.index();
            fnv_byte(h, 'i');
            for (int k = 0; k < 8; ++k) fnv_byte(h, static_cast<unsigned char>(v >> (8 * k)));
        }
    }
    return splitmix64(splitmix64(master) ^ splitmix64(h));
}

Rng derive_rng(std::uint64_t master, std::span<const PathPart> path) {
    return Rng(derive_seed(master, path));
}

Rng derive_rng(std::uint64_t master, std::initializer_list<PathPart> path) {
    return derive_rng(master, std::span<const PathPart>(path.begin(), path.size()));
}

Rng derive_rng(const SeedSpec& spec) {
    std::vector<PathPart> parts(spec.path.begin(), spec.path.end());
    return derive_rng(spec.master_seed, parts);
}

} // namespace peerlab

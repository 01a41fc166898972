#include "peerlab/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace peerlab {

void write_checkpoint(std::ostream& out, const std::string& kind, const std::vector<Tensor>& tensors) {
    out << "peerlab-checkpoint " << kCheckpointVersion << '\n';
    out << "kind " << kind << '\n';
    out << "tensors " << tensors.size() << '\n';
    char buf[64];
    for (const auto& t : tensors) {
        if (t.data.size() != t.rows * t.cols) throw std::logic_error("tensor shape mismatch: " + t.name);
        out << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
        for (std::size_t r = 0; r < t.rows; ++r) {
            for (std::size_t c = 0; c < t.cols; ++c) {
                std::snprintf(buf, sizeof buf, "%a", t.data[r * t.cols + c]);
                out << (c ? " " : "") << buf;
            }
            out << '\n';
        }
    }
    if (!out) throw std::runtime_error("checkpoint write failed");
}

std::vector<Tensor> read_checkpoint(std::istream& in, const std::string& expected_kind) {
    std::string word;
    int version = 0;
    if (!(in >> word >> version) || word != "peerlab-checkpoint")
        throw std::runtime_error("not a peerlab checkpoint");
    if (version != kCheckpointVersion)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    std::string kind;
    if (!(in >> word >> kind) || word != "kind") throw std::runtime_error("checkpoint: missing kind");
    if (kind != expected_kind)
        throw std::runtime_error("checkpoint kind '" + kind + "' does not match '" + expected_kind + "'");
    std::size_t count = 0;
    if (!(in >> word >> count) || word != "tensors") throw std::runtime_error("checkpoint: missing tensor count");
    std::vector<Tensor> tensors(count);
    for (auto& t : tensors) {
        if (!(in >> t.name >> t.rows >> t.cols)) throw std::runtime_error("checkpoint: bad tensor header");
        t.data.resize(t.rows * t.cols);
        for (auto& v : t.data) {
            if (!(in >> word)) throw std::runtime_error("checkpoint: truncated tensor " + t.name);
            char* end = nullptr;
            v = std::strtod(word.c_str(), &end);
            if (end == word.c_str() || *end != '\0') throw std::runtime_error("checkpoint: bad value " + word);
        }
    }
    return tensors;
}

} // namespace peerlab

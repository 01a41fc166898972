#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace peerlab {

/// Named dense tensor, row-major.
struct Tensor {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;
};

/// Text checkpoint:
///
///   peerlab-checkpoint 1
///   kind <learner-kind>
///   tensors <count>
///   <name> <rows> <cols>
///   <rows*cols hex-float values, one row per line>
///   ...
///
/// Values are written as C99 hex floats so a round trip is exact.
inline constexpr int kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const std::string& kind, const std::vector<Tensor>& tensors);

/// Throws std::runtime_error on malformed input, version or kind mismatch.
std::vector<Tensor> read_checkpoint(std::istream& in, const std::string& expected_kind);

} // namespace peerlab

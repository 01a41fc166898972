#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace peerlab {

/// Raised for unreadable or malformed result files.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CurveRow {
    std::string run_id;
    std::uint64_t seed = 0;
    std::size_t agent_id = 0;
    std::size_t step = 0;
    double solo_return = 0.0;
    double train_return = 0.0;
};

std::vector<CurveRow> read_curves_csv(std::istream& in);
std::vector<CurveRow> read_curves_csv(const std::string& path);

enum class CurveMetric { Solo, Train };

/// Mean and standard error across seeds of the per-seed agent average.
struct Band {
    std::string name;
    std::vector<double> x, mean, sem;
};

std::vector<Band> curve_bands(const std::vector<CurveRow>& rows, CurveMetric metric);

struct ChartLabels {
    std::string title;
    std::string x = "step";
    std::string y = "return";
};

/// Line chart with shaded mean +- SEM bands, one colour per band.
std::string render_svg(const std::vector<Band>& bands, const ChartLabels& labels);

/// Reads <dir>/curves.csv and writes solo_return.svg and train_return.svg to
/// `out_dir`. Returns the written paths.
std::vector<std::string> plot_curves(const std::string& dir, const std::string& out_dir);

} // namespace peerlab

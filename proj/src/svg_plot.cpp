#include "peerlab/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace peerlab {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

template <class T>
T parse_field(const std::string& s, std::size_t line, const char* what) {
    std::istringstream in(s);
    T v{};
    if (!(in >> v) || !in.eof()) {
        throw DataError("curves.csv line " + std::to_string(line) + ": bad " + what + " '" + s + "'");
    }
    return v;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

// Round tick spacing (1, 2 or 5 times a power of ten) giving about `target` ticks.
double tick_step(double span, int target) {
    if (span <= 0) return 1.0;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0})
        if (raw <= m * mag) return m * mag;
    return 10.0 * mag;
}

std::string tick_label(double v) {
    char buf[32];
    if (std::abs(v) >= 10000) std::snprintf(buf, sizeof buf, "%gk", v / 1000.0);
    else std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
                          "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

} // namespace

std::vector<CurveRow> read_curves_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("curves.csv is empty");
    if (line != "run_id,seed,agent_id,step,solo_return,train_return")
        throw DataError("curves.csv has an unexpected header: '" + line + "'");
    std::vector<CurveRow> rows;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 6)
            throw DataError("curves.csv line " + std::to_string(n) + ": expected 6 fields, got " +
                            std::to_string(f.size()));
        CurveRow r;
        r.run_id = f[0];
        r.seed = parse_field<std::uint64_t>(f[1], n, "seed");
        r.agent_id = parse_field<std::size_t>(f[2], n, "agent_id");
        r.step = parse_field<std::size_t>(f[3], n, "step");
        r.solo_return = parse_field<double>(f[4], n, "solo_return");
        r.train_return = parse_field<double>(f[5], n, "train_return");
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<CurveRow> read_curves_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return read_curves_csv(in);
}

std::vector<Band> curve_bands(const std::vector<CurveRow>& rows, CurveMetric metric) {
    // run_id -> step -> seed -> (sum, count)
    std::map<std::string, std::map<std::size_t, std::map<std::uint64_t, std::pair<double, int>>>> acc;
    std::vector<std::string> order;
    for (const auto& r : rows) {
        if (!acc.count(r.run_id)) order.push_back(r.run_id);
        auto& cell = acc[r.run_id][r.step][r.seed];
        cell.first += metric == CurveMetric::Solo ? r.solo_return : r.train_return;
        ++cell.second;
    }
    std::vector<Band> bands;
    for (const auto& name : order) {
        Band b;
        b.name = name;
        for (const auto& [step, seeds] : acc[name]) {
            std::vector<double> v;
            for (const auto& [seed, sc] : seeds) v.push_back(sc.first / sc.second);
            double mean = 0;
            for (double x : v) mean += x;
            mean /= static_cast<double>(v.size());
            double var = 0;
            for (double x : v) var += (x - mean) * (x - mean);
            const double sem = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) /
                                                  std::sqrt(static_cast<double>(v.size()))
                                            : 0.0;
            b.x.push_back(static_cast<double>(step));
            b.mean.push_back(mean);
            b.sem.push_back(sem);
        }
        bands.push_back(std::move(b));
    }
    return bands;
}

std::string render_svg(const std::vector<Band>& bands, const ChartLabels& labels) {
    const double width = 720, height = 440;
    const double left = 70, right = 170, top = 40, bottom = 55;
    const double pw = width - left - right, ph = height - top - bottom;

    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& b : bands)
        for (std::size_t k = 0; k < b.x.size(); ++k) {
            x0 = std::min(x0, b.x[k]);
            x1 = std::max(x1, b.x[k]);
            y0 = std::min(y0, b.mean[k] - b.sem[k]);
            y1 = std::max(y1, b.mean[k] + b.sem[k]);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto sy = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << num(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << escape(labels.title) << "</text>\n";

    // Grid and ticks.
    const double xs = tick_step(x1 - x0, 6), ys = tick_step(y1 - y0, 6);
    for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9 * xs; t += xs) {
        svg << "<line x1=\"" << num(sx(t)) << "\" y1=\"" << num(top) << "\" x2=\"" << num(sx(t)) << "\" y2=\""
            << num(top + ph) << "\" stroke=\"#e5e5e5\"/>\n";
        svg << "<text x=\"" << num(sx(t)) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">"
            << tick_label(t) << "</text>\n";
    }
    for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9 * ys; t += ys) {
        svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(sy(t)) << "\" x2=\"" << num(left + pw) << "\" y2=\""
            << num(sy(t)) << "\" stroke=\"#e5e5e5\"/>\n";
        svg << "<text x=\"" << num(left - 8) << "\" y=\"" << num(sy(t) + 4) << "\" text-anchor=\"end\">"
            << tick_label(std::abs(t) < 1e-12 ? 0.0 : t) << "</text>\n";
    }
    svg << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\""
        << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 12) << "\" text-anchor=\"middle\">"
        << escape(labels.x) << "</text>\n";
    svg << "<text transform=\"translate(18," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape(labels.y) << "</text>\n";

    for (std::size_t i = 0; i < bands.size(); ++i) {
        const auto& b = bands[i];
        const char* colour = kPalette[i % std::size(kPalette)];
        if (b.x.empty()) continue;
        svg << "<polygon fill=\"" << colour << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
        for (std::size_t k = 0; k < b.x.size(); ++k) svg << num(sx(b.x[k])) << ',' << num(sy(b.mean[k] + b.sem[k])) << ' ';
        for (std::size_t k = b.x.size(); k-- > 0;) svg << num(sx(b.x[k])) << ',' << num(sy(b.mean[k] - b.sem[k])) << ' ';
        svg << "\"/>\n";
        svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.8\" points=\"";
        for (std::size_t k = 0; k < b.x.size(); ++k) svg << num(sx(b.x[k])) << ',' << num(sy(b.mean[k])) << ' ';
        svg << "\"/>\n";

        const double ly = top + 14 + 20.0 * static_cast<double>(i);
        svg << "<line x1=\"" << num(left + pw + 14) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(left + pw + 36)
            << "\" y2=\"" << num(ly) << "\" stroke=\"" << colour << "\" stroke-width=\"3\"/>\n";
        svg << "<text x=\"" << num(left + pw + 42) << "\" y=\"" << num(ly + 4) << "\">" << escape(b.name)
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::vector<std::string> plot_curves(const std::string& dir, const std::string& out_dir) {
    const auto rows = read_curves_csv((std::filesystem::path(dir) / "curves.csv").string());
    if (rows.empty()) throw DataError("curves.csv in '" + dir + "' has no data rows");
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> written;
    const std::pair<CurveMetric, const char*> metrics[] = {{CurveMetric::Solo, "solo_return"},
                                                           {CurveMetric::Train, "train_return"}};
    for (const auto& [metric, name] : metrics) {
        ChartLabels labels;
        labels.title = metric == CurveMetric::Solo ? "Solo evaluation return" : "Training episode return";
        const auto path = (std::filesystem::path(out_dir) / (std::string(name) + ".svg")).string();
        std::ofstream out(path);
        if (!out) throw DataError("cannot write '" + path + "'");
        out << render_svg(curve_bands(rows, metric), labels);
        written.push_back(path);
    }
    return written;
}

} // namespace peerlab

/*
 * Copyright 2026 The mfcv Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#ifndef MFCV_OUTPUT_HPP
#define MFCV_OUTPUT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfcv/config.hpp"
#include "mfcv/harness.hpp"

namespace mfcv {

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 17 significant digits, enough to round-trip a double.
inline std::string fmt_num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string trace_header(int input_dim)
{
    std::string h = "iteration,batch_index";
    for (int j = 0; j < input_dim; ++j)
        h += ",x_" + std::to_string(j);
    h += ",s,y,query_cost,cumulative_cost,rmse,fallback_flag";
    return h;
}

inline std::string trace_csv(const RunRecord& run)
{
    std::ostringstream out;
    out << trace_header(run.input_dim) << '\n';
    for (const auto& r : run.rows) {
        out << r.iteration << ',' << r.batch_index;
        for (Eigen::Index j = 0; j < r.x.size(); ++j)
            out << ',' << fmt_num(r.x[j]);
        out << ',' << fmt_num(r.s) << ',' << fmt_num(r.y) << ',' << fmt_num(r.query_cost) << ','
            << fmt_num(r.cumulative_cost) << ',' << fmt_num(r.rmse) << ',' << (r.fallback ? 1 : 0) << '\n';
    }
    return out.str();
}

/// All runs in one file, prefixed by strategy and repetition.
inline std::string combined_trace_csv(const SuiteReport& rep)
{
    std::ostringstream out;
    const int d = rep.runs.empty() ? 0 : static_cast<int>(rep.config.make_function().input_dim());
    out << "strategy,repetition," << trace_header(d) << '\n';
    for (const auto& r : rep.runs) {
        if (r.failed)
            continue;
        std::string body = trace_csv(r);
        std::istringstream lines(body);
        std::string line;
        std::getline(lines, line);
        while (std::getline(lines, line))
            out << to_string(r.strategy) << ',' << r.repetition << ',' << line << '\n';
    }
    return out.str();
}

inline const char* kSummaryHeader = "strategy,cost,rmse_mean,rmse_std";
inline const char* kHistogramHeader = "strategy,bin_lower,bin_upper,count,fraction";
inline const char* kRunsHeader =
    "strategy,repetition,status,acquisitions,final_cost,final_rmse,fallbacks,wall_seconds,error";

inline std::string summary_csv(const SuiteReport& rep)
{
    std::ostringstream out;
    out << kSummaryHeader << '\n';
    for (const auto& s : rep.summaries)
        for (std::size_t g = 0; g < rep.cost_grid.size(); ++g)
            out << to_string(s.strategy) << ',' << fmt_num(rep.cost_grid[g]) << ',' << fmt_num(s.mean[g]) << ','
                << fmt_num(s.stddev[g]) << '\n';
    return out.str();
}

inline std::string histogram_csv(const SuiteReport& rep)
{
    std::ostringstream out;
    out << kHistogramHeader << '\n';
    for (const auto& s : rep.summaries) {
        int total = 0;
        for (const auto& b : s.histogram)
            total += b.count;
        for (const auto& b : s.histogram)
            out << to_string(s.strategy) << ',' << fmt_num(b.lower) << ',' << fmt_num(b.upper) << ',' << b.count
                << ',' << fmt_num(total ? static_cast<double>(b.count) / total : 0.0) << '\n';
    }
    return out.str();
}

inline std::string csv_quote(const std::string& s)
{
    std::string out = "\"";
    for (char c : s)
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

inline std::string runs_csv(const SuiteReport& rep)
{
    std::ostringstream out;
    out << kRunsHeader << '\n';
    for (const auto& r : rep.runs) {
        double wall = 0.0;
        for (double w : r.wall_seconds)
            wall += w;
        out << to_string(r.strategy) << ',' << r.repetition << ',' << (r.failed ? "failed" : "ok") << ','
            << r.acquisitions().size() << ','
            << fmt_num(r.iteration_cost.empty() ? 0.0 : r.iteration_cost.back()) << ','
            << fmt_num(r.iteration_rmse.empty() ? 0.0 : r.iteration_rmse.back()) << ',' << r.fallbacks << ','
            << fmt_num(wall) << ',' << csv_quote(r.error) << '\n';
    }
    return out.str();
}

namespace svg {

inline const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

struct Frame {
    double width = 720, height = 480;
    double left = 80, right = 170, top = 40, bottom = 60;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1; // data ranges (y already transformed)

    double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
    double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

inline std::string header(const Frame& f, const std::string& title)
{
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
      << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << f.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
      << "</text>\n"
      << "<rect x=\"" << f.left << "\" y=\"" << f.top << "\" width=\"" << f.width - f.left - f.right
      << "\" height=\"" << f.height - f.top - f.bottom << "\" fill=\"none\" stroke=\"#444\"/>\n";
    return o.str();
}

inline std::string fmt_tick(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

} // namespace svg

/// RMSE (log scale) against cumulative cost: mean line plus a shaded +-1 std band per strategy.
inline std::string rmse_plot_svg(const SuiteReport& rep)
{
    if (rep.cost_grid.empty() || rep.summaries.empty())
        throw OutputError("rmse_plot_svg: empty summary");
    svg::Frame f;
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& s : rep.summaries) {
        if (s.completed == 0)
            continue;
        for (std::size_t g = 0; g < s.mean.size(); ++g) {
            const double upper = s.mean[g] + s.stddev[g];
            const double lower = s.mean[g] - s.stddev[g];
            if (s.mean[g] > 0)
                lo = std::min(lo, lower > 0 ? lower : s.mean[g]);
            hi = std::max(hi, upper);
        }
    }
    if (!std::isfinite(lo) || !(hi > 0)) {
        lo = 1e-3;
        hi = 1.0;
    }
    f.y0 = std::floor(std::log10(lo));
    f.y1 = std::ceil(std::log10(hi));
    if (f.y1 <= f.y0)
        f.y1 = f.y0 + 1;
    f.x0 = rep.cost_grid.front();
    f.x1 = rep.cost_grid.back() > f.x0 ? rep.cost_grid.back() : f.x0 + 1.0;
    auto ly = [&](double v) { return f.py(std::log10(std::max(v, std::pow(10.0, f.y0)))); };

    std::ostringstream o;
    o << svg::header(f, "RMSE at target fidelity vs cumulative cost");
    for (int e = static_cast<int>(f.y0); e <= static_cast<int>(f.y1); ++e) {
        const double y = f.py(e);
        o << "<line x1=\"" << f.left << "\" x2=\"" << f.width - f.right << "\" y1=\"" << y << "\" y2=\"" << y
          << "\" stroke=\"#ddd\"/>\n<text x=\"" << f.left - 6 << "\" y=\"" << y + 4
          << "\" text-anchor=\"end\">1e" << e << "</text>\n";
    }
    for (int t = 0; t <= 5; ++t) {
        const double c = f.x0 + (f.x1 - f.x0) * t / 5.0;
        o << "<text x=\"" << f.px(c) << "\" y=\"" << f.height - f.bottom + 18 << "\" text-anchor=\"middle\">"
          << svg::fmt_tick(c) << "</text>\n";
    }
    o << "<text x=\"" << (f.left + f.width - f.right) / 2 << "\" y=\"" << f.height - 15
      << "\" text-anchor=\"middle\">cumulative cost</text>\n"
      << "<text transform=\"rotate(-90)\" x=\"" << -(f.top + f.height - f.bottom) / 2 << "\" y=\"20\""
      << " text-anchor=\"middle\">RMSE (s = 1)</text>\n";

    int k = 0;
    for (const auto& s : rep.summaries) {
        const char* color = svg::kPalette[k % 5];
        const std::size_t G = rep.cost_grid.size();
        if (s.completed > 0) {
            if (G == 1) {
                o << "<circle class=\"series\" data-strategy=\"" << to_string(s.strategy) << "\" cx=\""
                  << f.px(rep.cost_grid[0]) << "\" cy=\"" << ly(s.mean[0]) << "\" r=\"4\" fill=\"" << color
                  << "\"/>\n";
            } else {
                o << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
                for (std::size_t g = 0; g < G; ++g)
                    o << f.px(rep.cost_grid[g]) << ',' << ly(s.mean[g] + s.stddev[g]) << ' ';
                for (std::size_t g = G; g-- > 0;)
                    o << f.px(rep.cost_grid[g]) << ',' << ly(s.mean[g] - s.stddev[g]) << ' ';
                o << "\"/>\n<polyline class=\"series\" data-strategy=\"" << to_string(s.strategy)
                  << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
                for (std::size_t g = 0; g < G; ++g)
                    o << f.px(rep.cost_grid[g]) << ',' << ly(s.mean[g]) << ' ';
                o << "\"/>\n";
            }
        }
        const double ly0 = f.top + 10 + 20 * k;
        o << "<rect x=\"" << f.width - f.right + 15 << "\" y=\"" << ly0 << "\" width=\"14\" height=\"4\" fill=\""
          << color << "\"/><text class=\"legend\" x=\"" << f.width - f.right + 35 << "\" y=\"" << ly0 + 6 << "\">"
          << to_string(s.strategy) << "</text>\n";
        ++k;
    }
    o << "</svg>\n";
    return o.str();
}

/// Grouped bar chart of selected-fidelity fractions per strategy.
inline std::string histogram_plot_svg(const SuiteReport& rep)
{
    if (rep.summaries.empty())
        throw OutputError("histogram_plot_svg: empty summary");
    svg::Frame f;
    std::size_t bins = 0;
    for (const auto& s : rep.summaries)
        bins = std::max(bins, s.histogram.size());
    f.x0 = 0;
    f.x1 = static_cast<double>(std::max<std::size_t>(bins, 1));
    f.y0 = 0;
    f.y1 = 1;
    std::ostringstream o;
    o << svg::header(f, "Fidelity levels selected");
    for (int t = 0; t <= 4; ++t) {
        const double y = f.py(t / 4.0);
        o << "<line x1=\"" << f.left << "\" x2=\"" << f.width - f.right << "\" y1=\"" << y << "\" y2=\"" << y
          << "\" stroke=\"#ddd\"/>\n<text x=\"" << f.left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
          << svg::fmt_tick(t / 4.0) << "</text>\n";
    }
    const double groups = static_cast<double>(rep.summaries.size());
    int k = 0;
    for (const auto& s : rep.summaries) {
        const char* color = svg::kPalette[k % 5];
        int total = 0;
        for (const auto& b : s.histogram)
            total += b.count;
        for (std::size_t b = 0; b < s.histogram.size(); ++b) {
            const double frac = total ? static_cast<double>(s.histogram[b].count) / total : 0.0;
            const double x = f.px(static_cast<double>(b) + 0.1 + 0.8 * k / groups);
            const double w = f.px(0.8 / groups) - f.px(0);
            o << "<rect class=\"bar\" data-strategy=\"" << to_string(s.strategy) << "\" x=\"" << x << "\" y=\""
              << f.py(frac) << "\" width=\"" << w << "\" height=\"" << f.py(0) - f.py(frac) << "\" fill=\""
              << color << "\"/>\n";
        }
        const double ly0 = f.top + 10 + 20 * k;
        o << "<rect x=\"" << f.width - f.right + 15 << "\" y=\"" << ly0 << "\" width=\"14\" height=\"10\" fill=\""
          << color << "\"/><text class=\"legend\" x=\"" << f.width - f.right + 35 << "\" y=\"" << ly0 + 9 << "\">"
          << to_string(s.strategy) << "</text>\n";
        ++k;
    }
    if (!rep.summaries.empty()) {
        const auto& hist = rep.summaries.front().histogram;
        for (std::size_t b = 0; b < hist.size(); ++b) {
            std::string label = hist[b].lower == hist[b].upper
                                    ? svg::fmt_tick(hist[b].lower)
                                    : svg::fmt_tick(hist[b].lower) + "-" + svg::fmt_tick(hist[b].upper);
            o << "<text x=\"" << f.px(b + 0.5) << "\" y=\"" << f.height - f.bottom + 18
              << "\" text-anchor=\"middle\" font-size=\"10\">" << label << "</text>\n";
        }
    }
    o << "<text x=\"" << (f.left + f.width - f.right) / 2 << "\" y=\"" << f.height - 15
      << "\" text-anchor=\"middle\">fidelity s</text>\n</svg>\n";
    return o.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out)
        throw OutputError("cannot write " + p.string());
}

inline std::string trace_filename(const RunRecord& r)
{
    return "trace_" + to_string(r.strategy) + "_rep" + std::to_string(r.repetition) + ".csv";
}

/// Staging directory next to the final bundle location; verifies it is writable.
inline std::filesystem::path prepare_output(const std::filesystem::path& out)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    if (fs::exists(out) && !fs::is_directory(out))
        throw OutputError("output path '" + out.string() + "' exists and is not a directory");
    fs::path staging = out;
    staging += ".partial";
    fs::remove_all(staging, ec);
    fs::create_directories(staging, ec);
    if (ec)
        throw OutputError("cannot create output directory '" + staging.string() + "': " + ec.message());
    try {
        write_text(staging / ".probe", "");
    } catch (const OutputError&) {
        throw OutputError("output directory '" + staging.string() + "' is not writable");
    }
    fs::remove(staging / ".probe", ec);
    return staging;
}

/// Write every artifact into the staging directory, then move it into place.
/// An existing directory at `out` is replaced only if it is empty or holds a previous bundle.
inline void write_bundle(const SuiteReport& rep, const std::filesystem::path& staging, const std::filesystem::path& out)
{
    namespace fs = std::filesystem;
    fs::create_directories(staging / "plots");
    write_text(staging / "config.json", config_to_json(rep.config).dump(2) + "\n");
    for (const auto& r : rep.runs)
        if (!r.failed)
            write_text(staging / trace_filename(r), trace_csv(r));
    write_text(staging / "trace.csv", combined_trace_csv(rep));
    write_text(staging / "summary.csv", summary_csv(rep));
    write_text(staging / "fidelity_hist.csv", histogram_csv(rep));
    write_text(staging / "runs.csv", runs_csv(rep));
    write_text(staging / "plots" / "rmse_vs_cost.svg", rmse_plot_svg(rep));
    write_text(staging / "plots" / "fidelity_hist.svg", histogram_plot_svg(rep));

    std::error_code ec;
    if (fs::exists(out)) {
        const bool empty = fs::is_empty(out);
        if (!empty && !fs::exists(out / "config.json"))
            throw OutputError("refusing to replace '" + out.string() + "': not an mfcv output bundle");
        fs::remove_all(out, ec);
        if (ec)
            throw OutputError("cannot replace '" + out.string() + "': " + ec.message());
    }
    fs::rename(staging, out, ec);
    if (ec)
        throw OutputError("cannot move bundle into '" + out.string() + "': " + ec.message());
}

/// run_suite plus artifact writing; fails on an unwritable output before any computation.
inline SuiteReport run_command(const ExperimentConfig& cfg)
{
    const std::filesystem::path out(cfg.output_dir);
    const auto staging = prepare_output(out);
    SuiteReport rep = run_suite(cfg);
    write_bundle(rep, staging, out);
    return rep;
}

} // namespace mfcv

#endif // MFCV_OUTPUT_HPP

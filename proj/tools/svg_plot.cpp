#include "svg_plot.hpp"

#include "cci/io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cci::plot {

namespace {

std::string num(double v) {
    // two decimals are plenty for pixel coordinates
    return io::format_double(std::round(v * 100.0) / 100.0);
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Frame {
    double x0, y0, w, h;
    double lo, hi;
    Eigen::Index steps;

    [[nodiscard]] double x(Eigen::Index i) const {
        return x0 + (steps > 1 ? w * static_cast<double>(i) / static_cast<double>(steps - 1) : w / 2);
    }
    [[nodiscard]] double y(double v) const { return y0 + h * (hi - v) / (hi - lo); }
};

}  // namespace

std::string irf_panel_svg(const std::vector<BandPanel>& panels, const Layout& layout) {
    const int cols = std::max(1, layout.columns);
    const int rows = static_cast<int>((panels.size() + static_cast<std::size_t>(cols) - 1) / static_cast<std::size_t>(cols));
    const int top = layout.caption.empty() ? 0 : 28;
    const int width = cols * layout.panel_width;
    const int height = top + std::max(rows, 1) * layout.panel_height;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!layout.caption.empty()) {
        svg << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
            << escape(layout.caption) << "</text>\n";
    }
    for (std::size_t k = 0; k < panels.size(); ++k) {
        const auto& p = panels[k];
        const int col = static_cast<int>(k % static_cast<std::size_t>(cols));
        const int row = static_cast<int>(k / static_cast<std::size_t>(cols));
        const double ox = col * layout.panel_width;
        const double oy = top + row * layout.panel_height;
        double lo = std::min({0.0, p.lower.minCoeff(), p.point.minCoeff()});
        double hi = std::max({0.0, p.upper.maxCoeff(), p.point.maxCoeff()});
        if (hi - lo < 1e-12) {
            lo -= 1.0;
            hi += 1.0;
        }
        const double pad = 0.05 * (hi - lo);
        const Frame f{ox + 40, oy + 24, layout.panel_width - 52.0, layout.panel_height - 48.0, lo - pad, hi + pad,
                      p.point.size()};

        svg << "<g>\n";
        svg << "<text x=\"" << num(ox + layout.panel_width / 2.0) << "\" y=\"" << num(oy + 16)
            << "\" text-anchor=\"middle\">" << escape(p.title) << "</text>\n";
        svg << "<rect x=\"" << num(f.x0) << "\" y=\"" << num(f.y0) << "\" width=\"" << num(f.w) << "\" height=\""
            << num(f.h) << "\" fill=\"none\" stroke=\"#999\"/>\n";

        svg << "<path d=\"";
        for (Eigen::Index i = 0; i < p.upper.size(); ++i) svg << (i == 0 ? 'M' : 'L') << num(f.x(i)) << ',' << num(f.y(p.upper(i))) << ' ';
        for (Eigen::Index i = p.lower.size() - 1; i >= 0; --i) svg << 'L' << num(f.x(i)) << ',' << num(f.y(p.lower(i))) << ' ';
        svg << "Z\" fill=\"#8fd18f\" fill-opacity=\"0.6\" stroke=\"none\"/>\n";

        svg << "<line x1=\"" << num(f.x0) << "\" y1=\"" << num(f.y(0.0)) << "\" x2=\"" << num(f.x0 + f.w) << "\" y2=\""
            << num(f.y(0.0)) << "\" stroke=\"#444\" stroke-dasharray=\"3,3\"/>\n";

        svg << "<polyline fill=\"none\" stroke=\"#1f3f8f\" stroke-width=\"1.6\" points=\"";
        for (Eigen::Index i = 0; i < p.point.size(); ++i) svg << num(f.x(i)) << ',' << num(f.y(p.point(i))) << ' ';
        svg << "\"/>\n";

        // axis ticks: horizon start/end and value range
        svg << "<text x=\"" << num(f.x0) << "\" y=\"" << num(f.y0 + f.h + 14) << "\" text-anchor=\"middle\">0</text>\n";
        svg << "<text x=\"" << num(f.x0 + f.w) << "\" y=\"" << num(f.y0 + f.h + 14) << "\" text-anchor=\"middle\">"
            << (p.point.size() - 1) << "</text>\n";
        svg << "<text x=\"" << num(f.x0 - 4) << "\" y=\"" << num(f.y0 + 4) << "\" text-anchor=\"end\">"
            << num(f.hi) << "</text>\n";
        svg << "<text x=\"" << num(f.x0 - 4) << "\" y=\"" << num(f.y0 + f.h) << "\" text-anchor=\"end\">"
            << num(f.lo) << "</text>\n";
        svg << "</g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace cci::plot

#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace relqho::svg {

struct Curve {
    std::string label;
    std::string color;
    std::vector<double> x, y;
};

/// Self-contained SVG line chart; enough for eyeballing series output without
/// a plotting stack.
inline std::string line_chart(const std::string& title, const std::vector<Curve>& curves,
                              int width = 900, int height = 480) {
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& c : curves)
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            if (first) {
                xmin = xmax = c.x[i];
                ymin = ymax = c.y[i];
                first = false;
            }
            xmin = std::min(xmin, c.x[i]);
            xmax = std::max(xmax, c.x[i]);
            ymin = std::min(ymin, c.y[i]);
            ymax = std::max(ymax, c.y[i]);
        }
    if (xmax == xmin)
        xmax = xmin + 1;
    if (ymax == ymin) {
        ymax += 0.5;
        ymin -= 0.5;
    }
    const double ml = 70, mr = 20, mt = 40, mb = 40;
    auto X = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto Y = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
       << title << "</text>\n";
    // axes
    os << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
       << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
       << height - mb << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = xmin + k * (xmax - xmin) / 4;
        const double yv = ymin + k * (ymax - ymin) / 4;
        os << "<text x=\"" << X(xv) << "\" y=\"" << height - mb + 18
           << "\" text-anchor=\"middle\" font-size=\"11\">" << xv << "</text>\n";
        os << "<text x=\"" << ml - 6 << "\" y=\"" << Y(yv) + 4
           << "\" text-anchor=\"end\" font-size=\"11\">" << yv << "</text>\n";
    }
    int li = 0;
    for (const auto& c : curves) {
        os << "<polyline fill=\"none\" stroke=\"" << c.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < c.x.size(); ++i)
            os << X(c.x[i]) << "," << Y(c.y[i]) << " ";
        os << "\"/>\n";
        os << "<text x=\"" << width - mr - 6 << "\" y=\"" << mt + 16 * li++
           << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << c.color << "\">" << c.label
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace relqho::svg

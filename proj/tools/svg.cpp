#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace agenda::svg {

namespace {

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

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string rgb(int r, int g, int b) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

// Blue for negative, red for positive, white at zero; t in [-1, 1].
std::string diverging_color(double t) {
    t = std::clamp(t, -1.0, 1.0);
    const int fade = static_cast<int>(std::lround(255 * (1 - std::fabs(t))));
    return t >= 0 ? rgb(255, fade, fade) : rgb(fade, fade, 255);
}

std::string sequential_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const int fade = static_cast<int>(std::lround(255 * (1 - t)));
    return rgb(fade, fade, 255 - static_cast<int>(std::lround(80 * t)));
}

}  // namespace

std::string bar_chart(const std::string& title, const std::vector<Bar>& bars) {
    const double label_w = 170, plot_w = 360, row_h = 26, top = 40;
    double lo = 0, hi = 0;
    for (const auto& b : bars) lo = std::min(lo, b.value), hi = std::max(hi, b.value);
    if (hi - lo < 1e-12) hi = lo + 1;
    const double width = label_w + plot_w + 70;
    const double height = top + row_h * static_cast<double>(bars.size()) + 20;
    auto x_of = [&](double v) { return label_w + (v - lo) / (hi - lo) * plot_w; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<text x=\"10\" y=\"22\" font-size=\"15\">" << escape(title) << "</text>\n";
    const double zero = x_of(0);
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double y = top + row_h * static_cast<double>(i);
        const double x = std::min(zero, x_of(bars[i].value));
        const double w = std::fabs(x_of(bars[i].value) - zero);
        out << "<text x=\"" << num(label_w - 8) << "\" y=\"" << num(y + 15) << "\" text-anchor=\"end\">"
            << escape(bars[i].label) << "</text>\n";
        out << "<rect x=\"" << num(x) << "\" y=\"" << num(y + 3) << "\" width=\"" << num(w)
            << "\" height=\"18\" fill=\"" << (bars[i].value >= 0 ? "#d9534f" : "#428bca") << "\"/>\n";
        out << "<text x=\"" << num(std::max(zero, x_of(bars[i].value)) + 4) << "\" y=\"" << num(y + 15) << "\">"
            << num(bars[i].value) << "</text>\n";
    }
    out << "<line x1=\"" << num(zero) << "\" y1=\"" << num(top) << "\" x2=\"" << num(zero) << "\" y2=\""
        << num(height - 20) << "\" stroke=\"#333\"/>\n";
    out << "</svg>\n";
    return out.str();
}

std::string heatmap(const std::string& title, const std::vector<std::string>& rows,
                    const std::vector<std::string>& cols, const std::vector<std::vector<double>>& values,
                    const std::vector<std::vector<std::string>>& marks, bool diverging) {
    const double label_w = 170, cell = 46, top = 130;
    double scale = 0;
    for (const auto& r : values) {
        for (double v : r) {
            if (std::isfinite(v)) scale = std::max(scale, diverging ? std::fabs(v) : v);
        }
    }
    if (scale < 1e-12) scale = 1;
    const double width = label_w + cell * static_cast<double>(cols.size()) + 20;
    const double height = top + cell * static_cast<double>(rows.size()) + 20;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<text x=\"10\" y=\"22\" font-size=\"15\">" << escape(title) << "</text>\n";
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const double x = label_w + cell * (static_cast<double>(c) + 0.5);
        out << "<text transform=\"translate(" << num(x) << "," << num(top - 6) << ") rotate(-55)\">"
            << escape(cols[c]) << "</text>\n";
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const double y = top + cell * static_cast<double>(r);
        out << "<text x=\"" << num(label_w - 8) << "\" y=\"" << num(y + cell / 2 + 4) << "\" text-anchor=\"end\">"
            << escape(rows[r]) << "</text>\n";
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const double v = values[r][c];
            const double x = label_w + cell * static_cast<double>(c);
            const std::string fill = !std::isfinite(v) ? "#eeeeee"
                                     : diverging       ? diverging_color(v / scale)
                                                       : sequential_color(v / scale);
            out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(cell) << "\" height=\""
                << num(cell) << "\" fill=\"" << fill << "\" stroke=\"#fff\"/>\n";
            std::string text = std::isfinite(v) ? num(v) : "";
            if (r < marks.size() && c < marks[r].size()) text += marks[r][c];
            out << "<text x=\"" << num(x + cell / 2) << "\" y=\"" << num(y + cell / 2 + 4)
                << "\" text-anchor=\"middle\">" << escape(text) << "</text>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace agenda::svg

#pragma once

#include <string>
#include <vector>

namespace agenda::svg {

struct Bar {
    std::string label;
    double value = 0.0;
};

/// Horizontal bar chart; negative values extend left of the axis.
std::string bar_chart(const std::string& title, const std::vector<Bar>& bars);

/// Grid of cells colored by value on a diverging (signed) or sequential scale.
/// `marks` (same shape, may be empty) is drawn inside the cells.
std::string heatmap(const std::string& title, const std::vector<std::string>& rows,
                    const std::vector<std::string>& cols, const std::vector<std::vector<double>>& values,
                    const std::vector<std::vector<std::string>>& marks, bool diverging);

}  // namespace agenda::svg

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace cci::plot {

struct BandPanel {
    std::string title;
    Eigen::VectorXd point;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

struct Layout {
    int columns = 2;
    int panel_width = 320;
    int panel_height = 200;
    std::string caption;
};

/// Small multiples of impulse responses: shaded band, point line, zero line.
[[nodiscard]] std::string irf_panel_svg(const std::vector<BandPanel>& panels, const Layout& layout = {});

}  // namespace cci::plot

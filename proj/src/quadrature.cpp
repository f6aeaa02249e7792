#include "taxhedge/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace taxhedge {

std::vector<QuadratureNode> simpson_plan(double a, double b, std::span<const double> breakpoints,
                                         std::size_t intervals) {
    if (!std::isfinite(a) || !std::isfinite(b) || b < a) throw std::invalid_argument("invalid quadrature interval");
    if (intervals < 2) throw std::invalid_argument("quadrature needs at least two sub-intervals");
    std::vector<QuadratureNode> plan;
    if (b == a) return plan;

    std::vector<double> cuts{a};
    for (double x : breakpoints)
        if (x > a && x < b) cuts.push_back(x);
    std::sort(cuts.begin() + 1, cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    cuts.push_back(b);

    const double total = b - a;
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double lo = cuts[p];
        const double hi = cuts[p + 1];
        const double share = static_cast<double>(intervals) * (hi - lo) / total;
        auto m = static_cast<std::size_t>(std::ceil(share));
        if (m < 2) m = 2;
        if (m % 2 == 1) ++m;
        const double h = (hi - lo) / static_cast<double>(m);
        for (std::size_t i = 0; i <= m; ++i) {
            const double w = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            const double s = (i == m) ? hi : lo + h * static_cast<double>(i);
            plan.push_back(QuadratureNode{s, w * h / 3.0, i == m ? Side::left : Side::right});
        }
    }
    return plan;
}

std::vector<double> plan_abscissae(std::span<const QuadratureNode> plan) {
    std::vector<double> xs;
    xs.reserve(plan.size());
    for (const auto& node : plan)
        if (xs.empty() || node.s != xs.back()) xs.push_back(node.s);
    return xs;
}

} // namespace taxhedge

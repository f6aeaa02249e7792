#pragma once

#include <span>
#include <vector>

namespace taxhedge {

// Which one-sided limit an integrand should use at a node sitting on a breakpoint.
enum class Side { left, right };

struct QuadratureNode {
    double s = 0.0;
    double weight = 0.0;
    Side side = Side::right;
};

// Composite Simpson rule on [a, b]. The interval is cut at every breakpoint,
// and each piece receives an even number of sub-intervals (at least two) in
// proportion to its length, `intervals` in total before rounding. Nodes at a
// breakpoint appear twice: once as the right end of the left piece (Side::left)
// and once as the left end of the right piece (Side::right).
std::vector<QuadratureNode> simpson_plan(double a, double b, std::span<const double> breakpoints,
                                         std::size_t intervals);

// Unique abscissae of a plan, in order.
std::vector<double> plan_abscissae(std::span<const QuadratureNode> plan);

} // namespace taxhedge

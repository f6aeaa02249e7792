#include "taxhedge/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace taxhedge {

PiecewiseConstant::PiecewiseConstant(std::vector<Segment> segments) {
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const Segment& s = segments[i];
        if (!std::isfinite(s.start) || !std::isfinite(s.end) || !std::isfinite(s.value))
            throw std::invalid_argument("segment " + std::to_string(i) + " has a non-finite field");
        if (!(s.start < s.end))
            throw std::invalid_argument("segment " + std::to_string(i) + " must satisfy start < end");
        if (i > 0 && s.start < segments[i - 1].end)
            throw std::invalid_argument("segment " + std::to_string(i) + " overlaps or precedes segment " +
                                        std::to_string(i - 1));
    }
    segments_ = std::move(segments);
}

PiecewiseConstant PiecewiseConstant::constant(double value, double start, double end) {
    return PiecewiseConstant({Segment{start, end, value}});
}

double PiecewiseConstant::operator()(double t) const {
    // first segment with start > t
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double x, const Segment& s) { return x < s.start; });
    if (it == segments_.begin()) return 0.0;
    const Segment& s = *std::prev(it);
    return t < s.end ? s.value : 0.0;
}

double PiecewiseConstant::left_limit(double t) const {
    // last segment with start < t
    auto it = std::lower_bound(segments_.begin(), segments_.end(), t,
                               [](const Segment& s, double x) { return s.start < x; });
    if (it == segments_.begin()) return 0.0;
    const Segment& s = *std::prev(it);
    return t <= s.end ? s.value : 0.0;
}

double PiecewiseConstant::integral(double a, double b) const {
    double total = 0.0;
    for (const Segment& s : segments_) {
        if (s.start >= b) break;
        const double lo = std::max(a, s.start);
        const double hi = std::min(b, s.end);
        if (hi > lo) total += s.value * (hi - lo);
    }
    return total;
}

double PiecewiseConstant::max_value() const {
    double m = 0.0;
    for (const Segment& s : segments_) m = std::max(m, s.value);
    return m;
}

double PiecewiseConstant::min_value() const {
    double m = 0.0;
    for (const Segment& s : segments_) m = std::min(m, s.value);
    return m;
}

void PiecewiseConstant::collect_breakpoints(double a, double b, std::vector<double>& out) const {
    for (const Segment& s : segments_) {
        if (s.start > a && s.start < b) out.push_back(s.start);
        if (s.end > a && s.end < b) out.push_back(s.end);
    }
}

bool PiecewiseConstant::is_zero() const {
    return std::all_of(segments_.begin(), segments_.end(), [](const Segment& s) { return s.value == 0.0; });
}

PiecewiseConstant PiecewiseConstant::scaled(double factor) const {
    std::vector<Segment> out = segments_;
    for (Segment& s : out) s.value *= factor;
    return PiecewiseConstant(std::move(out));
}

} // namespace taxhedge

#pragma once

#include <span>
#include <vector>

namespace taxhedge {

struct Segment {
    double start = 0.0;
    double end = 0.0;
    double value = 0.0;

    bool operator==(const Segment&) const = default;
};

// Right-continuous piecewise-constant function of time. Each segment covers
// [start, end); times outside every segment map to zero. left_limit gives the
// value on (t - eps, t), so a function defined on [0, T] is read at T from the left.
class PiecewiseConstant {
public:
    PiecewiseConstant() = default;
    explicit PiecewiseConstant(std::vector<Segment> segments);

    static PiecewiseConstant constant(double value, double start, double end);

    double operator()(double t) const;
    double left_limit(double t) const;

    // Exact integral over [a, b], a <= b.
    double integral(double a, double b) const;
    double max_value() const;
    double min_value() const;

    bool is_zero() const;
    std::span<const Segment> segments() const { return segments_; }

    // Appends every segment start/end strictly inside (a, b).
    void collect_breakpoints(double a, double b, std::vector<double>& out) const;

    PiecewiseConstant scaled(double factor) const;

private:
    std::vector<Segment> segments_;
};

} // namespace taxhedge

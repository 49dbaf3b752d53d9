#pragma once

#include <vector>

namespace modsel {

// Comparison tolerance for values of data-scale magnitude.
inline double tol_eq(double scale) { return 1e-9 * (1.0 + (scale < 0 ? -scale : scale)); }

// Continuous piecewise-linear function on the whole real line.
//
// Stored as strictly increasing knots plus one slope per piece; there are
// knots.size() + 1 pieces, the first and last unbounded. Values at the knots
// are precomputed from value_at_first_knot, so evaluation is a binary search.
// A function with zero knots is a constant and carries slope 0.
class PiecewiseLinearFn {
public:
    PiecewiseLinearFn(std::vector<double> knots, double value_at_first_knot,
                      std::vector<double> slopes);

    static PiecewiseLinearFn constant(double value);
    // |y - center| scaled: slopes -s, +s around the minimum.
    static PiecewiseLinearFn vee(double center, double slope, double min_value = 0.0);

    double operator()(double y) const;

    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& knot_values() const { return values_; }
    const std::vector<double>& slopes() const { return slopes_; }
    double left_slope() const { return slopes_.front(); }
    double right_slope() const { return slopes_.back(); }
    bool is_constant() const { return knots_.empty(); }
    double constant_value() const { return values_.empty() ? anchor_value_ : values_.front(); }

    bool nondecreasing() const;

    // Drops knots whose adjacent pieces share a slope.
    PiecewiseLinearFn simplified() const;

private:
    PiecewiseLinearFn() = default;

    std::vector<double> knots_;
    std::vector<double> values_;  // f(knots_[i]); empty for constants
    std::vector<double> slopes_;  // one per piece, size knots_.size() + 1
    double anchor_value_ = 0.0;   // the value for knotless constants
};

// y -> min(hi, max(lo, f(y))). Bounds may be -inf / +inf. Requires lo <= hi.
PiecewiseLinearFn pwl_clamp(const PiecewiseLinearFn& f, double lo, double hi);

// y -> outer(inner(y)). Requires outer monotone nondecreasing.
PiecewiseLinearFn pwl_compose_monotone(const PiecewiseLinearFn& outer,
                                       const PiecewiseLinearFn& inner);

struct PwlIntersections {
    std::vector<double> points;  // sorted ascending
    bool identical = false;      // f and g agree everywhere
};

// Sign-change crossings of f - g, plus the finite endpoints of every maximal
// interval on which f and g coincide. Equality is judged at tol_eq of the
// local function scale.
PwlIntersections pwl_intersections(const PiecewiseLinearFn& f, const PiecewiseLinearFn& g);

// sup{q : g(q) <= target} for g monotone nondecreasing.
// +inf if g <= target everywhere, -inf if g > target everywhere.
double pwl_invert_monotone(const PiecewiseLinearFn& g, double target);

// inf{q : g(q) >= target}, i.e. sup{q : g(q) < target} for continuous g.
double pwl_invert_monotone_strict(const PiecewiseLinearFn& g, double target);

}  // namespace modsel

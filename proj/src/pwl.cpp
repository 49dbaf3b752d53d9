#include "modsel/pwl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace modsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dedup tolerance for abscissae; much tighter than tol_eq since knots are
// exact constructions, not data comparisons.
double knot_tol(double x) { return 1e-12 * (1.0 + std::fabs(x)); }

void sort_dedupe(std::vector<double>& xs) {
    std::sort(xs.begin(), xs.end());
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) {
        if (out.empty() || x - out.back() > knot_tol(x)) out.push_back(x);
    }
    xs.swap(out);
}

}  // namespace

PiecewiseLinearFn::PiecewiseLinearFn(std::vector<double> knots, double value_at_first_knot,
                                     std::vector<double> slopes)
    : knots_(std::move(knots)), slopes_(std::move(slopes)), anchor_value_(value_at_first_knot) {
    if (slopes_.size() != knots_.size() + 1)
        throw std::invalid_argument("PiecewiseLinearFn: need one slope per piece");
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i)
        if (!(knots_[i] < knots_[i + 1]))
            throw std::invalid_argument("PiecewiseLinearFn: knots must be strictly increasing");
    if (knots_.empty()) {
        if (slopes_[0] != 0.0)
            throw std::invalid_argument("PiecewiseLinearFn: knotless function must be constant");
        return;
    }
    values_.resize(knots_.size());
    values_[0] = value_at_first_knot;
    for (std::size_t i = 1; i < knots_.size(); ++i)
        values_[i] = values_[i - 1] + slopes_[i] * (knots_[i] - knots_[i - 1]);
}

PiecewiseLinearFn PiecewiseLinearFn::constant(double value) {
    return PiecewiseLinearFn({}, value, {0.0});
}

PiecewiseLinearFn PiecewiseLinearFn::vee(double center, double slope, double min_value) {
    return PiecewiseLinearFn({center}, min_value, {-slope, slope});
}

double PiecewiseLinearFn::operator()(double y) const {
    if (knots_.empty()) return anchor_value_;
    auto it = std::upper_bound(knots_.begin(), knots_.end(), y);
    std::size_t piece = static_cast<std::size_t>(it - knots_.begin());
    if (piece == 0) return values_[0] + slopes_[0] * (y - knots_[0]);
    return values_[piece - 1] + slopes_[piece] * (y - knots_[piece - 1]);
}

bool PiecewiseLinearFn::nondecreasing() const {
    for (double s : slopes_)
        if (s < 0.0) return false;
    return true;
}

PiecewiseLinearFn PiecewiseLinearFn::simplified() const {
    if (knots_.empty()) return *this;
    std::vector<double> ks, ss;
    ss.push_back(slopes_[0]);
    double v0 = values_[0];
    bool v0_set = false;
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        double next_slope = slopes_[i + 1];
        if (std::fabs(next_slope - ss.back()) <= 1e-12 * (1.0 + std::fabs(next_slope)))
            continue;  // collinear across this knot
        ks.push_back(knots_[i]);
        ss.push_back(next_slope);
        if (!v0_set) {
            v0 = values_[i];
            v0_set = true;
        }
    }
    if (ks.empty()) {
        // Fully linear; keep one knot unless the slope is zero.
        if (slopes_[0] == 0.0) return constant(values_[0]);
        return PiecewiseLinearFn({knots_[0]}, values_[0], {slopes_[0], slopes_[0]});
    }
    return PiecewiseLinearFn(std::move(ks), v0, std::move(ss));
}

PiecewiseLinearFn pwl_clamp(const PiecewiseLinearFn& f, double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("pwl_clamp: lo > hi");
    auto clamped = [&](double y) { return std::min(hi, std::max(lo, f(y))); };
    if (f.is_constant()) return PiecewiseLinearFn::constant(clamped(0.0));

    std::vector<double> cand = f.knots();
    const auto& ks = f.knots();
    const auto& vs = f.knot_values();
    const auto& ss = f.slopes();
    // Crossings of each level inside each piece.
    for (double level : {lo, hi}) {
        if (!std::isfinite(level)) continue;
        for (std::size_t p = 0; p < ss.size(); ++p) {
            double s = ss[p];
            if (s == 0.0) continue;
            double anchor = (p == 0) ? ks[0] : ks[p - 1];
            double av = (p == 0) ? vs[0] : vs[p - 1];
            double y = anchor + (level - av) / s;
            double a = (p == 0) ? -kInf : ks[p - 1];
            double b = (p == ss.size() - 1) ? kInf : ks[p];
            if (y > a + knot_tol(y) && y < b - knot_tol(y)) cand.push_back(y);
        }
    }
    sort_dedupe(cand);

    std::vector<double> values(cand.size());
    for (std::size_t i = 0; i < cand.size(); ++i) values[i] = clamped(cand[i]);
    std::vector<double> slopes(cand.size() + 1);
    slopes[0] = values[0] - clamped(cand[0] - 1.0);
    slopes[cand.size()] = clamped(cand.back() + 1.0) - values.back();
    for (std::size_t i = 1; i < cand.size(); ++i)
        slopes[i] = (values[i] - values[i - 1]) / (cand[i] - cand[i - 1]);
    return PiecewiseLinearFn(std::move(cand), values[0], std::move(slopes)).simplified();
}

PiecewiseLinearFn pwl_compose_monotone(const PiecewiseLinearFn& outer,
                                       const PiecewiseLinearFn& inner) {
    if (!outer.nondecreasing())
        throw std::invalid_argument("pwl_compose_monotone: outer must be nondecreasing");
    auto h = [&](double y) { return outer(inner(y)); };
    if (inner.is_constant() || outer.is_constant()) return PiecewiseLinearFn::constant(h(0.0));

    std::vector<double> cand = inner.knots();
    const auto& ks = inner.knots();
    const auto& vs = inner.knot_values();
    const auto& ss = inner.slopes();
    // Preimages of the outer knots under each linear piece of inner.
    for (double t : outer.knots()) {
        for (std::size_t p = 0; p < ss.size(); ++p) {
            double s = ss[p];
            if (s == 0.0) continue;
            double anchor = (p == 0) ? ks[0] : ks[p - 1];
            double av = (p == 0) ? vs[0] : vs[p - 1];
            double y = anchor + (t - av) / s;
            double a = (p == 0) ? -kInf : ks[p - 1];
            double b = (p == ss.size() - 1) ? kInf : ks[p];
            if (y > a + knot_tol(y) && y < b - knot_tol(y)) cand.push_back(y);
        }
    }
    sort_dedupe(cand);

    std::vector<double> values(cand.size());
    for (std::size_t i = 0; i < cand.size(); ++i) values[i] = h(cand[i]);
    std::vector<double> slopes(cand.size() + 1);
    slopes[0] = values[0] - h(cand[0] - 1.0);
    slopes[cand.size()] = h(cand.back() + 1.0) - values.back();
    for (std::size_t i = 1; i < cand.size(); ++i)
        slopes[i] = (values[i] - values[i - 1]) / (cand[i] - cand[i - 1]);
    return PiecewiseLinearFn(std::move(cand), values[0], std::move(slopes)).simplified();
}

PwlIntersections pwl_intersections(const PiecewiseLinearFn& f, const PiecewiseLinearFn& g) {
    PwlIntersections out;
    auto scale_at = [&](double y) { return std::max(std::fabs(f(y)), std::fabs(g(y))); };
    auto d = [&](double y) { return f(y) - g(y); };

    if (f.is_constant() && g.is_constant()) {
        out.identical = std::fabs(d(0.0)) <= tol_eq(scale_at(0.0));
        return out;
    }

    std::vector<double> knots = f.knots();
    knots.insert(knots.end(), g.knots().begin(), g.knots().end());
    sort_dedupe(knots);
    const std::size_t m = knots.size();

    std::vector<double> dv(m);
    std::vector<bool> zero(m);
    for (std::size_t i = 0; i < m; ++i) {
        dv[i] = d(knots[i]);
        zero[i] = std::fabs(dv[i]) <= tol_eq(scale_at(knots[i]));
    }
    double sl = f.left_slope() - g.left_slope();
    double sr = f.right_slope() - g.right_slope();
    double slope_scale = std::max({std::fabs(f.left_slope()), std::fabs(g.left_slope()),
                                   std::fabs(f.right_slope()), std::fabs(g.right_slope())});
    bool left_zero = zero[0] && std::fabs(sl) <= tol_eq(slope_scale);
    bool right_zero = zero[m - 1] && std::fabs(sr) <= tol_eq(slope_scale);

    // Segment s = 0 is (-inf, knots[0]]; s in [1, m-1] is [knots[s-1], knots[s]];
    // segment m is [knots[m-1], +inf).
    auto seg_zero = [&](std::size_t s) {
        if (s == 0) return left_zero;
        if (s == m) return right_zero;
        return static_cast<bool>(zero[s - 1] && zero[s]);
    };
    // Sign of f - g strictly inside segment s (0 if the segment is identically zero).
    auto seg_sign = [&](std::size_t s) -> int {
        if (seg_zero(s)) return 0;
        double probe;
        if (s == 0)
            probe = dv[0] - sl;  // value at knots[0] - 1
        else if (s == m)
            probe = dv[m - 1] + sr;
        else
            probe = 0.5 * (dv[s - 1] + dv[s]);
        // A segment with one zero endpoint takes the sign of the other end.
        if (s >= 1 && s <= m - 1) {
            if (zero[s - 1] && !zero[s]) probe = dv[s];
            if (!zero[s - 1] && zero[s]) probe = dv[s - 1];
        }
        return probe > 0 ? 1 : (probe < 0 ? -1 : 0);
    };

    bool all_zero = true;
    for (std::size_t s = 0; s <= m; ++s)
        if (!seg_zero(s)) all_zero = false;
    if (all_zero) {
        out.identical = true;
        return out;
    }

    // Interior crossings with a strict sign change.
    for (std::size_t s = 1; s <= m - 1; ++s) {
        if (zero[s - 1] || zero[s]) continue;
        if ((dv[s - 1] > 0) == (dv[s] > 0)) continue;
        double a = knots[s - 1], b = knots[s];
        out.points.push_back(a + (b - a) * dv[s - 1] / (dv[s - 1] - dv[s]));
    }
    // Crossings on the unbounded end pieces.
    if (!zero[0] && sl != 0.0) {
        double y = knots[0] - dv[0] / sl;
        if (y < knots[0] - knot_tol(y)) out.points.push_back(y);
    }
    if (!zero[m - 1] && sr != 0.0) {
        double y = knots[m - 1] - dv[m - 1] / sr;
        if (y > knots[m - 1] + knot_tol(y)) out.points.push_back(y);
    }

    // Knots where f == g: report those bounding an identically-equal run, and
    // isolated touches across which the sign changes.
    for (std::size_t i = 0; i < m; ++i) {
        if (!zero[i]) continue;
        bool run_boundary = seg_zero(i) != seg_zero(i + 1);
        int ls = seg_sign(i), rs = seg_sign(i + 1);
        bool sign_change = ls != 0 && rs != 0 && ls != rs;
        if (run_boundary || sign_change) out.points.push_back(knots[i]);
    }

    sort_dedupe(out.points);
    return out;
}

double pwl_invert_monotone(const PiecewiseLinearFn& g, double target) {
    if (!g.nondecreasing())
        throw std::invalid_argument("pwl_invert_monotone: g must be nondecreasing");
    if (target == kInf) return kInf;
    if (target == -kInf) return -kInf;
    if (g.is_constant()) return g.constant_value() <= target ? kInf : -kInf;

    const auto& ks = g.knots();
    const auto& vs = g.knot_values();
    const auto& ss = g.slopes();
    const std::size_t m = ks.size();

    if (vs[m - 1] <= target) {
        if (ss[m] <= 0.0) return kInf;  // flat tail stays below target
        return ks[m - 1] + (target - vs[m - 1]) / ss[m];
    }
    // Largest knot with value <= target.
    std::size_t i = m;  // sentinel: none found
    for (std::size_t j = m; j-- > 0;) {
        if (vs[j] <= target) {
            i = j;
            break;
        }
    }
    if (i == m) {
        if (ss[0] <= 0.0) return -kInf;
        return ks[0] + (target - vs[0]) / ss[0];
    }
    double s = ss[i + 1];
    // s > 0 here: a flat piece would carry the same value to the next knot.
    return ks[i] + (target - vs[i]) / s;
}

double pwl_invert_monotone_strict(const PiecewiseLinearFn& g, double target) {
    if (!g.nondecreasing())
        throw std::invalid_argument("pwl_invert_monotone_strict: g must be nondecreasing");
    if (target == kInf) return kInf;
    if (target == -kInf) return -kInf;
    if (g.is_constant()) return g.constant_value() < target ? kInf : -kInf;

    const auto& ks = g.knots();
    const auto& vs = g.knot_values();
    const auto& ss = g.slopes();
    const std::size_t m = ks.size();

    if (vs[0] >= target) {
        if (ss[0] <= 0.0) return -kInf;  // flat head already at/above target
        return ks[0] + (target - vs[0]) / ss[0];
    }
    // Smallest knot with value >= target.
    std::size_t i = m;
    for (std::size_t j = 0; j < m; ++j) {
        if (vs[j] >= target) {
            i = j;
            break;
        }
    }
    if (i == m) {
        if (ss[m] <= 0.0) return kInf;
        return ks[m - 1] + (target - vs[m - 1]) / ss[m];
    }
    // i >= 1 here since vs[0] < target, and the piece into knot i must rise.
    double s = ss[i];
    return ks[i - 1] + (target - vs[i - 1]) / s;
}

}  // namespace modsel

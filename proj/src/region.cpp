#include "modsel/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace modsel {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

PredictionRegion PredictionRegion::empty() { return PredictionRegion(); }

PredictionRegion PredictionRegion::entire() {
    PredictionRegion r;
    r.kind_ = Kind::entire;
    return r;
}

PredictionRegion PredictionRegion::intervals(std::vector<RealInterval> parts) {
    std::vector<RealInterval> kept;
    kept.reserve(parts.size());
    for (const auto& iv : parts) {
        if (std::isnan(iv.lo) || std::isnan(iv.hi)) throw std::invalid_argument("interval NaN");
        if (iv.lo > iv.hi) continue;
        kept.push_back(iv);
    }
    if (kept.empty()) return empty();
    std::sort(kept.begin(), kept.end(),
              [](const RealInterval& a, const RealInterval& b) { return a.lo < b.lo; });
    std::vector<RealInterval> merged;
    merged.push_back(kept[0]);
    for (std::size_t i = 1; i < kept.size(); ++i) {
        RealInterval& last = merged.back();
        if (kept[i].lo <= last.hi + tol_eq(std::max(std::fabs(last.hi), std::fabs(kept[i].lo))))
            last.hi = std::max(last.hi, kept[i].hi);
        else
            merged.push_back(kept[i]);
    }
    if (merged.size() == 1 && merged[0].lo == -kInf && merged[0].hi == kInf) return entire();
    PredictionRegion r;
    r.kind_ = Kind::intervals;
    r.intervals_ = std::move(merged);
    return r;
}

PredictionRegion PredictionRegion::labels(std::vector<int> labels) {
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    if (labels.empty()) return empty();
    PredictionRegion r;
    r.kind_ = Kind::labels;
    r.labels_ = std::move(labels);
    return r;
}

bool PredictionRegion::contains(double y) const {
    switch (kind_) {
        case Kind::empty: return false;
        case Kind::entire: return true;
        case Kind::labels: return contains_label(static_cast<int>(y));
        case Kind::intervals: break;
    }
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), y,
                               [](double v, const RealInterval& iv) { return v < iv.lo; });
    if (it == intervals_.begin()) return false;
    --it;
    return y <= it->hi;
}

bool PredictionRegion::contains_label(int label) const {
    if (kind_ == Kind::empty) return false;
    if (kind_ == Kind::entire) return true;
    if (kind_ != Kind::labels) throw std::logic_error("contains_label on interval region");
    return std::binary_search(labels_.begin(), labels_.end(), label);
}

double PredictionRegion::measure() const {
    switch (kind_) {
        case Kind::empty: return 0.0;
        case Kind::entire: return kInf;
        case Kind::labels: return static_cast<double>(labels_.size());
        case Kind::intervals: break;
    }
    double total = 0.0;
    for (const auto& iv : intervals_) total += iv.hi - iv.lo;
    return total;
}

double PredictionRegion::measure_discrete(int label_count) const {
    if (kind_ == Kind::entire) return static_cast<double>(label_count);
    return measure();
}

PredictionRegion PredictionRegion::intersect_interval(double lo, double hi) const {
    if (lo > hi) return empty();
    switch (kind_) {
        case Kind::empty: return empty();
        case Kind::entire: return intervals({{lo, hi}});
        case Kind::labels: throw std::logic_error("intersect_interval on label region");
        case Kind::intervals: break;
    }
    std::vector<RealInterval> parts;
    for (const auto& iv : intervals_) {
        double a = std::max(iv.lo, lo), b = std::min(iv.hi, hi);
        if (a <= b) parts.push_back({a, b});
    }
    return intervals(std::move(parts));
}

PredictionRegion PredictionRegion::union_of(const std::vector<PredictionRegion>& regions) {
    bool any_labels = false, any_intervals = false;
    std::vector<RealInterval> ivs;
    std::vector<int> lbs;
    for (const auto& r : regions) {
        switch (r.kind_) {
            case Kind::empty: break;
            case Kind::entire: return entire();
            case Kind::intervals:
                any_intervals = true;
                ivs.insert(ivs.end(), r.intervals_.begin(), r.intervals_.end());
                break;
            case Kind::labels:
                any_labels = true;
                lbs.insert(lbs.end(), r.labels_.begin(), r.labels_.end());
                break;
        }
    }
    if (any_labels && any_intervals) throw std::logic_error("union of mixed region variants");
    if (any_labels) return labels(std::move(lbs));
    return intervals(std::move(ivs));
}

bool region_contains(const PredictionRegion& outer, const PredictionRegion& inner, double tol) {
    if (inner.is_empty() || outer.is_entire()) return true;
    if (inner.is_entire()) return outer.is_entire();
    if (outer.is_empty()) return false;
    if (inner.kind() == PredictionRegion::Kind::labels) {
        for (int l : inner.label_parts())
            if (!outer.contains_label(l)) return false;
        return true;
    }
    if (outer.kind() != PredictionRegion::Kind::intervals) return false;
    for (const auto& iv : inner.interval_parts()) {
        double lo = iv.lo + tol, hi = iv.hi - tol;
        if (lo > hi) {
            double mid = 0.5 * (iv.lo + iv.hi);
            lo = hi = mid;
        }
        // The shrunk interval must sit inside a single outer interval.
        bool ok = false;
        for (const auto& ov : outer.interval_parts()) {
            if (ov.lo - tol <= lo && hi <= ov.hi + tol) {
                ok = true;
                break;
            }
        }
        if (!ok) return false;
    }
    return true;
}

}  // namespace modsel

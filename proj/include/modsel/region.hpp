#pragma once

#include <vector>

#include "modsel/pwl.hpp"

namespace modsel {

struct RealInterval {
    double lo;
    double hi;
};

// A prediction set: a union of disjoint closed intervals, a finite label
// subset, the whole response space, or the empty set.
class PredictionRegion {
public:
    enum class Kind { empty, entire, intervals, labels };

    static PredictionRegion empty();
    static PredictionRegion entire();
    // Sorts and merges; intervals whose gap is within tol_eq of the local
    // scale are fused. Empty input collapses to the empty region.
    static PredictionRegion intervals(std::vector<RealInterval> parts);
    static PredictionRegion labels(std::vector<int> labels);

    Kind kind() const { return kind_; }
    bool is_empty() const { return kind_ == Kind::empty; }
    bool is_entire() const { return kind_ == Kind::entire; }
    const std::vector<RealInterval>& interval_parts() const { return intervals_; }
    const std::vector<int>& label_parts() const { return labels_; }

    bool contains(double y) const;
    bool contains_label(int label) const;

    // Lebesgue measure for interval unions (inf for the entire line),
    // cardinality for label sets. label_count resolves `entire` when the
    // response space is finite.
    double measure() const;
    double measure_discrete(int label_count) const;

    PredictionRegion intersect_interval(double lo, double hi) const;
    static PredictionRegion union_of(const std::vector<PredictionRegion>& regions);

private:
    Kind kind_ = Kind::empty;
    std::vector<RealInterval> intervals_;
    std::vector<int> labels_;
};

// inner subseteq outer, allowing boundary slack of `tol` per endpoint.
bool region_contains(const PredictionRegion& outer, const PredictionRegion& inner,
                     double tol = 0.0);

}  // namespace modsel

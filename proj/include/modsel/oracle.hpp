#pragma once

#include <cstddef>

#include "modsel/region.hpp"
#include "modsel/select.hpp"

namespace modsel::oracle {

struct GridSpec {
    double lo;
    double hi;
    std::size_t points;  // >= 2

    double step() const { return (hi - lo) / static_cast<double>(points - 1); }
};

// A grid guaranteed to contain every candidate interval endpoint produced by
// finite thresholds, padded on both sides.
GridSpec default_grid(const CalibrationSession& session, std::size_t points = 100001);

// Verbatim grid evaluation of the test-point-augmented selection rule.
PredictionRegion grid_modsel_cp(const CalibrationSession& session, const GridSpec& grid);

// Verbatim grid evaluation of the leave-one-out selection rule.
PredictionRegion grid_modsel_cp_loo(const CalibrationSession& session, const GridSpec& grid);

// Lebesgue measure (interval unions) or cardinality (label sets) of the
// symmetric difference. Arguments must share a variant; Empty matches either.
double region_diff_measure(const PredictionRegion& a, const PredictionRegion& b);

}  // namespace modsel::oracle

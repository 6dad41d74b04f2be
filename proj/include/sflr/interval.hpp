#pragma once

#include <vector>

namespace sflr {

/// Closed interval [start, end] on the domain.
struct Interval {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
  bool operator==(const Interval&) const = default;
};

/// Total length of the union of (possibly overlapping) intervals.
double covered_length(std::vector<Interval> intervals);

/// Length of the intersection of `a` with the union of `regions`.
double overlap_length(const Interval& a, const std::vector<Interval>& regions);

/// Sorted, merged union; throws InvalidArgument on end < start or points
/// outside [0, domain_end].
std::vector<Interval> normalize_intervals(std::vector<Interval> intervals, double domain_end);

/// [0, domain_end] minus the union of `regions` (regions normalized first).
std::vector<Interval> complement(const std::vector<Interval>& regions, double domain_end);

}  // namespace sflr

#include "sflr/interval.hpp"

#include "sflr/errors.hpp"

#include <algorithm>
#include <string>

namespace sflr {

namespace {

std::vector<Interval> merge_sorted(std::vector<Interval> v) {
  std::sort(v.begin(), v.end(),
            [](const Interval& a, const Interval& b) { return a.start < b.start; });
  std::vector<Interval> out;
  for (const Interval& iv : v) {
    if (!out.empty() && iv.start <= out.back().end) {
      out.back().end = std::max(out.back().end, iv.end);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

}  // namespace

double covered_length(std::vector<Interval> intervals) {
  double total = 0.0;
  for (const Interval& iv : merge_sorted(std::move(intervals))) total += iv.length();
  return total;
}

double overlap_length(const Interval& a, const std::vector<Interval>& regions) {
  double total = 0.0;
  for (const Interval& r : merge_sorted(regions)) {
    total += std::max(0.0, std::min(a.end, r.end) - std::max(a.start, r.start));
  }
  return total;
}

std::vector<Interval> normalize_intervals(std::vector<Interval> intervals, double domain_end) {
  for (const Interval& iv : intervals) {
    if (!(iv.end >= iv.start) || iv.start < 0.0 || iv.end > domain_end) {
      throw InvalidArgument("interval [" + std::to_string(iv.start) + ", " +
                            std::to_string(iv.end) + "] is malformed or outside [0, " +
                            std::to_string(domain_end) + "]");
    }
  }
  return merge_sorted(std::move(intervals));
}

std::vector<Interval> complement(const std::vector<Interval>& regions, double domain_end) {
  std::vector<Interval> out;
  double cursor = 0.0;
  for (const Interval& r : normalize_intervals(regions, domain_end)) {
    if (r.start > cursor) out.push_back({cursor, r.start});
    cursor = std::max(cursor, r.end);
  }
  if (cursor < domain_end) out.push_back({cursor, domain_end});
  return out;
}

}  // namespace sflr

#pragma once

#include "posteval/types.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace posteval {

struct HdrAxis {
    std::string column;
    double bandwidth = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t resolution = 1; // grid nodes along this axis
    bool degenerate = false;    // zero spread; collapsed to the point lo == hi
};

struct HdrInterval {
    double lo = 0.0;
    double hi = 0.0;
};

// Highest-density region of a 1-D or 2-D sample cloud: a kernel density
// estimate on a regular grid plus the density threshold f_alpha chosen so
// that a coverage_target fraction of the defining samples sits at or above
// it. Membership and area are both read off the same interpolated density,
// so they stay consistent.
struct HdrRegion {
    std::size_t dimension = 0;
    double coverage_target = 0.95;
    double f_alpha = 0.0;
    double area = 0.0; // length in 1-D; zero when degenerate
    bool degenerate = false;
    std::vector<HdrAxis> axes;
    // Node densities over the live (non-degenerate) axes, axis-0-major.
    std::vector<double> density;
    // 1-D only: maximal runs with density >= f_alpha, crossing points
    // interpolated between grid nodes.
    std::vector<HdrInterval> intervals;
    std::size_t sample_count = 0;
    std::size_t flagged = 0;

    // Interpolated KDE density; zero outside the padded grid.
    double density_at(std::span<const double> point) const;
    // Closed region: density_at(point) >= f_alpha. Degenerate axes require
    // an exact match with the collapsed value.
    bool contains(std::span<const double> point) const;
};

// Fit the region from the named columns (1 or 2) of a sample matrix.
// Gaussian product kernel, per-axis Scott bandwidth, grid padded by three
// bandwidths past the sample range. grid_resolution 0 picks the default
// (512 nodes in 1-D, 256 per axis in 2-D). Rows with a flagged value in any
// selected column are skipped; at least 100 usable rows are required.
HdrRegion fit_hdr(const JointSampleMatrix& samples,
                  std::span<const std::string> columns, double coverage = 0.95,
                  std::size_t grid_resolution = 0);

// Fraction of points inside the region. `points` is row-major with
// region.dimension values per point; points with flagged coordinates count
// as outside.
double coverage_fraction(const HdrRegion& region,
                         std::span<const double> points);

} // namespace posteval

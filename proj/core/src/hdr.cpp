#include "posteval/hdr.hpp"

#include "posteval/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace posteval {

namespace {

constexpr double kKernelCutoff = 6.0; // truncate Gaussian taps past 6 sd

struct AxisGrid {
    double lo = 0.0;
    double step = 0.0;
    std::size_t res = 1;
};

double node_pos(const AxisGrid& g, std::size_t i) {
    return g.lo + g.step * static_cast<double>(i);
}

// Index/fraction pair locating a coordinate between two grid nodes.
struct GridCoord {
    std::size_t idx = 0;
    double frac = 0.0;
    bool inside = false;
};

GridCoord locate(const AxisGrid& g, double x) {
    GridCoord c;
    const double t = (x - g.lo) / g.step;
    if (t < 0.0 || t > static_cast<double>(g.res - 1) || std::isnan(t)) {
        return c;
    }
    c.inside = true;
    c.idx = static_cast<std::size_t>(t);
    if (c.idx >= g.res - 1) {
        c.idx = g.res - 2;
        c.frac = 1.0;
    } else {
        c.frac = t - static_cast<double>(c.idx);
    }
    return c;
}

// Gaussian pdf taps at node offsets 0, step, 2*step, ...
std::vector<double> kernel_taps(double bandwidth, double step,
                                std::size_t res) {
    const double norm = 1.0 / (bandwidth * std::sqrt(2.0 * std::numbers::pi));
    auto radius = static_cast<std::size_t>(
        std::ceil(kKernelCutoff * bandwidth / step));
    radius = std::min(radius, res - 1);
    std::vector<double> taps(radius + 1);
    for (std::size_t j = 0; j <= radius; ++j) {
        const double z = static_cast<double>(j) * step / bandwidth;
        taps[j] = norm * std::exp(-0.5 * z * z);
    }
    return taps;
}

// Convolve a grid along one axis with symmetric taps. `outer` indexes the
// other axis (1 in 1-D), `inner_stride` is the element stride along the
// convolved axis.
void convolve_axis(std::vector<double>& grid, std::size_t outer,
                   std::size_t inner, std::size_t outer_stride,
                   std::size_t inner_stride, const std::vector<double>& taps) {
    const auto radius = static_cast<std::ptrdiff_t>(taps.size()) - 1;
    std::vector<double> line(inner);
    for (std::size_t o = 0; o < outer; ++o) {
        double* base = grid.data() + o * outer_stride;
        for (std::size_t i = 0; i < inner; ++i) line[i] = base[i * inner_stride];
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(inner); ++i) {
            double acc = line[static_cast<std::size_t>(i)] * taps[0];
            const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(i - radius, 0);
            const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(
                i + radius, static_cast<std::ptrdiff_t>(inner) - 1);
            for (std::ptrdiff_t j = lo; j < i; ++j) {
                acc += line[static_cast<std::size_t>(j)] *
                       taps[static_cast<std::size_t>(i - j)];
            }
            for (std::ptrdiff_t j = i + 1; j <= hi; ++j) {
                acc += line[static_cast<std::size_t>(j)] *
                       taps[static_cast<std::size_t>(j - i)];
            }
            base[static_cast<std::size_t>(i) * inner_stride] = acc;
        }
    }
}

std::vector<AxisGrid> live_grids(const HdrRegion& region) {
    std::vector<AxisGrid> grids;
    for (const auto& axis : region.axes) {
        if (axis.degenerate) continue;
        AxisGrid g;
        g.lo = axis.lo;
        g.res = axis.resolution;
        g.step = (axis.hi - axis.lo) / static_cast<double>(axis.resolution - 1);
        grids.push_back(g);
    }
    return grids;
}

} // namespace

double HdrRegion::density_at(std::span<const double> point) const {
    if (point.size() != dimension) {
        throw InputError("hdr: point dimension mismatch");
    }
    std::vector<double> live;
    live.reserve(dimension);
    for (std::size_t a = 0; a < axes.size(); ++a) {
        if (!axes[a].degenerate) live.push_back(point[a]);
    }
    if (live.empty()) return 0.0;

    const auto grids = live_grids(*this);
    std::vector<GridCoord> coords(grids.size());
    for (std::size_t a = 0; a < grids.size(); ++a) {
        coords[a] = locate(grids[a], live[a]);
        if (!coords[a].inside) return 0.0;
    }
    if (grids.size() == 1) {
        const auto& c = coords[0];
        return density[c.idx] * (1.0 - c.frac) + density[c.idx + 1] * c.frac;
    }
    const std::size_t stride = grids[1].res;
    const auto& c0 = coords[0];
    const auto& c1 = coords[1];
    const double d00 = density[c0.idx * stride + c1.idx];
    const double d01 = density[c0.idx * stride + c1.idx + 1];
    const double d10 = density[(c0.idx + 1) * stride + c1.idx];
    const double d11 = density[(c0.idx + 1) * stride + c1.idx + 1];
    const double top = d00 * (1.0 - c1.frac) + d01 * c1.frac;
    const double bot = d10 * (1.0 - c1.frac) + d11 * c1.frac;
    return top * (1.0 - c0.frac) + bot * c0.frac;
}

bool HdrRegion::contains(std::span<const double> point) const {
    if (point.size() != dimension) {
        throw InputError("hdr: point dimension mismatch");
    }
    bool any_live = false;
    for (std::size_t a = 0; a < axes.size(); ++a) {
        if (axes[a].degenerate) {
            if (!(point[a] == axes[a].lo)) return false;
        } else {
            any_live = true;
        }
    }
    if (!any_live) return true;
    return density_at(point) >= f_alpha;
}

HdrRegion fit_hdr(const JointSampleMatrix& samples,
                  std::span<const std::string> columns, double coverage,
                  std::size_t grid_resolution) {
    if (columns.empty() || columns.size() > 2) {
        throw ConfigError("fit_hdr: needs one or two columns");
    }
    if (!(coverage > 0.0 && coverage < 1.0)) {
        throw ConfigError("fit_hdr: coverage must lie in (0, 1)");
    }
    const std::size_t d = columns.size();
    std::vector<std::size_t> col_idx(d);
    for (std::size_t a = 0; a < d; ++a) {
        col_idx[a] = samples.column_index(columns[a]);
    }

    // Unflagged rows only.
    std::vector<double> pts; // row-major, d per point
    pts.reserve(samples.rows * d);
    std::size_t flagged = 0;
    for (std::size_t r = 0; r < samples.rows; ++r) {
        bool ok = true;
        for (std::size_t a = 0; a < d; ++a) {
            if (std::isnan(samples.at(r, col_idx[a]))) {
                ok = false;
                break;
            }
        }
        if (!ok) {
            ++flagged;
            continue;
        }
        for (std::size_t a = 0; a < d; ++a) pts.push_back(samples.at(r, col_idx[a]));
    }
    const std::size_t n = pts.size() / d;
    if (n < 100) {
        throw InputError("fit_hdr: needs at least 100 unflagged samples, got " +
                         std::to_string(n));
    }

    HdrRegion region;
    region.dimension = d;
    region.coverage_target = coverage;
    region.sample_count = n;
    region.flagged = flagged;
    region.axes.resize(d);

    // Per-axis moments and spread.
    std::size_t live_dims = 0;
    for (std::size_t a = 0; a < d; ++a) {
        double mean = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const double v = pts[i * d + a];
            mean += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = pts[i * d + a] - mean;
            ss += v * v;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        auto& axis = region.axes[a];
        axis.column = columns[a];
        if (sd == 0.0 || lo == hi) {
            axis.degenerate = true;
            axis.lo = axis.hi = lo;
            axis.resolution = 1;
            region.degenerate = true;
        } else {
            axis.lo = lo;
            axis.hi = hi;
            axis.bandwidth = sd; // scaled below once live_dims is known
            ++live_dims;
        }
    }

    if (live_dims == 0) {
        region.f_alpha = std::numeric_limits<double>::infinity();
        region.area = 0.0;
        if (d == 1) {
            region.intervals.push_back({region.axes[0].lo, region.axes[0].lo});
        }
        return region;
    }

    // Scott's rule over the live dimensions; pad the box by 3 bandwidths.
    const double scott = std::pow(static_cast<double>(n),
                                  -1.0 / (static_cast<double>(live_dims) + 4.0));
    const std::size_t default_res = live_dims == 1 ? 512 : 256;
    const std::size_t res = grid_resolution == 0 ? default_res : grid_resolution;
    if (res < 8) throw ConfigError("fit_hdr: grid resolution too small");
    for (auto& axis : region.axes) {
        if (axis.degenerate) continue;
        axis.bandwidth *= scott;
        axis.lo -= 3.0 * axis.bandwidth;
        axis.hi += 3.0 * axis.bandwidth;
        axis.resolution = res;
    }

    const auto grids = live_grids(region);

    // Linear binning of the sample cloud onto grid nodes.
    std::size_t grid_size = 1;
    for (const auto& g : grids) grid_size *= g.res;
    region.density.assign(grid_size, 0.0);
    {
        std::vector<GridCoord> coords(grids.size());
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t a_live = 0;
            for (std::size_t a = 0; a < d; ++a) {
                if (region.axes[a].degenerate) continue;
                coords[a_live] = locate(grids[a_live], pts[i * d + a]);
                ++a_live;
            }
            if (grids.size() == 1) {
                const auto& c = coords[0];
                region.density[c.idx] += 1.0 - c.frac;
                region.density[c.idx + 1] += c.frac;
            } else {
                const std::size_t stride = grids[1].res;
                const auto& c0 = coords[0];
                const auto& c1 = coords[1];
                region.density[c0.idx * stride + c1.idx] +=
                    (1.0 - c0.frac) * (1.0 - c1.frac);
                region.density[c0.idx * stride + c1.idx + 1] +=
                    (1.0 - c0.frac) * c1.frac;
                region.density[(c0.idx + 1) * stride + c1.idx] +=
                    c0.frac * (1.0 - c1.frac);
                region.density[(c0.idx + 1) * stride + c1.idx + 1] +=
                    c0.frac * c1.frac;
            }
        }
    }

    // Separable Gaussian smoothing turns binned counts into a density.
    {
        std::size_t a_live = 0;
        std::vector<double> taps;
        for (std::size_t a = 0; a < d; ++a) {
            if (region.axes[a].degenerate) continue;
            taps = kernel_taps(region.axes[a].bandwidth, grids[a_live].step,
                               grids[a_live].res);
            if (grids.size() == 1) {
                convolve_axis(region.density, 1, grids[0].res, 0, 1, taps);
            } else if (a_live == 0) {
                convolve_axis(region.density, grids[1].res, grids[0].res, 1,
                              grids[1].res, taps);
            } else {
                convolve_axis(region.density, grids[0].res, grids[1].res,
                              grids[1].res, 1, taps);
            }
            ++a_live;
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        for (double& v : region.density) v *= inv_n;
    }

    // Threshold: the ceil(coverage * n)-th largest density among the
    // defining samples themselves.
    {
        std::vector<double> sample_density(n);
        std::vector<double> point(d);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t a = 0; a < d; ++a) point[a] = pts[i * d + a];
            sample_density[i] = region.density_at(point);
        }
        const auto rank = static_cast<std::size_t>(
            std::ceil(coverage * static_cast<double>(n)));
        const std::size_t k = std::min(rank, n) - 1;
        std::nth_element(sample_density.begin(), sample_density.begin() + k,
                         sample_density.end(), std::greater<>());
        region.f_alpha = sample_density[k];
    }

    // Area: suprathreshold nodes times the per-node cell measure over the
    // live axes; degenerate axes contribute zero measure.
    if (region.degenerate) {
        region.area = 0.0;
    } else {
        double cell = 1.0;
        for (const auto& g : grids) cell *= g.step;
        std::size_t count = 0;
        for (double v : region.density) {
            if (v >= region.f_alpha) ++count;
        }
        region.area = static_cast<double>(count) * cell;
    }

    // 1-D: explicit intervals with interpolated crossings, consistent with
    // the linear interpolation used by density_at.
    if (d == 1 && !region.degenerate) {
        const auto& g = grids[0];
        const auto& f = region.density;
        bool open = false;
        double start = 0.0;
        for (std::size_t i = 0; i < g.res; ++i) {
            const bool in = f[i] >= region.f_alpha;
            if (in && !open) {
                start = node_pos(g, i);
                if (i > 0) {
                    const double t =
                        (region.f_alpha - f[i - 1]) / (f[i] - f[i - 1]);
                    start = node_pos(g, i - 1) + t * g.step;
                }
                open = true;
            } else if (!in && open) {
                double end = node_pos(g, i - 1);
                const double t = (f[i - 1] - region.f_alpha) / (f[i - 1] - f[i]);
                end = node_pos(g, i - 1) + t * g.step;
                region.intervals.push_back({start, end});
                open = false;
            }
        }
        if (open) {
            region.intervals.push_back({start, node_pos(g, g.res - 1)});
        }
    }
    return region;
}

double coverage_fraction(const HdrRegion& region,
                         std::span<const double> points) {
    if (region.dimension == 0) throw InputError("coverage_fraction: empty region");
    if (points.empty() || points.size() % region.dimension != 0) {
        throw InputError("coverage_fraction: point list empty or not a "
                         "multiple of the region dimension");
    }
    const std::size_t n = points.size() / region.dimension;
    std::size_t inside = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = points.subspan(i * region.dimension, region.dimension);
        bool ok = true;
        for (double v : p) {
            if (std::isnan(v)) {
                ok = false;
                break;
            }
        }
        if (ok && region.contains(p)) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(n);
}

} // namespace posteval

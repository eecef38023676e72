#pragma once

#include "microtrap/geometry.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace microtrap {

// One sampled axis of a rectangular scan window.
struct ScanAxis {
    std::string label;     // column name in output tables
    Vec3 direction;        // unit direction in space
    double start = 0.0;    // [m] offset along direction at first sample
    double stop = 0.0;     // [m] offset at last sample
    int count = 1;         // >= 1 samples, endpoints inclusive

    double coordinate(int i) const {
        if (count <= 1) return start;
        return start + (stop - start) * (static_cast<double>(i) /
                                         static_cast<double>(count - 1));
    }
};

// A 1D/2D/3D rectilinear grid of evaluation points: origin plus an offset
// along each axis direction. Enumeration is row-major with the LAST axis
// fastest, so flat index = ((i0 * n1) + i1) * n2 + i2.
struct ScanGrid {
    Vec3 origin;
    std::vector<ScanAxis> axes; // 1 to 3 axes

    std::size_t total() const {
        std::size_t t = 1;
        for (const auto& a : axes) t *= static_cast<std::size_t>(a.count);
        return t;
    }

    void validate() const;

    // Index split of flat index `k` into per-axis indices.
    std::vector<int> indices(std::size_t k) const;

    Vec3 point(std::size_t k) const;

    std::vector<Vec3> points() const;
};

} // namespace microtrap

#pragma once

#include <cmath>
#include <stdexcept>

namespace cvqrng {

// Saturating quantizer: bin_count half-open cells [edge, edge + bin_width)
// with edges symmetric about center. Values beyond the covered range clamp
// to the extreme bins, which models the ADC saturating instead of dropping
// samples.
struct BinningScheme {
    double bin_width = 0.15625;
    int bin_count = 256;
    double center = 0.0;

    double lower_edge() const noexcept { return center - 0.5 * bin_count * bin_width; }
    double upper_edge() const noexcept { return center + 0.5 * bin_count * bin_width; }
    double edge(int k) const noexcept { return lower_edge() + k * bin_width; }
    double bin_center(int k) const noexcept { return lower_edge() + (k + 0.5) * bin_width; }
    double covered_range() const noexcept { return bin_width * bin_count; }

    void validate() const {
        if (!(bin_width > 0.0))
            throw std::invalid_argument("BinningScheme: bin_width must be positive");
        if (bin_count < 2)
            throw std::invalid_argument("BinningScheme: bin_count must be at least 2");
        if (bin_count % 2 != 0)
            throw std::invalid_argument("BinningScheme: bin_count must be even");
        if (!std::isfinite(center))
            throw std::invalid_argument("BinningScheme: center must be finite");
    }
};

// Total function. A value sitting exactly on a bin edge goes to the
// higher-index bin; out-of-range values saturate at 0 or bin_count - 1.
inline int quantize(double value, const BinningScheme& scheme) noexcept {
    const double offset = (value - scheme.lower_edge()) / scheme.bin_width;
    if (!(offset > 0.0)) return 0;
    if (offset >= static_cast<double>(scheme.bin_count)) return scheme.bin_count - 1;
    return static_cast<int>(offset);
}

}  // namespace cvqrng

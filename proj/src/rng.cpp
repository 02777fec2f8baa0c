#include "hjbsync/rng.hpp"

#include <cmath>

#include "hjbsync/errors.hpp"

namespace hjbsync {

void validate_ic_range(const IcRange& r) {
    for (const auto& iv : r) {
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi) {
            throw ConfigError("initial-condition range must be finite with lo <= hi");
        }
    }
}

std::vector<OscState> draw_states(std::size_t n, const IcRange& range, std::uint64_t seed) {
    validate_ic_range(range);
    std::mt19937_64 gen(seed);
    // 53-bit mantissa draw; avoids implementation-defined distribution code.
    auto unit = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    std::vector<OscState> out(n);
    for (auto& s : out) {
        for (std::size_t k = 0; k < 3; ++k) {
            s[k] = range[k].lo + (range[k].hi - range[k].lo) * unit();
        }
    }
    return out;
}

}  // namespace hjbsync

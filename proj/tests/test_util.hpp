#pragma once

#include <string>

#include "gplab/errors.hpp"
#include "gplab/grid.hpp"
#include "gplab/rng.hpp"

namespace gplab_test {

/* Run `fn`; return the stable error name it throws, or "" if it does not. */
template <typename Fn>
std::string error_name_of(Fn&& fn) {
    try {
        fn();
    } catch (const gplab::Error& e) {
        return e.name();
    }
    return "";
}

/* Deterministic pseudo-random field with values in [lo, hi]. */
inline gplab::GridField random_field(const gplab::Grid& grid, std::uint64_t seed,
                                     double lo = -1.0, double hi = 1.0) {
    gplab::GridField f = gplab::make_field(grid);
    gplab::Rng rng(gplab::derive_seed(seed, 17));
    for (auto& v : f.values) v = lo + (hi - lo) * rng.uniform();
    return f;
}

}  // namespace gplab_test

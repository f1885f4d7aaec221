// Copyright 2026 The rbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RBENCH_RNG_HPP
#define RBENCH_RNG_HPP

// Counter-based random streams keyed by (seed, label, a, b). Every draw is a
// pure function of the key and a counter, so results do not depend on thread
// scheduling. Integer and real mappings are written out explicitly because
// <random> distributions are not bit-reproducible across standard libraries.

#include <cstdint>
#include <string_view>

#include "rbench/common.hpp"

namespace rbench {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace detail

class Stream {
   public:
    Stream(std::uint64_t seed, std::string_view label, std::uint64_t a = 0, std::uint64_t b = 0) {
        std::uint64_t k = detail::splitmix64(seed);
        k = detail::splitmix64(k ^ detail::fnv1a(label));
        k = detail::splitmix64(k ^ a);
        key_ = detail::splitmix64(k ^ (b * 0xD1B54A32D192ED03ULL));
    }

    std::uint64_t next() { return detail::splitmix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi]; lo == hi yields lo.
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased uniform integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw ValidationError("cannot draw from an empty range");
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t r;
        do {
            r = next();
        } while (r >= limit);
        return r % n;
    }

   private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace rbench

#endif  // RBENCH_RNG_HPP

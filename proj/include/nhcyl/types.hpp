#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nhc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;

inline constexpr double TWO_PI = 6.283185307179586476925286766559;

/** Wrap a coordinate on the unit torus into [0, 1). */
inline double wrap01(double x) {
    double y = x - std::floor(x);
    return (y >= 1.0) ? y - 1.0 : y;
}

/** Wrap into the symmetric fundamental domain (-1/2, 1/2]. */
inline double wrap_sym(double x) {
    double y = x - std::round(x);
    return (y <= -0.5) ? y + 1.0 : y;
}

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** FNV-1a, used to stamp certificates with a hash of their inputs. */
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 14695981039346656037ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace nhc

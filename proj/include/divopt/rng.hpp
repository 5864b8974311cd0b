#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "divopt/errors.hpp"

// Counter-based random numbers for reproducible parallel simulation.
//
// Scheme (the repo's RNG contract): every draw is a pure function of
// (seed, path_index, step_index, channel). The generator is Philox4x32-10
// (Salmon et al.), keyed by the 64-bit seed and applied to the counter
//
//     ctr = { path_index lo32, path_index hi32, step_index lo32, channel }
//     key = { seed lo32, seed hi32 }
//
// The first two 32-bit output words form a 53-bit uniform in (0,1).
// Channel 0 (W1) and channel 1 (W2) feed the inverse normal CDF (Wichura's
// AS241, double precision); channel 2 (N) feeds single-uniform Poisson
// inversion. Results are therefore independent of thread count, evaluation
// order, and platform.

namespace divopt::rng {

enum Channel : std::uint32_t { W1 = 0, W2 = 1, N = 2 };

namespace detail {

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1C = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
        const std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
        const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
        const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key = {key[0] + W0, key[1] + W1C};
    }
    return ctr;
}

/// Wichura's AS241 PPND16: inverse of the standard normal CDF, accurate to
/// about 1e-16 over (0,1).
inline double inverse_normal_cdf(double prob) {
    const double q = prob - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
        return q * num / den;
    }
    double r = q < 0.0 ? prob : 1.0 - prob;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
        val = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        val = num / den;
    }
    return q < 0.0 ? -val : val;
}

} // namespace detail

/// Uniform draw in the open interval (0,1) from the counter tuple.
inline double uniform(std::uint64_t seed, std::uint64_t path_index, std::uint64_t step_index,
                      Channel channel) {
    const auto out = detail::philox4x32_10(
        {std::uint32_t(path_index), std::uint32_t(path_index >> 32), std::uint32_t(step_index),
         std::uint32_t(channel)},
        {std::uint32_t(seed), std::uint32_t(seed >> 32)});
    const double a = double(out[0] >> 5);   // 27 bits
    const double b = double(out[1] >> 6);   // 26 bits
    return (a * 67108864.0 + b + 0.5) * (1.0 / 9007199254740992.0);
}

/// Standard normal draw (inverse CDF of the channel's uniform).
inline double normal(std::uint64_t seed, std::uint64_t path_index, std::uint64_t step_index,
                     Channel channel) {
    return detail::inverse_normal_cdf(uniform(seed, path_index, step_index, channel));
}

/// Poisson(mean) draw by sequential inversion of a single uniform.
inline std::int64_t poisson(double mean, std::uint64_t seed, std::uint64_t path_index,
                            std::uint64_t step_index) {
    if (!(mean >= 0.0))
        throw DomainError("poisson mean must be nonnegative");
    if (mean == 0.0)
        return 0;
    const double u = uniform(seed, path_index, step_index, Channel::N);
    double pmf = std::exp(-mean);
    double cdf = pmf;
    std::int64_t k = 0;
    while (u > cdf && k < 1000000) {
        ++k;
        pmf *= mean / double(k);
        cdf += pmf;
    }
    return k;
}

} // namespace divopt::rng

#include "posteval/rng.hpp"

#include <cmath>
#include <numbers>

namespace posteval::rng {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

} // namespace

Rng::Rng(std::uint64_t seed) noexcept {
    // SplitMix64 expansion; guarantees a nonzero state.
    std::uint64_t s = seed;
    for (auto& w : state_) {
        s += 0x9E3779B97F4A7C15ULL;
        w = mix64(s);
    }
    state_[0] |= 1;
}

std::uint64_t Rng::next() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform01() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::uniform01_open() noexcept {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_below(std::uint64_t bound) noexcept {
    if (bound < 2) return 0;
    // Rejection sampling over the largest multiple of bound.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % bound;
}

double Rng::normal() noexcept {
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::gamma(double shape) noexcept {
    if (shape < 1.0) {
        // Boost: G(a) = G(a+1) * U^{1/a}.
        const double u = uniform01_open();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01_open();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

void Rng::dirichlet(std::span<const double> alpha, std::span<double> out) noexcept {
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        out[i] = gamma(alpha[i]);
        total += out[i];
    }
    if (total <= 0.0) {
        // All draws underflowed (only possible for minuscule shapes);
        // fall back to the distribution mean.
        double asum = 0.0;
        for (double a : alpha) asum += a;
        for (std::size_t i = 0; i < alpha.size(); ++i) out[i] = alpha[i] / asum;
        return;
    }
    for (auto& v : out) v /= total;
}

std::int64_t Rng::binomial(std::int64_t n, double p) noexcept {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;

    double u = uniform01();

    // Enumerate the pmf outward from the mode, subtracting mass from u.
    // Ratio recurrences keep each step O(1); starting at the mode avoids
    // the (1-p)^n underflow of 0-based inversion.
    std::int64_t mode = static_cast<std::int64_t>(
        std::floor(static_cast<double>(n + 1) * p));
    if (mode > n) mode = n;

    const double logq = std::log1p(-p);
    const double log_pm = std::lgamma(static_cast<double>(n) + 1.0) -
                          std::lgamma(static_cast<double>(mode) + 1.0) -
                          std::lgamma(static_cast<double>(n - mode) + 1.0) +
                          static_cast<double>(mode) * std::log(p) +
                          static_cast<double>(n - mode) * logq;
    const double pm = std::exp(log_pm);
    const double odds = p / (1.0 - p);

    u -= pm;
    if (u <= 0.0) return mode;

    std::int64_t ku = mode;
    std::int64_t kd = mode;
    double tu = pm;
    double td = pm;
    for (;;) {
        bool advanced = false;
        if (ku < n) {
            tu *= static_cast<double>(n - ku) / static_cast<double>(ku + 1) * odds;
            ++ku;
            u -= tu;
            if (u <= 0.0) return ku;
            advanced = true;
        }
        if (kd > 0) {
            td *= static_cast<double>(kd) / static_cast<double>(n - kd + 1) / odds;
            --kd;
            u -= td;
            if (u <= 0.0) return kd;
            advanced = true;
        }
        if (!advanced) return mode; // fp residue beyond total mass
    }
}

void Rng::multinomial(std::int64_t n, std::span<const double> probs,
                      std::span<std::int64_t> out) noexcept {
    std::int64_t remaining = n;
    double prob_left = 1.0;
    const std::size_t k = probs.size();
    for (std::size_t i = 0; i + 1 < k; ++i) {
        if (remaining <= 0 || prob_left <= 0.0) {
            out[i] = 0;
            continue;
        }
        double cond = probs[i] / prob_left;
        if (cond > 1.0) cond = 1.0;
        const std::int64_t draw = binomial(remaining, cond);
        out[i] = draw;
        remaining -= draw;
        prob_left -= probs[i];
    }
    out[k - 1] = remaining > 0 ? remaining : 0;
}

} // namespace posteval::rng

#include "agenda/random.hpp"

#include "agenda/error.hpp"

#include <cmath>
#include <numeric>

namespace agenda {

std::size_t Rng::below(std::size_t n) {
    if (n == 0) throw ValidationError("Rng::below called with n = 0");
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
}

double Rng::normal() {
    // Box-Muller; the second variate is discarded to keep the stream simple.
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::vector<std::size_t> weighted_sample_without_replacement(const std::vector<double>& weights,
                                                             std::size_t count, Rng& rng) {
    std::vector<double> remaining = weights;
    for (double w : remaining) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("sampling weights must be finite and >= 0");
    }
    std::size_t available = 0;
    for (double w : remaining) available += w > 0.0 ? 1 : 0;
    if (count > available) count = available;

    std::vector<std::size_t> picked;
    picked.reserve(count);
    double total = std::accumulate(remaining.begin(), remaining.end(), 0.0);
    while (picked.size() < count) {
        double target = rng.uniform() * total;
        std::size_t chosen = remaining.size();
        double acc = 0.0;
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            if (remaining[i] <= 0.0) continue;
            acc += remaining[i];
            chosen = i;
            if (target < acc) break;
        }
        picked.push_back(chosen);
        remaining[chosen] = 0.0;
        // Recompute instead of subtracting so rounding never accumulates.
        total = std::accumulate(remaining.begin(), remaining.end(), 0.0);
    }
    return picked;
}

}  // namespace agenda

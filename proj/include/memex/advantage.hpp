#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace memex {

// Group-relative advantages: center on the group mean and scale by the
// population standard deviation plus epsilon. A zero-variance group gets
// exact zeros, not epsilon-scaled noise.
inline std::vector<double> group_advantages(const std::vector<double>& rewards,
                                            double eps = 1e-8) {
    if (rewards.size() < 2)
        throw std::invalid_argument("group_advantages: group size must be at least 2");
    if (!(eps > 0.0)) throw std::invalid_argument("group_advantages: eps must be positive");

    bool all_equal = std::all_of(rewards.begin(), rewards.end(),
                                 [&](double r) { return r == rewards.front(); });
    if (all_equal) return std::vector<double>(rewards.size(), 0.0);

    double n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= n;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= n;
    double denom = std::sqrt(var) + eps;

    std::vector<double> out;
    out.reserve(rewards.size());
    for (double r : rewards) out.push_back((r - mean) / denom);
    return out;
}

// Per-token clipped policy-gradient term: min of the raw and clipped
// importance-weighted advantages.
inline double clipped_surrogate_term(double ratio, double advantage, double eta) {
    if (!(ratio > 0.0)) throw std::invalid_argument("clipped_surrogate_term: ratio must be > 0");
    if (!(eta > 0.0) || !(eta < 1.0))
        throw std::invalid_argument("clipped_surrogate_term: eta must be in (0, 1)");
    double clipped = std::clamp(ratio, 1.0 - eta, 1.0 + eta);
    return std::min(ratio * advantage, clipped * advantage);
}

}  // namespace memex

#pragma once

#include "distaf/framework.hpp"

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace distaf {

/// Rescales non-negative weights so they sum to 1. An empty input or an
/// all-zero input has no scorable children.
inline std::map<std::string, double>
normalize_weights(const std::vector<std::pair<std::string, double>>& raw, const std::string& context) {
    if (raw.empty())
        throw Error(ErrorCode::NoScorableChildren, context + " has no scorable children");
    double total = 0.0;
    for (const auto& [code, w] : raw) {
        if (w < 0.0) throw Error(ErrorCode::OutOfRange, context + ": negative weight for " + code);
        total += w;
    }
    if (total <= 0.0)
        throw Error(ErrorCode::NoScorableChildren, context + ": all weights are zero");
    std::map<std::string, double> out;
    for (const auto& [code, w] : raw) out[code] = w / total;
    return out;
}

namespace detail {

// Missing entries default to 1; no entries at all is uniform.
inline double declared_weight(const std::map<std::string, double>& weights, const std::string& code) {
    auto it = weights.find(code);
    return it == weights.end() ? 1.0 : it->second;
}

} // namespace detail

/// Weights of a mechanism's metrics for one phase, summing to 1.
inline std::map<std::string, double> effective_weights(const Mechanism& mech, Phase phase,
                                                      const std::set<std::string>* only = nullptr) {
    std::vector<std::pair<std::string, double>> raw;
    for (const auto* m : mech.metrics_in(phase)) {
        auto code = m->code.str();
        if (only && !only->count(code)) continue;
        raw.emplace_back(code, detail::declared_weight(mech.metric_weights, code));
    }
    return normalize_weights(raw, "mechanism " + mech.code + " (" + std::string(to_string(phase)) + ")");
}

/// Weights of a pillar's mechanisms, excluded ones dropped and the remainder
/// rescaled proportionally. When a phase is given, mechanisms with no
/// metrics in that phase are not children.
inline std::map<std::string, double> effective_weights(const Pillar& pillar,
                                                      const std::set<std::string>& excluded = {},
                                                      std::optional<Phase> phase = std::nullopt) {
    std::vector<std::pair<std::string, double>> raw;
    for (const auto& mech : pillar.mechanisms) {
        if (excluded.count(mech.code) || excluded.count(mechanism_key(pillar.code, mech.code))) continue;
        if (phase && !mech.has_phase(*phase)) continue;
        raw.emplace_back(mech.code, detail::declared_weight(pillar.mechanism_weights, mech.code));
    }
    return normalize_weights(raw, "pillar " + pillar.code);
}

} // namespace distaf

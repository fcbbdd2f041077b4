#pragma once

#include "distaf/framework.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace distaf {

/// What an assessor typed: a truth value for Boolean metrics, a number for
/// Percentage ones.
using RawScore = std::variant<bool, double>;

enum class Origin { Direct, ClusterAnswer, Standard, Inherited };
enum class ValueState { Unscored, Scored };

inline std::string_view to_string(Origin o) {
    switch (o) {
    case Origin::Direct: return "direct";
    case Origin::ClusterAnswer: return "cluster_answer";
    case Origin::Standard: return "standard";
    case Origin::Inherited: return "inherited";
    }
    return "direct";
}

inline Origin parse_origin(std::string_view s) {
    if (s == "direct") return Origin::Direct;
    if (s == "cluster_answer") return Origin::ClusterAnswer;
    if (s == "standard") return Origin::Standard;
    if (s == "inherited") return Origin::Inherited;
    throw Error(ErrorCode::ParseError, "unknown origin '" + std::string(s) + "'");
}

struct MetricValue {
    std::string code;
    std::optional<RawScore> raw;
    std::optional<double> normalized;
    Origin origin = Origin::Direct;
    ValueState state = ValueState::Unscored;

    bool scored() const { return state == ValueState::Scored && normalized.has_value(); }

    /// Equal scores regardless of provenance.
    bool same_value(const MetricValue& o) const {
        return code == o.code && raw == o.raw && normalized == o.normalized && state == o.state;
    }

    friend bool operator==(const MetricValue&, const MetricValue&) = default;
};

inline MetricValue scored_value(std::string code, double normalized, Origin origin,
                                std::optional<RawScore> raw = std::nullopt) {
    return MetricValue{std::move(code), std::move(raw), normalized, origin, ValueState::Scored};
}

/// Maps a raw input onto the homogeneous 0-100 scale where 100 is optimal.
inline double normalize_metric_value(const Metric& m, const RawScore& raw) {
    const auto code = m.code.str();
    if (m.kind == MetricKind::Boolean) {
        if (const bool* b = std::get_if<bool>(&raw)) return *b ? 100.0 : 0.0;
        const double v = std::get<double>(raw);
        if (v == 0.0 || v == 100.0) return v;
        throw Error(ErrorCode::OutOfRange, code + " is boolean; expected true/false or 0/100, got " +
                                              std::to_string(v));
    }
    if (std::holds_alternative<bool>(raw))
        throw Error(ErrorCode::OutOfRange, code + " is a percentage metric; got a truth value");
    const double v = std::get<double>(raw);
    if (!std::isfinite(v) || v < 0.0 || v > 100.0)
        throw Error(ErrorCode::OutOfRange, code + ": raw value " + std::to_string(v) + " outside [0,100]");
    if (m.transform == SanitizationTransform::Complement) return 100.0 - v;
    return v;
}

/// Scores for every metric the chosen answer configures, exactly as listed
/// in the answer.
inline std::vector<MetricValue> apply_cluster_answer(const Mechanism& mech, Phase phase,
                                                     std::size_t answer_index) {
    const auto* q = mech.question_for(phase);
    if (!q)
        throw Error(ErrorCode::NoQuestionForPhase,
                    "mechanism " + mech.code + " has no " + std::string(to_string(phase)) + " question");
    if (answer_index >= q->answers.size())
        throw Error(ErrorCode::BadAnswerIndex, "answer " + std::to_string(answer_index) + " out of " +
                                                   std::to_string(q->answers.size()) + " for " + mech.code);
    const auto& answer = q->answers[answer_index];
    std::vector<MetricValue> out;
    for (const auto& code : mech.cluster_scope(*q)) {
        auto it = answer.configuration.find(code);
        if (it == answer.configuration.end())
            throw Error(ErrorCode::TemplateMismatch, "answer '" + answer.label + "' does not configure " + code);
        out.push_back(scored_value(code, it->second, Origin::ClusterAnswer));
    }
    return out;
}

/// Full marks for every metric the standard satisfies; nothing else.
inline std::vector<MetricValue> apply_standard_compliance(const FrameworkTemplate& t,
                                                          std::string_view standard_id) {
    const auto* s = t.find_standard(standard_id);
    if (!s) throw Error(ErrorCode::UnknownStandard, "standard '" + std::string(standard_id) + "' not in template");
    std::vector<MetricValue> out;
    for (const auto& code : s->satisfied_metrics) out.push_back(scored_value(code, 100.0, Origin::Standard));
    return out;
}

} // namespace distaf

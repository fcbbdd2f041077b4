#pragma once

#include "distaf/assessment.hpp"
#include "distaf/weights.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace distaf {

enum class NodeState {
    Scored,             // every included child scored
    Incomplete,         // some children scored, some not
    Unscored,           // nothing scored yet
    Excluded,           // mechanism excluded from the assessment
    NoScorableChildren, // pillar with every mechanism excluded / none in this phase
};

inline std::string_view to_string(NodeState s) {
    switch (s) {
    case NodeState::Scored: return "scored";
    case NodeState::Incomplete: return "incomplete";
    case NodeState::Unscored: return "unscored";
    case NodeState::Excluded: return "excluded";
    case NodeState::NoScorableChildren: return "no_scorable_children";
    }
    return "unscored";
}

struct AppliedCap {
    std::string metric;
    double cap = 100.0;

    friend bool operator==(const AppliedCap&, const AppliedCap&) = default;
};

struct ScoreNode {
    std::string subject; // pillar code or mechanism key ("S.AC")
    Phase phase = Phase::Design;
    double raw_score = 0.0;
    double capped_score = 0.0;
    std::optional<AppliedCap> applied_cap;
    std::set<std::string> mandatory_violations;
    bool excluded = false;
    NodeState state = NodeState::Unscored;
    double completeness = 0.0;

    friend bool operator==(const ScoreNode&, const ScoreNode&) = default;
};

struct ScoringOptions {
    /// In draft, unscored mandatory metrics warn instead of capping.
    bool draft = true;
};

namespace detail {

inline double clamp_percent(double v) { return std::clamp(v, 0.0, 100.0); }

// sum(w*v) / sum(w) over the declared (unnormalized) weights; with integral
// weights and values this is exact wherever the quotient is representable.
inline std::optional<double> weighted_mean(const std::vector<std::pair<double, double>>& weight_value) {
    double num = 0.0;
    double den = 0.0;
    for (const auto& [w, v] : weight_value) {
        num += w * v;
        den += w;
    }
    if (den <= 0.0) return std::nullopt;
    return clamp_percent(num / den);
}

inline bool is_unsatisfied(const Metric& m, const MetricValue* v, const ScoringOptions& opts) {
    if (!m.mandatory) return false;
    if (!v || !v->scored()) return !opts.draft;
    return *v->normalized < m.mandatory->satisfied_when_at_least;
}

inline void apply_cap(ScoreNode& node, const std::optional<AppliedCap>& tightest) {
    node.capped_score = node.raw_score;
    if (tightest && tightest->cap < node.raw_score) {
        node.capped_score = tightest->cap;
        node.applied_cap = tightest;
    }
}

inline void tighten(std::optional<AppliedCap>& current, const std::string& metric, double cap) {
    if (!current || cap < current->cap) current = AppliedCap{metric, cap};
}

} // namespace detail

using MetricValueMap = std::map<std::string, MetricValue>;

/// Weighted mean of a mechanism's phase metrics, then limited by the
/// mechanism cap of every unsatisfied mandatory metric.
inline ScoreNode mechanism_score(const Mechanism& mech, Phase phase, const MetricValueMap& values,
                                 const ScoringOptions& opts = {}) {
    const auto metrics = mech.metrics_in(phase);
    if (metrics.empty())
        throw Error(ErrorCode::NoScorableChildren,
                    "mechanism " + mech.code + " has no " + std::string(to_string(phase)) + " metrics");

    ScoreNode node;
    node.subject = mechanism_key(metrics.front()->code.pillar, mech.code);
    node.phase = phase;

    std::vector<std::pair<double, double>> scored;
    std::optional<AppliedCap> tightest;
    for (const auto* m : metrics) {
        const auto code = m->code.str();
        auto it = values.find(code);
        const MetricValue* v = it == values.end() ? nullptr : &it->second;
        if (v && v->scored())
            scored.emplace_back(detail::declared_weight(mech.metric_weights, code), *v->normalized);
        if (detail::is_unsatisfied(*m, v, opts)) {
            node.mandatory_violations.insert(code);
            detail::tighten(tightest, code, m->mandatory->mechanism_cap);
        }
    }

    node.completeness = static_cast<double>(scored.size()) / static_cast<double>(metrics.size());
    if (scored.empty()) {
        node.state = NodeState::Unscored;
    } else {
        node.raw_score = detail::weighted_mean(scored).value_or(0.0);
        node.state = scored.size() == metrics.size() ? NodeState::Scored : NodeState::Incomplete;
    }
    detail::apply_cap(node, tightest);
    return node;
}

/// Weighted mean of the included, fully scored mechanisms' capped scores,
/// limited by the pillar cap of every unsatisfied mandatory metric in an
/// included mechanism. `mechanism_nodes` is keyed by mechanism code.
inline ScoreNode pillar_score(const Pillar& pillar, Phase phase, const std::map<std::string, ScoreNode>& mechanism_nodes,
                              const std::set<std::string>& exclusions = {}) {
    ScoreNode node;
    node.subject = pillar.code;
    node.phase = phase;

    std::vector<std::pair<double, double>> complete;
    std::optional<AppliedCap> tightest;
    std::size_t included = 0;
    double included_weight = 0.0;
    bool any_scored = false;
    for (const auto& mech : pillar.mechanisms) {
        if (!mech.has_phase(phase)) continue;
        if (exclusions.count(mech.code) || exclusions.count(mechanism_key(pillar.code, mech.code))) continue;
        auto it = mechanism_nodes.find(mech.code);
        if (it == mechanism_nodes.end())
            throw Error(ErrorCode::NoScorableChildren, "no score for mechanism " + mech.code);
        const auto& child = it->second;
        ++included;
        included_weight += detail::declared_weight(pillar.mechanism_weights, mech.code);
        if (child.state == NodeState::Scored)
            complete.emplace_back(detail::declared_weight(pillar.mechanism_weights, mech.code), child.capped_score);
        if (child.state == NodeState::Scored || child.state == NodeState::Incomplete) any_scored = true;
        for (const auto& code : child.mandatory_violations) {
            node.mandatory_violations.insert(code);
            for (const auto& m : mech.metrics)
                if (m.code.str() == code && m.mandatory) detail::tighten(tightest, code, m.mandatory->pillar_cap);
        }
    }
    if (included == 0 || included_weight <= 0.0)
        throw Error(ErrorCode::NoScorableChildren, "pillar " + pillar.code + " has no included mechanisms in " +
                                                       std::string(to_string(phase)) + " phase");

    auto mean = detail::weighted_mean(complete);
    if (!mean) {
        node.state = any_scored ? NodeState::Incomplete : NodeState::Unscored;
    } else {
        node.raw_score = *mean;
        node.state = complete.size() == included ? NodeState::Scored : NodeState::Incomplete;
    }
    detail::apply_cap(node, tightest);
    return node;
}

struct PhaseScores {
    double completeness = 0.0;
    std::map<std::string, ScoreNode> pillars;
    std::map<std::string, ScoreNode> mechanisms; // keyed "S.AC"
    std::map<std::string, MetricValue> metrics;
    std::vector<std::string> warnings;

    friend bool operator==(const PhaseScores&, const PhaseScores&) = default;
};

struct Scorecard {
    std::string assessment_id;
    TemplateRef template_ref;
    PhaseScores design;
    PhaseScores operational;

    const PhaseScores& phase(Phase p) const { return p == Phase::Design ? design : operational; }
    PhaseScores& phase(Phase p) { return p == Phase::Design ? design : operational; }

    /// Fraction of included metrics scored across both phases.
    double completeness() const { return std::min(design.completeness, operational.completeness); }

    friend bool operator==(const Scorecard&, const Scorecard&) = default;
};

/// Fills `normalized` for entries that carry only a raw input and rejects
/// codes the template does not define.
inline void normalize_values(const TemplateIndex& index, MetricValueMap& values) {
    for (auto& [code, v] : values) {
        const auto* entry = index.find_metric(code);
        if (!entry)
            throw Error(ErrorCode::TemplateMismatch, "assessment references unknown metric " + code);
        if (v.state == ValueState::Scored && !v.normalized) {
            if (!v.raw) throw Error(ErrorCode::ParseError, code + " is scored but has no value");
            v.normalized = normalize_metric_value(*entry->metric, *v.raw);
        }
        if (v.normalized && (*v.normalized < 0.0 || *v.normalized > 100.0))
            throw Error(ErrorCode::OutOfRange, code + ": normalized value outside [0,100]");
    }
}

inline void check_references(const TemplateIndex& index, const AssessmentState& a) {
    const auto& t = index.framework();
    if (a.template_ref.id != t.id || a.template_ref.version != t.version)
        throw Error(ErrorCode::TemplateMismatch, "assessment " + a.id + " uses template " + a.template_ref.id +
                                                     "@" + a.template_ref.version + ", not " + t.id + "@" +
                                                     t.version);
    for (const auto& key : a.excluded_mechanisms)
        if (!index.find_mechanism(key))
            throw Error(ErrorCode::TemplateMismatch, "exclusion references unknown mechanism " + key);
    for (const auto& s : a.declared_standards)
        if (!t.find_standard(s))
            throw Error(ErrorCode::TemplateMismatch, "assessment declares unknown standard " + s);
    for (const auto& [key, idx] : a.chosen_answers) {
        const auto* e = index.find_mechanism(key.mechanism);
        if (!e) throw Error(ErrorCode::TemplateMismatch, "answer for unknown mechanism " + key.mechanism);
        const auto* q = e->mechanism->question_for(key.phase);
        if (!q || idx >= q->answers.size())
            throw Error(ErrorCode::TemplateMismatch, "answer " + std::to_string(idx) + " invalid for " +
                                                         key.mechanism + " (" + std::string(to_string(key.phase)) +
                                                         ")");
    }
}

/// The values the engine scores: stored values first; any metric without a
/// stored value is filled from recorded cluster answers, then declared
/// standards on top.
inline MetricValueMap effective_values(const TemplateIndex& index, const AssessmentState& a) {
    MetricValueMap stored = a.metric_values;
    normalize_values(index, stored);

    MetricValueMap filled;
    for (const auto& [key, idx] : a.chosen_answers) {
        const auto& e = index.mechanism(key.mechanism);
        for (auto& v : apply_cluster_answer(*e.mechanism, key.phase, idx)) filled[v.code] = std::move(v);
    }
    for (const auto& s : a.declared_standards)
        for (auto& v : apply_standard_compliance(index.framework(), s)) filled[v.code] = std::move(v);

    for (auto& [code, v] : filled) {
        auto it = stored.find(code);
        if (it == stored.end() || !it->second.scored()) stored[code] = std::move(v);
    }
    return stored;
}

/// Runs the whole pipeline for both phases independently.
inline Scorecard assessment_scorecard(const FrameworkTemplate& t, const AssessmentState& a) {
    const TemplateIndex index(t);
    check_references(index, a);
    const auto values = effective_values(index, a);
    const ScoringOptions opts{a.status == Status::Draft};

    Scorecard card;
    card.assessment_id = a.id;
    card.template_ref = {t.id, t.version};

    for (Phase phase : kPhases) {
        auto& out = card.phase(phase);
        std::size_t included_metrics = 0;
        std::size_t scored_metrics = 0;

        for (const auto& pillar : t.pillars) {
            std::map<std::string, ScoreNode> by_code;
            std::set<std::string> excluded;
            for (const auto& mech : pillar.mechanisms) {
                if (!mech.has_phase(phase)) continue;
                const auto key = mechanism_key(pillar.code, mech.code);
                auto node = mechanism_score(mech, phase, values, opts);
                if (a.is_excluded(key)) {
                    excluded.insert(mech.code);
                    node.excluded = true;
                    node.state = NodeState::Excluded;
                } else {
                    for (const auto* m : mech.metrics_in(phase)) {
                        const auto code = m->code.str();
                        auto it = values.find(code);
                        MetricValue v;
                        v.code = code;
                        if (it != values.end()) v = it->second;
                        ++included_metrics;
                        if (v.scored()) {
                            ++scored_metrics;
                        } else {
                            v = MetricValue{};
                            v.code = code;
                            if (m->mandatory && opts.draft)
                                out.warnings.push_back("mandatory metric " + code + " is unscored");
                        }
                        out.metrics.emplace(code, std::move(v));
                    }
                    if (node.state == NodeState::Incomplete)
                        out.warnings.push_back("mechanism " + key + " is incomplete and left out of pillar " +
                                               pillar.code);
                }
                by_code.emplace(mech.code, node);
                out.mechanisms.emplace(key, std::move(node));
            }

            ScoreNode pnode;
            try {
                pnode = pillar_score(pillar, phase, by_code, excluded);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoScorableChildren) throw;
                pnode = ScoreNode{};
                pnode.subject = pillar.code;
                pnode.phase = phase;
                pnode.state = NodeState::NoScorableChildren;
                out.warnings.push_back("pillar " + pillar.code + " has no scorable mechanisms");
            }
            std::size_t p_total = 0, p_scored = 0;
            for (const auto& mech : pillar.mechanisms) {
                if (!mech.has_phase(phase) || excluded.count(mech.code)) continue;
                for (const auto* m : mech.metrics_in(phase)) {
                    ++p_total;
                    p_scored += out.metrics.at(m->code.str()).scored();
                }
            }
            pnode.completeness = p_total ? static_cast<double>(p_scored) / static_cast<double>(p_total) : 1.0;
            out.pillars.emplace(pillar.code, std::move(pnode));
        }
        out.completeness = included_metrics ? static_cast<double>(scored_metrics) /
                                                  static_cast<double>(included_metrics)
                                            : 1.0;
    }
    return card;
}

/// Scores rounded to one decimal for display.
inline double display_round(double v) { return std::round(v * 10.0) / 10.0; }

inline json to_json(const ScoreNode& n) {
    json j = {{"subject", n.subject},
              {"phase", to_string(n.phase)},
              {"raw_score", n.raw_score},
              {"capped_score", n.capped_score},
              {"mandatory_violations", n.mandatory_violations},
              {"excluded", n.excluded},
              {"state", to_string(n.state)},
              {"completeness", n.completeness}};
    j["applied_cap"] = n.applied_cap ? json{{"metric", n.applied_cap->metric}, {"cap", n.applied_cap->cap}}
                                     : json(nullptr);
    return j;
}

inline NodeState parse_node_state(std::string_view s) {
    for (auto st : {NodeState::Scored, NodeState::Incomplete, NodeState::Unscored, NodeState::Excluded,
                    NodeState::NoScorableChildren})
        if (to_string(st) == s) return st;
    throw Error(ErrorCode::ParseError, "unknown node state '" + std::string(s) + "'");
}

inline ScoreNode score_node_from_json(const json& j) {
    ScoreNode n;
    n.subject = j.at("subject").get<std::string>();
    n.phase = parse_phase(j.at("phase").get<std::string>());
    n.raw_score = j.at("raw_score").get<double>();
    n.capped_score = j.at("capped_score").get<double>();
    n.mandatory_violations = j.at("mandatory_violations").get<std::set<std::string>>();
    n.excluded = j.at("excluded").get<bool>();
    n.state = parse_node_state(j.at("state").get<std::string>());
    n.completeness = j.at("completeness").get<double>();
    if (const auto& c = j.at("applied_cap"); !c.is_null())
        n.applied_cap = AppliedCap{c.at("metric").get<std::string>(), c.at("cap").get<double>()};
    return n;
}

inline json to_json(const Scorecard& card) {
    json phases = json::object();
    for (Phase p : kPhases) {
        const auto& ps = card.phase(p);
        json pillars = json::object(), mechs = json::object(), metrics = json::object();
        for (const auto& [k, n] : ps.pillars) pillars[k] = to_json(n);
        for (const auto& [k, n] : ps.mechanisms) mechs[k] = to_json(n);
        for (const auto& [k, v] : ps.metrics) metrics[k] = to_json(v);
        phases[std::string(to_string(p))] = {{"completeness", ps.completeness},
                                             {"pillars", pillars},
                                             {"mechanisms", mechs},
                                             {"metrics", metrics},
                                             {"warnings", ps.warnings}};
    }
    return {{"assessment_id", card.assessment_id},
            {"template", {{"id", card.template_ref.id}, {"version", card.template_ref.version}}},
            {"phases", phases}};
}

inline Scorecard scorecard_from_json(const json& j) {
    try {
        Scorecard card;
        card.assessment_id = j.at("assessment_id").get<std::string>();
        card.template_ref = {j.at("template").at("id").get<std::string>(),
                             j.at("template").at("version").get<std::string>()};
        for (Phase p : kPhases) {
            const auto& pj = j.at("phases").at(std::string(to_string(p)));
            auto& ps = card.phase(p);
            ps.completeness = pj.at("completeness").get<double>();
            for (const auto& [k, n] : pj.at("pillars").items()) ps.pillars[k] = score_node_from_json(n);
            for (const auto& [k, n] : pj.at("mechanisms").items()) ps.mechanisms[k] = score_node_from_json(n);
            for (const auto& [k, v] : pj.at("metrics").items())
                ps.metrics[k] = metric_value_from_json(k, v, "$.phases.metrics." + k);
            ps.warnings = pj.at("warnings").get<std::vector<std::string>>();
        }
        return card;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("scorecard: ") + e.what());
    }
}

} // namespace distaf

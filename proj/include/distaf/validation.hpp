#pragma once

#include "distaf/framework.hpp"
#include "distaf/weights.hpp"

#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace distaf {

enum class Severity { Error, Warning };

struct Finding {
    Severity severity = Severity::Error;
    std::string path;
    std::string message;

    friend bool operator==(const Finding&, const Finding&) = default;
};

struct ValidationReport {
    std::vector<Finding> findings;

    bool empty() const { return findings.empty(); }

    bool has_errors() const {
        for (const auto& f : findings)
            if (f.severity == Severity::Error) return true;
        return false;
    }

    std::size_t error_count() const {
        std::size_t n = 0;
        for (const auto& f : findings) n += f.severity == Severity::Error;
        return n;
    }

    bool mentions(std::string_view text) const {
        for (const auto& f : findings)
            if (f.message.find(text) != std::string::npos) return true;
        return false;
    }
};

inline std::ostream& operator<<(std::ostream& os, const ValidationReport& r) {
    for (const auto& f : r.findings)
        os << (f.severity == Severity::Error ? "error" : "warning") << ": " << f.path << ": "
           << f.message << "\n";
    return os;
}

namespace detail {

inline bool in_percent_range(double v) { return std::isfinite(v) && v >= 0.0 && v <= 100.0; }

class Validator {
public:
    explicit Validator(const FrameworkTemplate& t) : t_(t) {}

    ValidationReport run() {
        if (t_.id.empty()) error("$.id", "template id is empty");
        if (t_.version.empty()) error("$.version", "template version is empty");
        if (t_.pillars.empty()) error("$.pillars", "template has no pillars");

        std::set<std::string> pillar_codes;
        for (std::size_t pi = 0; pi < t_.pillars.size(); ++pi) {
            const auto& p = t_.pillars[pi];
            const auto ppath = "$.pillars[" + std::to_string(pi) + "]";
            if (!is_code_token(p.code)) error(ppath + ".code", "pillar code must be 1-8 letters A-Z");
            if (!pillar_codes.insert(p.code).second) error(ppath + ".code", "duplicate pillar code " + p.code);
            check_pillar(p, ppath);
        }

        for (std::size_t si = 0; si < t_.standards.size(); ++si) {
            const auto& s = t_.standards[si];
            const auto spath = "$.standards[" + std::to_string(si) + "]";
            if (s.standard_id.empty()) error(spath + ".standard_id", "standard id is empty");
            if (!standard_ids_.insert(s.standard_id).second)
                error(spath + ".standard_id", "duplicate standard id " + s.standard_id);
            if (s.satisfied_metrics.empty()) error(spath, "standards mapping satisfies no metrics");
            for (const auto& code : s.satisfied_metrics)
                if (!metric_kinds_.count(code))
                    error(spath + ".satisfied_metrics", "standards mapping references unknown metric " + code);
        }
        return std::move(report_);
    }

private:
    void error(std::string path, std::string msg) {
        report_.findings.push_back({Severity::Error, std::move(path), std::move(msg)});
    }
    void warning(std::string path, std::string msg) {
        report_.findings.push_back({Severity::Warning, std::move(path), std::move(msg)});
    }

    void check_weights(const std::map<std::string, double>& weights, const std::string& path) {
        for (const auto& [k, w] : weights)
            if (!std::isfinite(w) || w < 0.0) error(path + "." + k, "negative weight " + std::to_string(w));
    }

    void check_pillar(const Pillar& p, const std::string& ppath) {
        std::set<std::string> mech_codes;
        if (p.mechanisms.empty()) warning(ppath, "pillar " + p.code + " has no mechanisms");
        check_weights(p.mechanism_weights, ppath + ".mechanism_weights");
        for (const auto& [k, w] : p.mechanism_weights)
            if (!p.find_mechanism(k))
                error(ppath + ".mechanism_weights." + k, "weight for unknown mechanism " + k);

        bool any_positive = p.mechanisms.empty();
        for (std::size_t mi = 0; mi < p.mechanisms.size(); ++mi) {
            const auto& mech = p.mechanisms[mi];
            const auto mpath = ppath + ".mechanisms[" + std::to_string(mi) + "]";
            if (!is_code_token(mech.code)) error(mpath + ".code", "mechanism code must be 1-8 letters A-Z");
            if (!mech_codes.insert(mech.code).second)
                error(mpath + ".code", "duplicate mechanism code " + mech.code);
            if (!p.mechanism_weights.empty() && !p.mechanism_weights.count(mech.code))
                warning(mpath, "no weight for mechanism " + mech.code + ", defaulting to 1");
            if (declared_weight(p.mechanism_weights, mech.code) > 0.0) any_positive = true;
            check_mechanism(p, mech, mpath);
        }
        if (!any_positive) error(ppath + ".mechanism_weights", "pillar " + p.code + " has no positive weight");
    }

    void check_mechanism(const Pillar& p, const Mechanism& mech, const std::string& mpath) {
        std::set<std::string> local;
        if (mech.metrics.empty()) warning(mpath, "mechanism " + mech.code + " has no metrics");
        for (std::size_t k = 0; k < mech.metrics.size(); ++k) {
            const auto& m = mech.metrics[k];
            const auto path = mpath + ".metrics[" + std::to_string(k) + "]";
            const auto code = m.code.str();
            if (m.code.pillar != p.code || m.code.mechanism != mech.code)
                error(path + ".code", "metric code " + code + " does not belong to " +
                                          mechanism_key(p.code, mech.code));
            if (!local.insert(code).second || metric_kinds_.count(code))
                error(path + ".code", "duplicate metric code " + code);
            metric_kinds_.emplace(code, m.kind);
            if (m.mandatory) {
                const auto& c = *m.mandatory;
                if (!in_percent_range(c.mechanism_cap))
                    error(path + ".mandatory.mechanism_cap", "cap out of range [0,100]");
                if (!in_percent_range(c.pillar_cap))
                    error(path + ".mandatory.pillar_cap", "cap out of range [0,100]");
                if (!in_percent_range(c.satisfied_when_at_least))
                    error(path + ".mandatory.satisfied_when_at_least", "threshold out of range [0,100]");
            }
            if (m.kind == MetricKind::Boolean && m.transform == SanitizationTransform::Complement)
                warning(path + ".transform", "complement transform on a boolean metric has no effect");
        }

        check_weights(mech.metric_weights, mpath + ".metric_weights");
        for (const auto& [k, w] : mech.metric_weights)
            if (!local.count(k)) error(mpath + ".metric_weights." + k, "weight for unknown metric " + k);
        for (Phase phase : kPhases) {
            auto in_phase = mech.metrics_in(phase);
            if (in_phase.empty()) continue;
            bool any_positive = false;
            for (const auto* m : in_phase) {
                auto code = m->code.str();
                if (!mech.metric_weights.empty() && !mech.metric_weights.count(code))
                    warning(mpath + ".metric_weights", "no weight for metric " + code + ", defaulting to 1");
                if (declared_weight(mech.metric_weights, code) > 0.0) any_positive = true;
            }
            if (!any_positive)
                error(mpath + ".metric_weights", "mechanism " + mech.code + " has no positive weight in " +
                                                     std::string(to_string(phase)) + " phase");
        }

        std::set<Phase> question_phases;
        for (std::size_t qi = 0; qi < mech.cluster_questions.size(); ++qi) {
            const auto& q = mech.cluster_questions[qi];
            const auto qpath = mpath + ".cluster_questions[" + std::to_string(qi) + "]";
            if (!question_phases.insert(q.phase).second)
                error(qpath + ".phase", "more than one cluster question for " + std::string(to_string(q.phase)) +
                                            " phase");
            check_question(mech, q, qpath);
        }
    }

    void check_question(const Mechanism& mech, const ClusterQuestion& q, const std::string& qpath) {
        std::map<std::string, const Metric*> phase_metrics;
        for (const auto* m : mech.metrics_in(q.phase)) phase_metrics.emplace(m->code.str(), m);
        if (phase_metrics.empty())
            error(qpath, "cluster question for a phase in which the mechanism has no metrics");

        std::set<std::string> scope;
        for (const auto& code : q.metrics) {
            if (!phase_metrics.count(code))
                error(qpath + ".metrics", "cluster metric " + code + " is not a " +
                                              std::string(to_string(q.phase)) + " metric of " + mech.code);
            scope.insert(code);
        }
        if (q.metrics.empty())
            for (const auto& [code, _] : phase_metrics) scope.insert(code);

        if (q.answers.empty()) error(qpath + ".answers", "cluster question has no answers");
        for (std::size_t ai = 0; ai < q.answers.size(); ++ai) {
            const auto& a = q.answers[ai];
            const auto apath = qpath + ".answers[" + std::to_string(ai) + "]";
            for (const auto& code : scope)
                if (!a.configuration.count(code))
                    error(apath + ".configuration", "answer configuration incomplete: '" + a.label +
                                                        "' omits " + code);
            for (const auto& [code, value] : a.configuration) {
                if (!scope.count(code)) {
                    error(apath + ".configuration", "answer configuration has extra metric " + code);
                    continue;
                }
                if (!in_percent_range(value))
                    error(apath + ".configuration." + code, "configuration value out of range [0,100]");
                auto it = phase_metrics.find(code);
                if (it != phase_metrics.end() && it->second->kind == MetricKind::Boolean && value != 0.0 &&
                    value != 100.0)
                    error(apath + ".configuration." + code, "boolean metric configured with value other than 0/100");
            }
        }
    }

    const FrameworkTemplate& t_;
    ValidationReport report_;
    std::map<std::string, MetricKind> metric_kinds_;
    std::set<std::string> standard_ids_;
};

} // namespace detail

/// Checks every structural invariant of a template. An empty report means
/// the template is safe to score against.
inline ValidationReport validate_template(const FrameworkTemplate& t) {
    return detail::Validator(t).run();
}

} // namespace distaf

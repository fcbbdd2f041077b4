#pragma once

#include "distaf/errors.hpp"
#include "distaf/metric_code.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace distaf {

enum class MetricKind { Boolean, Percentage };

/// Complement maps a raw value r to 100 - r so that 100 is always optimal
/// (e.g. a false rejection rate).
enum class SanitizationTransform { Identity, Complement };

struct MandatoryCaps {
    double mechanism_cap = 100.0;
    double pillar_cap = 100.0;
    double satisfied_when_at_least = 100.0;

    friend bool operator==(const MandatoryCaps&, const MandatoryCaps&) = default;
};

struct Metric {
    MetricCode code;
    std::string title;
    std::string description;
    MetricKind kind = MetricKind::Boolean;
    std::optional<SanitizationTransform> transform;
    std::optional<MandatoryCaps> mandatory;
    std::vector<std::string> references;

    Phase phase() const { return code.phase; }

    friend bool operator==(const Metric&, const Metric&) = default;
};

struct Answer {
    std::string label;
    std::map<std::string, double> configuration; // metric code -> score

    friend bool operator==(const Answer&, const Answer&) = default;
};

struct ClusterQuestion {
    Phase phase = Phase::Design;
    std::string prompt;
    /// Metrics the cluster configures. Empty means every metric of the
    /// mechanism in this phase.
    std::vector<std::string> metrics;
    std::vector<Answer> answers;

    friend bool operator==(const ClusterQuestion&, const ClusterQuestion&) = default;
};

struct Mechanism {
    std::string code;
    std::string name;
    std::vector<Metric> metrics;
    std::map<std::string, double> metric_weights;
    std::vector<ClusterQuestion> cluster_questions;

    const ClusterQuestion* question_for(Phase phase) const {
        for (const auto& q : cluster_questions)
            if (q.phase == phase) return &q;
        return nullptr;
    }

    std::vector<const Metric*> metrics_in(Phase phase) const {
        std::vector<const Metric*> out;
        for (const auto& m : metrics)
            if (m.phase() == phase) out.push_back(&m);
        return out;
    }

    bool has_phase(Phase phase) const {
        for (const auto& m : metrics)
            if (m.phase() == phase) return true;
        return false;
    }

    /// Metric codes a cluster question configures, in template order.
    std::vector<std::string> cluster_scope(const ClusterQuestion& q) const {
        if (!q.metrics.empty()) return q.metrics;
        std::vector<std::string> out;
        for (const auto* m : metrics_in(q.phase)) out.push_back(m->code.str());
        return out;
    }

    friend bool operator==(const Mechanism&, const Mechanism&) = default;
};

struct Pillar {
    std::string code;
    std::string name;
    std::vector<Mechanism> mechanisms;
    std::map<std::string, double> mechanism_weights;

    const Mechanism* find_mechanism(std::string_view code_) const {
        for (const auto& m : mechanisms)
            if (m.code == code_) return &m;
        return nullptr;
    }

    friend bool operator==(const Pillar&, const Pillar&) = default;
};

struct StandardsMapping {
    std::string standard_id;
    std::string display_name;
    std::vector<std::string> satisfied_metrics;
    std::string notes;

    friend bool operator==(const StandardsMapping&, const StandardsMapping&) = default;
};

struct FrameworkTemplate {
    std::string id;
    std::string version;
    std::string name;
    std::vector<Pillar> pillars;
    std::vector<StandardsMapping> standards;

    const Pillar* find_pillar(std::string_view code) const {
        for (const auto& p : pillars)
            if (p.code == code) return &p;
        return nullptr;
    }

    const StandardsMapping* find_standard(std::string_view id_) const {
        for (const auto& s : standards)
            if (s.standard_id == id_) return &s;
        return nullptr;
    }

    friend bool operator==(const FrameworkTemplate&, const FrameworkTemplate&) = default;
};

/// Code-based lookups over an immutable template. Holds pointers into the
/// template, which must outlive it.
class TemplateIndex {
public:
    struct MetricEntry {
        const Pillar* pillar;
        const Mechanism* mechanism;
        const Metric* metric;
    };
    struct MechanismEntry {
        const Pillar* pillar;
        const Mechanism* mechanism;
    };

    explicit TemplateIndex(const FrameworkTemplate& t) : template_(&t) {
        for (const auto& p : t.pillars) {
            for (const auto& mech : p.mechanisms) {
                mechanisms_.emplace(mechanism_key(p.code, mech.code), MechanismEntry{&p, &mech});
                for (const auto& m : mech.metrics)
                    metrics_.emplace(m.code.str(), MetricEntry{&p, &mech, &m});
            }
        }
    }

    const FrameworkTemplate& framework() const { return *template_; }

    /// Accepts any spelling parse_metric_code accepts ("s.saa.o10").
    const MetricEntry* find_metric(std::string_view code) const {
        auto it = metrics_.find(std::string(code));
        if (it == metrics_.end()) {
            try {
                it = metrics_.find(parse_metric_code(code).str());
            } catch (const Error&) {
                return nullptr;
            }
        }
        return it == metrics_.end() ? nullptr : &it->second;
    }

    const MetricEntry& metric(std::string_view code) const {
        if (const auto* e = find_metric(code)) return *e;
        throw Error(ErrorCode::UnknownCode, "metric '" + std::string(code) + "' is not in template " +
                                                template_->id);
    }

    const MechanismEntry* find_mechanism(std::string_view key) const {
        auto it = mechanisms_.find(std::string(key));
        return it == mechanisms_.end() ? nullptr : &it->second;
    }

    const MechanismEntry& mechanism(std::string_view key) const {
        if (const auto* e = find_mechanism(key)) return *e;
        throw Error(ErrorCode::UnknownMechanism, "mechanism '" + std::string(key) +
                                                     "' is not in template " + template_->id);
    }

    std::size_t metric_count() const { return metrics_.size(); }

private:
    const FrameworkTemplate* template_;
    std::map<std::string, MetricEntry> metrics_;
    std::map<std::string, MechanismEntry> mechanisms_;
};

} // namespace distaf

#pragma once

#include "distaf/scoring.hpp"
#include "distaf/validation.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

namespace distaf {

/// Immutable set of validated templates keyed by (id, version).
class TemplateRegistry {
public:
    TemplateRegistry() = default;

    /// Loads every *.json under `dir`. Templates failing validation are
    /// rejected with a ParseError naming the first finding.
    static TemplateRegistry from_directory(const std::filesystem::path& dir) {
        TemplateRegistry reg;
        if (!std::filesystem::is_directory(dir))
            throw Error(ErrorCode::IoError, "template directory " + dir.string() + " does not exist");
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) reg.add(load_template(f));
        return reg;
    }

    void add(FrameworkTemplate t) {
        auto report = validate_template(t);
        if (report.has_errors()) {
            for (const auto& f : report.findings)
                if (f.severity == Severity::Error)
                    throw Error(ErrorCode::ParseError, "template " + t.id + " invalid: " + f.path + ": " + f.message);
        }
        auto key = std::make_pair(t.id, t.version);
        templates_[key] = std::make_shared<const FrameworkTemplate>(std::move(t));
    }

    /// Without a version, the greatest version string of that id.
    std::shared_ptr<const FrameworkTemplate> get(const std::string& id,
                                                 const std::optional<std::string>& version = std::nullopt) const {
        if (version) {
            auto it = templates_.find({id, *version});
            if (it == templates_.end()) throw Error(ErrorCode::UnknownTemplate, id + "@" + *version);
            return it->second;
        }
        std::shared_ptr<const FrameworkTemplate> best;
        for (const auto& [key, t] : templates_)
            if (key.first == id) best = t;
        if (!best) throw Error(ErrorCode::UnknownTemplate, id);
        return best;
    }

    std::shared_ptr<const FrameworkTemplate> get(const TemplateRef& ref) const { return get(ref.id, ref.version); }

    std::vector<std::shared_ptr<const FrameworkTemplate>> all() const {
        std::vector<std::shared_ptr<const FrameworkTemplate>> out;
        for (const auto& [key, t] : templates_) out.push_back(t);
        return out;
    }

private:
    std::map<std::pair<std::string, std::string>, std::shared_ptr<const FrameworkTemplate>> templates_;
};

struct CreateRequest {
    std::string template_id;
    std::optional<std::string> template_version;
    std::string description;
    std::optional<std::string> id; // generated when absent
    std::optional<std::string> from;
};

struct CreateResult {
    AssessmentState state;
    std::vector<std::string> warnings;
};

using Clock = std::function<Timestamp()>;

inline Timestamp system_now() {
    return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

inline bool valid_assessment_id(const std::string& id) {
    static const std::regex pattern("[A-Za-z0-9][A-Za-z0-9_.-]{0,63}");
    return std::regex_match(id, pattern) && id.find("..") == std::string::npos;
}

/// Versioned assessments with optimistic locking. Every write names the
/// revision it was based on and bumps it by exactly one. With a data
/// directory, each assessment is persisted as <dir>/assessments/<id>.json.
class AssessmentStore {
public:
    explicit AssessmentStore(const TemplateRegistry& templates, std::optional<std::filesystem::path> data_dir = {},
                             Clock clock = system_now)
        : templates_(templates), dir_(std::move(data_dir)), clock_(std::move(clock)) {
        if (!dir_) return;
        const auto adir = *dir_ / "assessments";
        std::filesystem::create_directories(adir);
        for (const auto& entry : std::filesystem::directory_iterator(adir)) {
            if (entry.path().extension() != ".json") continue;
            auto a = load_assessment(entry.path());
            items_[a.id] = std::move(a);
        }
    }

    CreateResult create_assessment(const CreateRequest& req) {
        std::unique_lock lock(mutex_);
        CreateResult result;
        auto tmpl = templates_.get(req.template_id, req.template_version);

        AssessmentState a;
        a.id = req.id ? *req.id : next_id_locked();
        if (!valid_assessment_id(a.id)) throw Error(ErrorCode::ParseError, "invalid assessment id '" + a.id + "'");
        if (items_.count(a.id)) throw Error(ErrorCode::DuplicateAssessment, a.id);
        a.description = req.description;
        a.template_ref = {tmpl->id, tmpl->version};
        a.created_at = a.last_modified = clock_();
        a.status = Status::Draft;
        a.revision = 1;

        if (req.from) {
            auto it = items_.find(*req.from);
            if (it == items_.end()) throw Error(ErrorCode::UnknownPredecessor, *req.from);
            const auto& prev = it->second;
            if (prev.template_ref.id != tmpl->id)
                throw Error(ErrorCode::TemplateMismatch, "predecessor " + prev.id + " uses template " +
                                                             prev.template_ref.id);
            if (!req.template_version) {
                // Stay on the predecessor's version unless told otherwise.
                tmpl = templates_.get(prev.template_ref);
                a.template_ref = prev.template_ref;
            } else if (prev.template_ref.version != tmpl->version) {
                result.warnings.push_back("template version drift: predecessor uses " + prev.template_ref.version +
                                          ", new assessment uses " + tmpl->version);
            }
            const TemplateIndex index(*tmpl);
            for (const auto& [code, v] : prev.metric_values) {
                if (!index.find_metric(code)) {
                    result.warnings.push_back("dropped " + code + ": not in template version " + tmpl->version);
                    continue;
                }
                MetricValue copy = v;
                copy.origin = Origin::Inherited;
                a.metric_values.emplace(code, std::move(copy));
            }
            for (const auto& [key, idx] : prev.chosen_answers) {
                const auto* e = index.find_mechanism(key.mechanism);
                const auto* q = e ? e->mechanism->question_for(key.phase) : nullptr;
                if (q && idx < q->answers.size()) a.chosen_answers.emplace(key, idx);
                else result.warnings.push_back("dropped answer for " + key.mechanism);
            }
            for (const auto& s : prev.declared_standards)
                if (tmpl->find_standard(s)) a.declared_standards.insert(s);
            for (const auto& m : prev.excluded_mechanisms)
                if (index.find_mechanism(m)) a.excluded_mechanisms.insert(m);
            a.predecessor = prev.id;
        }

        persist_locked(a);
        items_.emplace(a.id, a);
        result.state = std::move(a);
        return result;
    }

    AssessmentState get(const std::string& id) const {
        std::shared_lock lock(mutex_);
        return find_locked(id);
    }

    bool contains(const std::string& id) const {
        std::shared_lock lock(mutex_);
        return items_.count(id) > 0;
    }

    std::vector<AssessmentState> list() const {
        std::shared_lock lock(mutex_);
        std::vector<AssessmentState> out;
        for (const auto& [id, a] : items_) out.push_back(a);
        return out;
    }

    std::shared_ptr<const FrameworkTemplate> template_for(const AssessmentState& a) const {
        return templates_.get(a.template_ref);
    }

    Scorecard scorecard(const std::string& id) const {
        auto a = get(id);
        return assessment_scorecard(*template_for(a), a);
    }

    AssessmentState set_metric_value(const std::string& id, std::uint64_t revision, const std::string& code,
                                     const RawScore& raw) {
        return set_metric_values(id, revision, {{code, raw}});
    }

    /// Several direct edits as one write.
    AssessmentState set_metric_values(const std::string& id, std::uint64_t revision,
                                      const std::vector<std::pair<std::string, RawScore>>& edits) {
        std::vector<std::pair<std::string, std::optional<RawScore>>> general(edits.begin(), edits.end());
        return edit_metric_values(id, revision, general);
    }

    AssessmentState clear_metric_value(const std::string& id, std::uint64_t revision, const std::string& code) {
        return edit_metric_values(id, revision, {{code, std::nullopt}});
    }

    /// Direct edits as one write; nullopt clears a metric back to unscored.
    AssessmentState edit_metric_values(const std::string& id, std::uint64_t revision,
                                       const std::vector<std::pair<std::string, std::optional<RawScore>>>& edits) {
        return write(id, revision, [&](AssessmentState& a, const TemplateIndex& index) {
            require_draft(a);
            for (const auto& [code, raw] : edits) {
                const auto& entry = index.metric(code);
                const auto canonical = entry.metric->code.str();
                if (!raw) {
                    a.metric_values.erase(canonical);
                    continue;
                }
                const double normalized = normalize_metric_value(*entry.metric, *raw);
                a.metric_values[canonical] = scored_value(canonical, normalized, Origin::Direct, raw);
            }
        });
    }

    /// Records the answer and writes its configuration over the cluster's
    /// metrics; nullopt forgets the answer but keeps the values.
    AssessmentState set_cluster_answer(const std::string& id, std::uint64_t revision, const std::string& mech_key,
                                       Phase phase, std::optional<std::size_t> answer) {
        return write(id, revision, [&](AssessmentState& a, const TemplateIndex& index) {
            require_draft(a);
            const auto& entry = index.mechanism(mech_key);
            if (!answer) {
                a.chosen_answers.erase({mech_key, phase});
                return;
            }
            for (auto& v : apply_cluster_answer(*entry.mechanism, phase, *answer)) a.metric_values[v.code] = v;
            a.chosen_answers[{mech_key, phase}] = *answer;
        });
    }

    AssessmentState set_standard(const std::string& id, std::uint64_t revision, const std::string& standard_id,
                                 bool declared) {
        return write(id, revision, [&](AssessmentState& a, const TemplateIndex& index) {
            require_draft(a);
            const auto& t = index.framework();
            auto values = apply_standard_compliance(t, standard_id);
            if (declared) {
                for (auto& v : values) a.metric_values[v.code] = v;
                a.declared_standards.insert(standard_id);
                return;
            }
            a.declared_standards.erase(standard_id);
            std::set<std::string> still_covered;
            for (const auto& s : a.declared_standards)
                for (const auto& v : apply_standard_compliance(t, s)) still_covered.insert(v.code);
            for (const auto& v : values) {
                auto it = a.metric_values.find(v.code);
                if (it != a.metric_values.end() && it->second.origin == Origin::Standard &&
                    !still_covered.count(v.code))
                    a.metric_values.erase(it);
            }
        });
    }

    AssessmentState set_mechanism_exclusion(const std::string& id, std::uint64_t revision, const std::string& mech_key,
                                            bool excluded) {
        return write(id, revision, [&](AssessmentState& a, const TemplateIndex& index) {
            require_draft(a);
            index.mechanism(mech_key);
            if (excluded) a.excluded_mechanisms.insert(mech_key);
            else a.excluded_mechanisms.erase(mech_key);
        });
    }

    /// Leaving Draft requires every included metric scored in both phases.
    AssessmentState transition_status(const std::string& id, std::uint64_t revision, Status to) {
        return write(id, revision, [&](AssessmentState& a, const TemplateIndex& index) {
            if (a.status == Status::Draft && to != Status::Draft) {
                auto card = assessment_scorecard(index.framework(), a);
                if (card.design.completeness < 1.0 || card.operational.completeness < 1.0)
                    throw Error(ErrorCode::IncompleteAssessment,
                                a.id + " has unscored metrics (design " +
                                    std::to_string(card.design.completeness) + ", operational " +
                                    std::to_string(card.operational.completeness) + ")");
            }
            a.status = to;
        });
    }

    /// Imports an exported assessment document as a new entry. Values given
    /// only as raw inputs are normalized.
    AssessmentState import(AssessmentState a) {
        std::unique_lock lock(mutex_);
        if (!valid_assessment_id(a.id)) throw Error(ErrorCode::ParseError, "invalid assessment id '" + a.id + "'");
        if (items_.count(a.id)) throw Error(ErrorCode::DuplicateAssessment, a.id);
        auto tmpl = templates_.get(a.template_ref);
        const TemplateIndex index(*tmpl);
        normalize_values(index, a.metric_values);
        check_references(index, a);
        if (a.status != Status::Draft) {
            auto card = assessment_scorecard(*tmpl, a);
            if (card.completeness() < 1.0)
                throw Error(ErrorCode::IncompleteAssessment, a.id + " is " + std::string(to_string(a.status)) +
                                                                 " but incomplete");
        }
        persist_locked(a);
        items_.emplace(a.id, a);
        return a;
    }

private:
    static void require_draft(const AssessmentState& a) {
        if (a.status != Status::Draft)
            throw Error(ErrorCode::NotDraft, a.id + " is " + std::string(to_string(a.status)));
    }

    template <typename Mutation>
    AssessmentState write(const std::string& id, std::uint64_t revision, Mutation&& mutate) {
        std::unique_lock lock(mutex_);
        auto& current = find_locked(id);
        if (current.revision != revision)
            throw Error(ErrorCode::RevisionConflict, id + " is at revision " + std::to_string(current.revision) +
                                                         ", write based on " + std::to_string(revision));
        auto tmpl = templates_.get(current.template_ref);
        const TemplateIndex index(*tmpl);
        AssessmentState next = current;
        mutate(next, index);
        next.revision = current.revision + 1;
        next.last_modified = std::max(clock_(), next.created_at);
        persist_locked(next);
        current = next;
        return next;
    }

    AssessmentState& find_locked(const std::string& id) {
        auto it = items_.find(id);
        if (it == items_.end()) throw Error(ErrorCode::UnknownAssessment, id);
        return it->second;
    }

    const AssessmentState& find_locked(const std::string& id) const {
        auto it = items_.find(id);
        if (it == items_.end()) throw Error(ErrorCode::UnknownAssessment, id);
        return it->second;
    }

    std::string next_id_locked() {
        for (;;) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "A-%04u", ++counter_);
            if (!items_.count(buf)) return buf;
        }
    }

    void persist_locked(const AssessmentState& a) const {
        if (!dir_) return;
        const auto final_path = *dir_ / "assessments" / (a.id + ".json");
        const auto tmp_path = final_path.string() + ".tmp";
        {
            std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
            if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp_path);
            out << to_json(a).dump(2) << "\n";
            if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp_path);
        }
        std::error_code ec;
        std::filesystem::rename(tmp_path, final_path, ec);
        if (ec) throw Error(ErrorCode::IoError, "cannot replace " + final_path.string() + ": " + ec.message());
    }

    const TemplateRegistry& templates_;
    std::optional<std::filesystem::path> dir_;
    Clock clock_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, AssessmentState> items_;
    unsigned counter_ = 0;
};

} // namespace distaf

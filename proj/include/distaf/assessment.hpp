#pragma once

#include "distaf/template_io.hpp"
#include "distaf/values.hpp"

#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <map>
#include <optional>
#include <set>
#include <string>

namespace distaf {

enum class Status { Draft, Private, Public };

inline constexpr Status kStatuses[] = {Status::Draft, Status::Private, Status::Public};

inline std::string_view to_string(Status s) {
    switch (s) {
    case Status::Draft: return "draft";
    case Status::Private: return "private";
    case Status::Public: return "public";
    }
    return "draft";
}

inline Status parse_status(std::string_view s) {
    if (s == "draft") return Status::Draft;
    if (s == "private") return Status::Private;
    if (s == "public") return Status::Public;
    throw Error(ErrorCode::ParseError, "unknown status '" + std::string(s) + "'");
}

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// ISO-8601 UTC with millisecond precision, e.g. 2026-10-18T09:30:00.125Z
inline std::string format_timestamp(Timestamp ts) {
    const auto secs = std::chrono::floor<std::chrono::seconds>(ts);
    const auto ms = (ts - secs).count();
    const std::time_t tt = std::chrono::system_clock::to_time_t(secs);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[96];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return buf;
}

inline Timestamp parse_timestamp(const std::string& text) {
    std::tm tm{};
    int ms = 0;
    int n = std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3dZ", &tm.tm_year, &tm.tm_mon, &tm.tm_mday,
                        &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &ms);
    if (n != 7 && n != 6) throw Error(ErrorCode::ParseError, "bad timestamp '" + text + "'");
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    const auto secs = std::chrono::system_clock::from_time_t(timegm(&tm));
    return std::chrono::time_point_cast<std::chrono::milliseconds>(secs) + std::chrono::milliseconds(ms);
}

struct AnswerKey {
    std::string mechanism; // "S.AC"
    Phase phase = Phase::Design;

    friend auto operator<=>(const AnswerKey&, const AnswerKey&) = default;
};

struct TemplateRef {
    std::string id;
    std::string version;

    friend bool operator==(const TemplateRef&, const TemplateRef&) = default;
};

struct AssessmentState {
    std::string id;
    std::string description;
    TemplateRef template_ref;
    Timestamp created_at{};
    Timestamp last_modified{};
    Status status = Status::Draft;
    std::optional<std::string> predecessor;
    std::map<std::string, MetricValue> metric_values;
    std::map<AnswerKey, std::size_t> chosen_answers;
    std::set<std::string> declared_standards;
    std::set<std::string> excluded_mechanisms; // "S.AC"
    std::uint64_t revision = 1;

    bool is_excluded(std::string_view mech_key) const {
        return excluded_mechanisms.count(std::string(mech_key)) > 0;
    }

    friend bool operator==(const AssessmentState&, const AssessmentState&) = default;
};

inline json raw_to_json(const RawScore& raw) {
    if (const bool* b = std::get_if<bool>(&raw)) return *b;
    return std::get<double>(raw);
}

inline RawScore raw_from_json(const json& j, const std::string& path) {
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number()) return j.get<double>();
    detail::parse_fail(path, "raw value must be a boolean or a number");
}

inline json to_json(const MetricValue& v) {
    json j = {{"origin", to_string(v.origin)},
              {"state", v.state == ValueState::Scored ? "scored" : "unscored"}};
    j["raw"] = v.raw ? raw_to_json(*v.raw) : json(nullptr);
    j["normalized"] = v.normalized ? json(*v.normalized) : json(nullptr);
    return j;
}

/// Accepts the full object form, or a bare boolean/number as shorthand for
/// a direct raw entry that still needs normalizing against the template.
inline MetricValue metric_value_from_json(const std::string& code, const json& j, const std::string& path) {
    MetricValue v;
    v.code = code;
    if (j.is_boolean() || j.is_number()) {
        v.raw = raw_from_json(j, path);
        v.state = ValueState::Scored;
        return v;
    }
    if (!j.is_object()) detail::parse_fail(path, "expected an object, boolean or number");
    if (auto it = j.find("raw"); it != j.end() && !it->is_null()) v.raw = raw_from_json(*it, path + ".raw");
    if (auto it = j.find("normalized"); it != j.end() && !it->is_null())
        v.normalized = detail::get_number(*it, path + ".normalized");
    v.origin = parse_origin(detail::get_string(j, "origin", path, "direct"));
    const auto state = detail::get_string(j, "state", path, (v.raw || v.normalized) ? "scored" : "unscored");
    if (state == "scored") v.state = ValueState::Scored;
    else if (state == "unscored") v.state = ValueState::Unscored;
    else detail::parse_fail(path + ".state", "state must be 'scored' or 'unscored'");
    return v;
}

inline json to_json(const AssessmentState& a) {
    json values = json::object();
    for (const auto& [code, v] : a.metric_values) values[code] = to_json(v);
    json answers = json::array();
    for (const auto& [key, idx] : a.chosen_answers)
        answers.push_back({{"mechanism", key.mechanism}, {"phase", to_string(key.phase)}, {"answer", idx}});
    return json{{"id", a.id},
                {"description", a.description},
                {"template", {{"id", a.template_ref.id}, {"version", a.template_ref.version}}},
                {"created_at", format_timestamp(a.created_at)},
                {"last_modified", format_timestamp(a.last_modified)},
                {"status", to_string(a.status)},
                {"predecessor", a.predecessor ? json(*a.predecessor) : json(nullptr)},
                {"revision", a.revision},
                {"metric_values", values},
                {"chosen_answers", answers},
                {"declared_standards", a.declared_standards},
                {"excluded_mechanisms", a.excluded_mechanisms}};
}

inline AssessmentState assessment_from_json(const json& j) {
    using namespace detail;
    AssessmentState a;
    a.id = get_string(j, "id", "$");
    a.description = get_string(j, "description", "$", "");
    const auto& tref = require(j, "template", "$");
    a.template_ref.id = get_string(tref, "id", "$.template");
    a.template_ref.version = get_string(tref, "version", "$.template");
    if (j.contains("created_at")) a.created_at = parse_timestamp(get_string(j, "created_at", "$"));
    a.last_modified = j.contains("last_modified") ? parse_timestamp(get_string(j, "last_modified", "$"))
                                                  : a.created_at;
    a.status = parse_status(get_string(j, "status", "$", "draft"));
    if (auto it = j.find("predecessor"); it != j.end() && !it->is_null())
        a.predecessor = get_string(j, "predecessor", "$");
    if (auto it = j.find("revision"); it != j.end()) {
        if (!it->is_number_unsigned()) parse_fail("$.revision", "expected a positive integer");
        a.revision = it->get<std::uint64_t>();
    }
    if (auto it = j.find("metric_values"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) parse_fail("$.metric_values", "expected an object");
        for (const auto& [code, v] : it->items())
            a.metric_values[code] = metric_value_from_json(code, v, "$.metric_values." + code);
    }
    const auto& answers = get_array(j, "chosen_answers", "$");
    for (std::size_t i = 0; i < answers.size(); ++i) {
        const auto path = "$.chosen_answers[" + std::to_string(i) + "]";
        AnswerKey key{get_string(answers[i], "mechanism", path), parse_phase(get_string(answers[i], "phase", path))};
        const auto& idx = require(answers[i], "answer", path);
        if (!idx.is_number_unsigned()) parse_fail(path + ".answer", "expected a non-negative integer");
        a.chosen_answers[key] = idx.get<std::size_t>();
    }
    for (auto& s : get_string_list(j, "declared_standards", "$")) a.declared_standards.insert(std::move(s));
    for (auto& s : get_string_list(j, "excluded_mechanisms", "$")) a.excluded_mechanisms.insert(std::move(s));
    return a;
}

inline AssessmentState load_assessment(const std::filesystem::path& path) {
    return assessment_from_json(parse_json_text(read_file(path), path.string()));
}

} // namespace distaf

#pragma once

#include "distaf/framework.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace distaf {

using json = nlohmann::json;

inline std::string_view to_string(MetricKind k) {
    return k == MetricKind::Boolean ? "boolean" : "percentage";
}

inline std::string_view to_string(SanitizationTransform t) {
    return t == SanitizationTransform::Identity ? "identity" : "complement";
}

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& path, const std::string& why) {
    throw Error(ErrorCode::ParseError, path + ": " + why);
}

inline const json& require(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) parse_fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) parse_fail(path, std::string("missing key '") + key + "'");
    return *it;
}

inline std::string get_string(const json& j, const char* key, const std::string& path,
                              std::optional<std::string> fallback = std::nullopt) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        if (fallback) return *fallback;
        parse_fail(path, std::string("missing key '") + key + "'");
    }
    if (!it->is_string()) parse_fail(path + "." + key, "expected a string");
    return it->get<std::string>();
}

inline double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) parse_fail(path, "expected a number");
    return j.get<double>();
}

inline std::map<std::string, double> get_weights(const json& j, const char* key,
                                                 const std::string& path) {
    std::map<std::string, double> out;
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return out;
    if (!it->is_object()) parse_fail(path + "." + key, "expected an object");
    for (const auto& [k, v] : it->items()) out[k] = get_number(v, path + "." + key + "." + k);
    return out;
}

inline const json& get_array(const json& j, const char* key, const std::string& path) {
    static const json empty = json::array();
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return empty;
    if (!it->is_array()) parse_fail(path + "." + key, "expected an array");
    return *it;
}

inline std::vector<std::string> get_string_list(const json& j, const char* key,
                                                const std::string& path) {
    std::vector<std::string> out;
    const auto& arr = get_array(j, key, path);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_string())
            parse_fail(path + "." + key + "[" + std::to_string(i) + "]", "expected a string");
        out.push_back(arr[i].get<std::string>());
    }
    return out;
}

inline MetricKind parse_kind(const std::string& s, const std::string& path) {
    if (s == "boolean") return MetricKind::Boolean;
    if (s == "percentage") return MetricKind::Percentage;
    parse_fail(path, "kind must be 'boolean' or 'percentage'");
}

inline SanitizationTransform parse_transform(const std::string& s, const std::string& path) {
    if (s == "identity") return SanitizationTransform::Identity;
    if (s == "complement") return SanitizationTransform::Complement;
    parse_fail(path, "transform must be 'identity' or 'complement'");
}

inline Metric parse_metric(const json& j, const std::string& path) {
    Metric m;
    auto code_text = get_string(j, "code", path);
    try {
        m.code = parse_metric_code(code_text);
    } catch (const Error& e) {
        throw Error(ErrorCode::MalformedCode, path + ".code: " + e.what());
    }
    m.title = get_string(j, "title", path, "");
    m.description = get_string(j, "description", path, "");
    m.kind = parse_kind(get_string(j, "kind", path, "boolean"), path + ".kind");
    if (auto it = j.find("transform"); it != j.end() && !it->is_null())
        m.transform = parse_transform(get_string(j, "transform", path), path + ".transform");
    if (auto it = j.find("mandatory"); it != j.end() && !it->is_null()) {
        const auto mpath = path + ".mandatory";
        MandatoryCaps caps;
        caps.mechanism_cap = get_number(require(*it, "mechanism_cap", mpath), mpath + ".mechanism_cap");
        caps.pillar_cap = get_number(require(*it, "pillar_cap", mpath), mpath + ".pillar_cap");
        if (auto s = it->find("satisfied_when_at_least"); s != it->end())
            caps.satisfied_when_at_least = get_number(*s, mpath + ".satisfied_when_at_least");
        m.mandatory = caps;
    }
    m.references = get_string_list(j, "references", path);
    return m;
}

inline ClusterQuestion parse_question(const json& j, const std::string& path) {
    ClusterQuestion q;
    q.phase = parse_phase(get_string(j, "phase", path));
    q.prompt = get_string(j, "prompt", path, "");
    q.metrics = get_string_list(j, "metrics", path);
    const auto& answers = get_array(j, "answers", path);
    for (std::size_t i = 0; i < answers.size(); ++i) {
        const auto apath = path + ".answers[" + std::to_string(i) + "]";
        Answer a;
        a.label = get_string(answers[i], "label", apath, "");
        a.configuration = get_weights(answers[i], "configuration", apath);
        q.answers.push_back(std::move(a));
    }
    return q;
}

} // namespace detail

inline FrameworkTemplate template_from_json(const json& j) {
    using namespace detail;
    FrameworkTemplate t;
    t.id = get_string(j, "id", "$");
    t.version = get_string(j, "version", "$");
    t.name = get_string(j, "name", "$", "");

    const auto& pillars = get_array(j, "pillars", "$");
    for (std::size_t pi = 0; pi < pillars.size(); ++pi) {
        const auto ppath = "$.pillars[" + std::to_string(pi) + "]";
        const auto& pj = pillars[pi];
        Pillar p;
        p.code = get_string(pj, "code", ppath);
        p.name = get_string(pj, "name", ppath, "");
        p.mechanism_weights = get_weights(pj, "mechanism_weights", ppath);
        const auto& mechs = get_array(pj, "mechanisms", ppath);
        for (std::size_t mi = 0; mi < mechs.size(); ++mi) {
            const auto mpath = ppath + ".mechanisms[" + std::to_string(mi) + "]";
            const auto& mj = mechs[mi];
            Mechanism mech;
            mech.code = get_string(mj, "code", mpath);
            mech.name = get_string(mj, "name", mpath, "");
            mech.metric_weights = get_weights(mj, "metric_weights", mpath);
            const auto& metrics = get_array(mj, "metrics", mpath);
            for (std::size_t k = 0; k < metrics.size(); ++k)
                mech.metrics.push_back(parse_metric(metrics[k], mpath + ".metrics[" + std::to_string(k) + "]"));
            const auto& questions = get_array(mj, "cluster_questions", mpath);
            for (std::size_t k = 0; k < questions.size(); ++k)
                mech.cluster_questions.push_back(
                    parse_question(questions[k], mpath + ".cluster_questions[" + std::to_string(k) + "]"));
            p.mechanisms.push_back(std::move(mech));
        }
        t.pillars.push_back(std::move(p));
    }

    const auto& standards = get_array(j, "standards", "$");
    for (std::size_t i = 0; i < standards.size(); ++i) {
        const auto spath = "$.standards[" + std::to_string(i) + "]";
        StandardsMapping s;
        s.standard_id = get_string(standards[i], "standard_id", spath);
        s.display_name = get_string(standards[i], "display_name", spath, s.standard_id);
        s.satisfied_metrics = get_string_list(standards[i], "satisfied_metrics", spath);
        s.notes = get_string(standards[i], "notes", spath, "");
        t.standards.push_back(std::move(s));
    }
    return t;
}

inline json to_json(const FrameworkTemplate& t) {
    json pillars = json::array();
    for (const auto& p : t.pillars) {
        json mechs = json::array();
        for (const auto& mech : p.mechanisms) {
            json metrics = json::array();
            for (const auto& m : mech.metrics) {
                json mj = {{"code", m.code.str()},
                           {"title", m.title},
                           {"description", m.description},
                           {"kind", to_string(m.kind)},
                           {"references", m.references}};
                if (m.transform) mj["transform"] = to_string(*m.transform);
                if (m.mandatory)
                    mj["mandatory"] = {{"mechanism_cap", m.mandatory->mechanism_cap},
                                       {"pillar_cap", m.mandatory->pillar_cap},
                                       {"satisfied_when_at_least", m.mandatory->satisfied_when_at_least}};
                metrics.push_back(std::move(mj));
            }
            json questions = json::array();
            for (const auto& q : mech.cluster_questions) {
                json answers = json::array();
                for (const auto& a : q.answers)
                    answers.push_back({{"label", a.label}, {"configuration", a.configuration}});
                json qj = {{"phase", to_string(q.phase)}, {"prompt", q.prompt}, {"answers", answers}};
                if (!q.metrics.empty()) qj["metrics"] = q.metrics;
                questions.push_back(std::move(qj));
            }
            json mj = {{"code", mech.code}, {"name", mech.name}, {"metrics", metrics},
                       {"cluster_questions", questions}};
            if (!mech.metric_weights.empty()) mj["metric_weights"] = mech.metric_weights;
            mechs.push_back(std::move(mj));
        }
        json pj = {{"code", p.code}, {"name", p.name}, {"mechanisms", mechs}};
        if (!p.mechanism_weights.empty()) pj["mechanism_weights"] = p.mechanism_weights;
        pillars.push_back(std::move(pj));
    }
    json standards = json::array();
    for (const auto& s : t.standards) {
        json sj = {{"standard_id", s.standard_id},
                   {"display_name", s.display_name},
                   {"satisfied_metrics", s.satisfied_metrics}};
        if (!s.notes.empty()) sj["notes"] = s.notes;
        standards.push_back(std::move(sj));
    }
    json out = {{"id", t.id}, {"version", t.version}, {"pillars", pillars}, {"standards", standards}};
    if (!t.name.empty()) out["name"] = t.name;
    return out;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, origin + ": " + e.what());
    }
}

inline FrameworkTemplate load_template(const std::filesystem::path& path) {
    return template_from_json(parse_json_text(read_file(path), path.string()));
}

} // namespace distaf

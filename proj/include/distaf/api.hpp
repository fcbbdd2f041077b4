#pragma once

#include "distaf/auth.hpp"
#include "distaf/report.hpp"
#include "distaf/store.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace distaf {

/// Transport-neutral request; the HTTP binding fills it from the wire.
struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::map<std::string, std::string> headers; // lower-case names
    std::string body;
};

struct ApiResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";

    json json_body() const { return json::parse(body); }
};

inline int http_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::AuthenticationFailed: return 401;
    case ErrorCode::Forbidden: return 403;
    case ErrorCode::UnknownTemplate:
    case ErrorCode::UnknownAssessment:
    case ErrorCode::UnknownPredecessor:
    case ErrorCode::UnknownUser: return 404;
    case ErrorCode::RevisionConflict:
    case ErrorCode::DuplicateAssessment:
    case ErrorCode::DuplicateUsername: return 409;
    case ErrorCode::ParseError:
    case ErrorCode::MalformedCode:
    case ErrorCode::UnsupportedFormat: return 400;
    case ErrorCode::IoError: return 500;
    default: return 422;
    }
}

/// Routes the HTTP surface onto the store, report engine and user table,
/// enforcing the role matrix on every call.
class ApiService {
public:
    ApiService(const TemplateRegistry& templates, AssessmentStore& store, UserDirectory& users,
               SessionManager& sessions)
        : templates_(templates), store_(store), users_(users), sessions_(sessions) {}

    ApiResponse handle(const ApiRequest& req) {
        try {
            return route(req);
        } catch (const Error& e) {
            return error(http_status(e.code()), std::string(to_string(e.code())), e.what());
        } catch (const json::exception& e) {
            return error(400, "ParseError", e.what());
        }
    }

private:
    struct Segments {
        std::vector<std::string> parts;
        std::size_t size() const { return parts.size(); }
        const std::string& operator[](std::size_t i) const { return parts[i]; }
    };

    static Segments split(const std::string& path) {
        Segments s;
        std::string cur;
        for (char c : path) {
            if (c == '/') {
                if (!cur.empty()) s.parts.push_back(std::move(cur));
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) s.parts.push_back(std::move(cur));
        return s;
    }

    static ApiResponse ok(const json& body, int status = 200) { return {status, body.dump(), "application/json"}; }

    static ApiResponse error(int status, const std::string& code, const std::string& message) {
        return {status, json{{"error", code}, {"message", message}}.dump(), "application/json"};
    }

    static json body_json(const ApiRequest& req) {
        if (req.body.empty()) return json::object();
        auto j = parse_json_text(req.body, "request body");
        if (!j.is_object()) throw Error(ErrorCode::ParseError, "request body must be an object");
        return j;
    }

    static std::uint64_t require_revision(const json& body) {
        auto it = body.find("revision");
        if (it == body.end() || !it->is_number_unsigned())
            throw Error(ErrorCode::ParseError, "write requests must carry the current 'revision'");
        return it->get<std::uint64_t>();
    }

    static std::string query(const ApiRequest& req, const std::string& key, const std::string& fallback = {}) {
        auto it = req.query.find(key);
        return it == req.query.end() ? fallback : it->second;
    }

    User authenticate(const ApiRequest& req, bool allow_pending_password = false) {
        auto it = req.headers.find("authorization");
        if (it == req.headers.end() || it->second.rfind("Bearer ", 0) != 0)
            throw Error(ErrorCode::AuthenticationFailed, "missing bearer token");
        auto username = sessions_.resolve(it->second.substr(7));
        if (!username) throw Error(ErrorCode::AuthenticationFailed, "invalid or expired session");
        auto user = users_.find(*username);
        if (!user || !user->enabled) {
            sessions_.revoke_user(*username);
            throw Error(ErrorCode::AuthenticationFailed, "account disabled");
        }
        if (user->must_change_password && !allow_pending_password)
            throw Error(ErrorCode::Forbidden, "password change required before further use");
        return *user;
    }

    static void authorize(const User& user, Action action, Status status) {
        auto decision = authz_check(user.role, action, status);
        if (!decision.allowed)
            throw Error(ErrorCode::Forbidden, std::string(to_string(action)) + ": " + decision.reason);
    }

    AssessmentState readable(const User& user, const std::string& id, Action action = Action::ReadAssessment) {
        if (!store_.contains(id)) {
            // Same answer as a denied read so ids cannot be probed.
            authorize(user, action, Status::Draft);
            throw Error(ErrorCode::UnknownAssessment, id);
        }
        auto a = store_.get(id);
        authorize(user, action, a.status);
        return a;
    }

    static json summary(const AssessmentState& a) {
        return {{"id", a.id},
                {"description", a.description},
                {"template", {{"id", a.template_ref.id}, {"version", a.template_ref.version}}},
                {"status", to_string(a.status)},
                {"created_at", format_timestamp(a.created_at)},
                {"last_modified", format_timestamp(a.last_modified)},
                {"revision", a.revision},
                {"predecessor", a.predecessor ? json(*a.predecessor) : json(nullptr)}};
    }

    ApiResponse route(const ApiRequest& req) {
        const auto seg = split(req.path);
        const auto& m = req.method;
        if (seg.size() == 0) return error(404, "NotFound", "no route");

        if (seg[0] == "login" && seg.size() == 1 && m == "POST") return login(req);
        if (seg[0] == "password" && seg.size() == 1 && m == "POST") return change_password(req);
        if (seg[0] == "users") return users(req, seg);
        if (seg[0] == "templates") return templates(req, seg);
        if (seg[0] == "assessments") return assessments(req, seg);
        if (seg[0] == "compare" && seg.size() == 1 && m == "GET") return compare_route(req);
        return error(404, "NotFound", "no route for " + m + " " + req.path);
    }

    ApiResponse login(const ApiRequest& req) {
        auto body = body_json(req);
        auto user = users_.authenticate(detail::get_string(body, "username", "$"),
                                        detail::get_string(body, "password", "$"));
        auto token = sessions_.issue(user.username);
        return ok({{"token", token}, {"role", to_string(user.role)}, {"must_change_password", user.must_change_password}});
    }

    ApiResponse change_password(const ApiRequest& req) {
        auto user = authenticate(req, true);
        auto body = body_json(req);
        auto updated = users_.change_password(user.username, detail::get_string(body, "old_password", "$"),
                                              detail::get_string(body, "new_password", "$"));
        return ok(to_json(updated));
    }

    ApiResponse users(const ApiRequest& req, const Segments& seg) {
        auto caller = authenticate(req);
        const auto& m = req.method;
        if (seg.size() == 1 && m == "GET") {
            json out = json::array();
            for (const auto& u : users_.list(caller)) out.push_back(to_json(u));
            return ok(out);
        }
        if (seg.size() == 1 && m == "POST") {
            auto body = body_json(req);
            auto issued = users_.manage_user(caller, UserAction::Create, detail::get_string(body, "username", "$"),
                                             parse_role(detail::get_string(body, "role", "$")));
            return ok({{"user", to_json(issued.user)}, {"temporary_password", issued.temporary_password}}, 201);
        }
        if (seg.size() == 3 && m == "POST") {
            const auto& name = seg[1];
            if (seg[2] == "disable") {
                auto issued = users_.manage_user(caller, UserAction::Disable, name);
                sessions_.revoke_user(name);
                return ok(to_json(issued.user));
            }
            if (seg[2] == "password") {
                auto issued = users_.manage_user(caller, UserAction::RegeneratePassword, name);
                sessions_.revoke_user(name);
                return ok({{"user", to_json(issued.user)}, {"temporary_password", issued.temporary_password}});
            }
            if (seg[2] == "role") {
                auto body = body_json(req);
                auto issued = users_.manage_user(caller, UserAction::SetRole, name,
                                                 parse_role(detail::get_string(body, "role", "$")));
                return ok(to_json(issued.user));
            }
        }
        return error(404, "NotFound", "no route for " + m + " " + req.path);
    }

    ApiResponse templates(const ApiRequest& req, const Segments& seg) {
        authenticate(req);
        if (req.method != "GET") return error(405, "MethodNotAllowed", req.method);
        if (seg.size() == 1) {
            json out = json::array();
            for (const auto& t : templates_.all())
                out.push_back({{"id", t->id}, {"version", t->version}, {"name", t->name}});
            return ok(out);
        }
        if (seg.size() == 2) {
            auto version = query(req, "version");
            auto t = templates_.get(seg[1], version.empty() ? std::nullopt : std::optional(version));
            return ok(to_json(*t));
        }
        return error(404, "NotFound", req.path);
    }

    ApiResponse assessments(const ApiRequest& req, const Segments& seg) {
        auto user = authenticate(req);
        const auto& m = req.method;

        if (seg.size() == 1 && m == "GET") {
            json out = json::array();
            for (const auto& a : store_.list())
                if (authz_check(user.role, Action::ReadAssessment, a.status).allowed) out.push_back(summary(a));
            return ok(out);
        }
        if (seg.size() == 1 && m == "POST") {
            authorize(user, Action::CreateAssessment, Status::Draft);
            auto body = body_json(req);
            CreateRequest cr;
            cr.template_id = detail::get_string(body, "template_id", "$");
            if (body.contains("template_version")) cr.template_version = detail::get_string(body, "template_version", "$");
            cr.description = detail::get_string(body, "description", "$", "");
            if (body.contains("id")) cr.id = detail::get_string(body, "id", "$");
            if (body.contains("from") && !body["from"].is_null()) {
                cr.from = detail::get_string(body, "from", "$");
                readable(user, *cr.from);
            }
            auto created = store_.create_assessment(cr);
            return ok({{"assessment", to_json(created.state)}, {"warnings", created.warnings}}, 201);
        }
        if (seg.size() < 2) return error(404, "NotFound", req.path);
        const auto& id = seg[1];

        if (seg.size() == 2 && m == "GET") return ok(to_json(readable(user, id)));
        if (seg.size() != 3) return error(404, "NotFound", req.path);
        const auto& leaf = seg[2];

        if (m == "GET") {
            if (leaf == "scorecard") {
                auto a = readable(user, id);
                return ok(to_json(assessment_scorecard(*store_.template_for(a), a)));
            }
            if (leaf == "fingerprint") {
                auto a = readable(user, id);
                auto t = store_.template_for(a);
                auto card = assessment_scorecard(*t, a);
                const auto level = query(req, "level", "pillars");
                FingerprintLevel lvl;
                if (level == "pillars") lvl = FingerprintLevel::Pillars;
                else if (level == "mechanisms") lvl = FingerprintLevel::MechanismsOfPillar;
                else throw Error(ErrorCode::ParseError, "level must be 'pillars' or 'mechanisms'");
                auto phase = parse_phase(query(req, "phase", "design"));
                return ok(to_json(fingerprint_series(*t, card, lvl, phase, query(req, "pillar"))));
            }
            if (leaf == "export") {
                auto a = readable(user, id, Action::Export);
                auto t = store_.template_for(a);
                auto format = parse_export_format(query(req, "format", "dump"));
                auto text = export_assessment(*t, a, assessment_scorecard(*t, a), format);
                const char* type = format == ExportFormat::Dump      ? "application/json"
                                   : format == ExportFormat::Tabular ? "text/csv; charset=utf-8"
                                                                     : "text/plain; charset=utf-8";
                return {200, text, type};
            }
            return error(404, "NotFound", req.path);
        }

        if (m == "POST" && leaf == "preview") {
            auto a = readable(user, id, Action::EditAssessment);
            return preview(a, body_json(req));
        }

        const bool is_write = (m == "PATCH" && leaf == "metrics") ||
                              (m == "POST" && (leaf == "answers" || leaf == "standards" || leaf == "exclusions" ||
                                               leaf == "status"));
        if (!is_write) return error(404, "NotFound", req.path);
        readable(user, id, Action::EditAssessment);
        auto body = body_json(req);
        const auto revision = require_revision(body);

        AssessmentState updated;
        if (leaf == "metrics") {
            updated = store_.edit_metric_values(id, revision, metric_edits(body));
        } else if (leaf == "answers") {
            std::optional<std::size_t> answer;
            if (const auto& aj = detail::require(body, "answer", "$"); !aj.is_null()) {
                if (!aj.is_number_unsigned()) throw Error(ErrorCode::ParseError, "answer must be an index or null");
                answer = aj.get<std::size_t>();
            }
            updated = store_.set_cluster_answer(id, revision, detail::get_string(body, "mechanism", "$"),
                                                parse_phase(detail::get_string(body, "phase", "$")), answer);
        } else if (leaf == "standards") {
            updated = store_.set_standard(id, revision, detail::get_string(body, "standard", "$"),
                                          body.value("declared", true));
        } else if (leaf == "exclusions") {
            updated = store_.set_mechanism_exclusion(id, revision, detail::get_string(body, "mechanism", "$"),
                                                     body.value("excluded", true));
        } else {
            updated = store_.transition_status(id, revision, parse_status(detail::get_string(body, "status", "$")));
        }
        return ok(to_json(updated));
    }

    static std::vector<std::pair<std::string, std::optional<RawScore>>> metric_edits(const json& body) {
        std::vector<std::pair<std::string, std::optional<RawScore>>> edits;
        if (auto it = body.find("values"); it != body.end()) {
            if (!it->is_object()) throw Error(ErrorCode::ParseError, "values must be an object");
            for (const auto& [code, raw] : it->items()) {
                if (raw.is_null()) edits.emplace_back(code, std::nullopt);
                else edits.emplace_back(code, raw_from_json(raw, "$.values." + code));
            }
        } else {
            const auto code = detail::get_string(body, "code", "$");
            const auto& raw = detail::require(body, "raw", "$");
            if (raw.is_null()) edits.emplace_back(code, std::nullopt);
            else edits.emplace_back(code, raw_from_json(raw, "$.raw"));
        }
        if (edits.empty()) throw Error(ErrorCode::ParseError, "no metric edits given");
        return edits;
    }

    // Scorecard of a transient overlay on a draft; nothing is persisted.
    ApiResponse preview(AssessmentState a, const json& body) {
        if (a.status != Status::Draft)
            throw Error(ErrorCode::NotDraft, a.id + " is " + std::string(to_string(a.status)) + "; previews need a draft");
        auto t = store_.template_for(a);
        const TemplateIndex index(*t);
        if (body.contains("values")) {
            for (const auto& [code, raw] : metric_edits(body)) {
                const auto& entry = index.metric(code);
                const auto canonical = entry.metric->code.str();
                if (!raw) a.metric_values.erase(canonical);
                else
                    a.metric_values[canonical] =
                        scored_value(canonical, normalize_metric_value(*entry.metric, *raw), Origin::Direct, raw);
            }
        }
        for (const auto& ex : detail::get_array(body, "answers", "$")) {
            AnswerKey key{detail::get_string(ex, "mechanism", "$.answers"),
                          parse_phase(detail::get_string(ex, "phase", "$.answers"))};
            const auto& entry = index.mechanism(key.mechanism);
            auto idx = detail::require(ex, "answer", "$.answers").get<std::size_t>();
            for (auto& v : apply_cluster_answer(*entry.mechanism, key.phase, idx)) a.metric_values[v.code] = v;
            a.chosen_answers[key] = idx;
        }
        for (const auto& s : detail::get_string_list(body, "standards", "$")) {
            for (auto& v : apply_standard_compliance(*t, s)) a.metric_values[v.code] = v;
            a.declared_standards.insert(s);
        }
        if (auto it = body.find("exclusions"); it != body.end()) {
            if (!it->is_object()) throw Error(ErrorCode::ParseError, "exclusions must map mechanism -> bool");
            for (const auto& [mech, flag] : it->items()) {
                index.mechanism(mech);
                if (flag.get<bool>()) a.excluded_mechanisms.insert(mech);
                else a.excluded_mechanisms.erase(mech);
            }
        }
        return ok({{"preview", true}, {"revision", a.revision}, {"scorecard", to_json(assessment_scorecard(*t, a))}});
    }

    ApiResponse compare_route(const ApiRequest& req) {
        auto user = authenticate(req);
        const auto a_id = query(req, "a");
        const auto b_id = query(req, "b");
        if (a_id.empty() || b_id.empty()) throw Error(ErrorCode::ParseError, "compare needs ?a=&b=");
        auto a = readable(user, a_id, Action::Compare);
        auto b = readable(user, b_id, Action::Compare);
        auto card_a = assessment_scorecard(*store_.template_for(a), a);
        auto card_b = assessment_scorecard(*store_.template_for(b), b);
        return ok(to_json(compare(card_a, card_b)));
    }

    const TemplateRegistry& templates_;
    AssessmentStore& store_;
    UserDirectory& users_;
    SessionManager& sessions_;
};

} // namespace distaf

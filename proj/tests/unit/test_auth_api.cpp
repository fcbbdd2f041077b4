#include "api_harness.hpp"

#include "distaf/auth.hpp"

#include <gtest/gtest.h>


using namespace distaf;

TEST(Authz, MatrixMatchesRoleTable) {
    int cells = 0;
    for (auto role : kRoles)
        for (auto action : kActions)
            for (auto status : kStatuses) {
                ++cells;
                auto d = authz_check(role, action, status);
                EXPECT_EQ(d.allowed, harness::expected_allowed(role, action, status))
                    << to_string(role) << " " << to_string(action) << " " << to_string(status);
                EXPECT_FALSE(d.reason.empty());
            }
    EXPECT_EQ(cells, 54);
}

TEST(Passwords, HashAndVerify) {
    auto h = hash_password("s3cret-pass", 1000);
    EXPECT_EQ(h.rfind("pbkdf2-sha256$1000$", 0), 0u);
    EXPECT_TRUE(verify_password("s3cret-pass", h));
    EXPECT_FALSE(verify_password("s3cret-pasS", h));
    EXPECT_FALSE(verify_password("s3cret-pass", "garbage"));
    EXPECT_NE(hash_password("same", 1000), hash_password("same", 1000)) << "salts must differ";
    EXPECT_GE(generate_temporary_password().size(), 12u);
}

TEST(Users, AdminOnlyManagement) {
    UserDirectory users(std::nullopt, 1000);
    auto admin = users.bootstrap_admin("root").user;
    EXPECT_THROW(users.bootstrap_admin("second"), Error);
    auto bob = users.manage_user(admin, UserAction::Create, "bob", Role::Assessor);
    EXPECT_TRUE(bob.user.must_change_password);
    EXPECT_THROW(users.manage_user(admin, UserAction::Create, "bob", Role::Assessor), Error);
    EXPECT_THROW(users.manage_user(bob.user, UserAction::Create, "carol", Role::External), Error);
    EXPECT_THROW(users.manage_user(admin, UserAction::Disable, "nobody"), Error);

    auto u = users.authenticate("bob", bob.temporary_password);
    EXPECT_EQ(u.role, Role::Assessor);
    users.change_password("bob", bob.temporary_password, "a much better one");
    EXPECT_FALSE(users.find("bob")->must_change_password);
    EXPECT_THROW(users.authenticate("bob", bob.temporary_password), Error);

    auto regen = users.manage_user(admin, UserAction::RegeneratePassword, "bob");
    EXPECT_TRUE(users.find("bob")->must_change_password);
    users.authenticate("bob", regen.temporary_password);

    users.manage_user(admin, UserAction::Disable, "bob");
    EXPECT_THROW(users.authenticate("bob", regen.temporary_password), Error);
}

TEST(Users, PersistAcrossRestart) {
    fixtures::TempDir dir;
    std::string temp;
    {
        UserDirectory users(dir.path(), 1000);
        temp = users.bootstrap_admin("root").temporary_password;
    }
    UserDirectory reopened(dir.path(), 1000);
    EXPECT_EQ(reopened.authenticate("root", temp).role, Role::Admin);
}

TEST(Sessions, ExpireAndRevoke) {
    SessionManager short_lived(std::chrono::seconds(0));
    auto t = short_lived.issue("x");
    EXPECT_FALSE(short_lived.resolve(t));

    SessionManager sessions;
    auto a = sessions.issue("x");
    auto b = sessions.issue("y");
    EXPECT_EQ(sessions.resolve(a), std::optional<std::string>("x"));
    sessions.revoke_user("x");
    EXPECT_FALSE(sessions.resolve(a));
    EXPECT_TRUE(sessions.resolve(b));
}

class ApiTest : public ::testing::Test {
protected:
    harness::Api api;
};

TEST_F(ApiTest, MatrixOverHttpSurface) {
    for (auto role : kRoles)
        for (auto action : kActions)
            for (auto status : kStatuses) {
                const int code = harness::exercise(api, role, action, status);
                const bool denied = code == 403;
                EXPECT_NE(code, 401);
                EXPECT_EQ(!denied, harness::expected_allowed(role, action, status))
                    << to_string(role) << " " << to_string(action) << " " << to_string(status) << " -> " << code;
            }
}

TEST_F(ApiTest, LoginFailures) {
    EXPECT_EQ(api.call("POST", "/login", {}, {{"username", "alice"}, {"password", "wrong"}}).status, 401);
    EXPECT_EQ(api.call("POST", "/login", {}, {{"username", "ghost"}, {"password", "x"}}).status, 401);
    EXPECT_EQ(api.call("GET", "/assessments").status, 401);
    EXPECT_EQ(api.call("GET", "/assessments", "not-a-token").status, 401);
    EXPECT_EQ(api.call("POST", "/login", {}, nullptr).status, 400);
}

TEST_F(ApiTest, PendingPasswordChangeBlocksOtherCalls) {
    auto created = api.call("POST", "/users", api.admin_token, {{"username", "new"}, {"role", "assessor"}});
    ASSERT_EQ(created.status, 201);
    auto temp = created.json_body()["temporary_password"].get<std::string>();
    auto token = api.call("POST", "/login", {}, {{"username", "new"}, {"password", temp}}).json_body()["token"];
    EXPECT_EQ(api.call("GET", "/assessments", token.get<std::string>()).status, 403);
}

TEST_F(ApiTest, DisabledUserGets401) {
    EXPECT_EQ(api.call("GET", "/assessments", api.assessor_token).status, 200);
    EXPECT_EQ(api.call("POST", "/users/alice/disable", api.admin_token).status, 200);
    EXPECT_EQ(api.call("GET", "/assessments", api.assessor_token).status, 401);
    EXPECT_EQ(api.call("POST", "/login", {}, {{"username", "alice"}, {"password", "correct horse alice"}}).status, 401);
}

TEST_F(ApiTest, UserManagementRoutes) {
    EXPECT_EQ(api.call("POST", "/users", api.assessor_token, {{"username", "x"}, {"role", "admin"}}).status, 403);
    EXPECT_EQ(api.call("POST", "/users", api.admin_token, {{"username", "alice"}, {"role", "external"}}).status, 409);
    EXPECT_EQ(api.call("POST", "/users/ghost/disable", api.admin_token).status, 404);
    auto regen = api.call("POST", "/users/eve/password", api.admin_token);
    ASSERT_EQ(regen.status, 200);
    EXPECT_FALSE(regen.json_body()["temporary_password"].get<std::string>().empty());
    EXPECT_EQ(api.call("GET", "/assessments", api.external_token).status, 401) << "old sessions are revoked";
    auto role = api.call("POST", "/users/alice/role", api.admin_token, {{"role", "external"}});
    EXPECT_EQ(role.json_body()["role"], "external");
    auto list = api.call("GET", "/users", api.admin_token).json_body();
    EXPECT_EQ(list.size(), 3u);
    for (const auto& u : list) EXPECT_FALSE(u.contains("credential"));
}

TEST_F(ApiTest, AssessmentLifecycleOverApi) {
    const auto& tok = api.assessor_token;
    auto created = api.call("POST", "/assessments", tok, {{"template_id", "distaf-sample"}, {"id", "life"}});
    ASSERT_EQ(created.status, 201) << created.body;
    EXPECT_EQ(created.json_body()["assessment"]["status"], "draft");
    EXPECT_EQ(created.json_body()["assessment"]["revision"], 1);

    auto edit = api.call("PATCH", "/assessments/life/metrics", tok, {{"revision", 1}, {"code", "S.SAA.O10"}, {"raw", 5}});
    ASSERT_EQ(edit.status, 200) << edit.body;
    EXPECT_EQ(edit.json_body()["metric_values"]["S.SAA.O10"]["normalized"], 95.0);

    auto stale = api.call("PATCH", "/assessments/life/metrics", tok, {{"revision", 1}, {"code", "S.AC.D1"}, {"raw", true}});
    EXPECT_EQ(stale.status, 409);
    EXPECT_EQ(stale.json_body()["error"], "RevisionConflict");
    EXPECT_EQ(api.call("PATCH", "/assessments/life/metrics", tok, {{"code", "S.AC.D1"}, {"raw", true}}).status, 400);

    EXPECT_EQ(api.call("POST", "/assessments/life/status", tok, {{"revision", 2}, {"status", "public"}}).status, 422);

    auto ans = api.call("POST", "/assessments/life/answers", tok,
                        {{"revision", 2}, {"mechanism", "S.AC"}, {"phase", "design"}, {"answer", 3}});
    ASSERT_EQ(ans.status, 200) << ans.body;
    EXPECT_EQ(ans.json_body()["metric_values"]["S.AC.D9"]["normalized"], 100.0);
    auto std_ = api.call("POST", "/assessments/life/standards", tok, {{"revision", 3}, {"standard", "CIS-Controls"}});
    ASSERT_EQ(std_.status, 200);
    auto ex = api.call("POST", "/assessments/life/exclusions", tok, {{"revision", 4}, {"mechanism", "E.OP"}});
    ASSERT_EQ(ex.status, 200);
    EXPECT_EQ(ex.json_body()["excluded_mechanisms"], json::array({"E.OP"}));

    auto card = api.call("GET", "/assessments/life/scorecard", tok);
    ASSERT_EQ(card.status, 200);
    EXPECT_EQ(card.json_body().at("phases").at("operational").at("mechanisms").at("E.OP").at("state"), "excluded");

    auto derived = api.call("POST", "/assessments", tok, {{"template_id", "distaf-sample"}, {"from", "life"}});
    ASSERT_EQ(derived.status, 201);
    EXPECT_EQ(derived.json_body()["assessment"]["predecessor"], "life");
    EXPECT_EQ(api.call("POST", "/assessments", tok, {{"template_id", "distaf-sample"}, {"from", "ghost"}}).status, 404);
}

TEST_F(ApiTest, PreviewDoesNotPersist) {
    const auto before = api.store.get("demo-draft");
    auto r = api.call("POST", "/assessments/demo-draft/preview", api.assessor_token,
                      {{"values", {{"RES.IDR.O6", true}}}, {"exclusions", {{"S.AC", true}}}});
    ASSERT_EQ(r.status, 200) << r.body;
    auto body = r.json_body();
    EXPECT_TRUE(body["preview"].get<bool>());
    EXPECT_TRUE(body.at("scorecard").at("phases").at("operational").at("pillars").at("RES").at("mandatory_violations").empty());
    EXPECT_EQ(body.at("scorecard").at("phases").at("design").at("mechanisms").at("S.AC").at("state"), "excluded");
    EXPECT_EQ(api.store.get("demo-draft"), before);
    EXPECT_EQ(api.call("POST", "/assessments/demo-public/preview", api.assessor_token, json::object()).status, 422);
}

TEST_F(ApiTest, ReadEndpoints) {
    const auto& tok = api.external_token;
    auto list = api.call("GET", "/assessments", tok).json_body();
    ASSERT_EQ(list.size(), 1u);
    EXPECT_EQ(list[0]["id"], "demo-public");

    auto fp = api.call("GET", "/assessments/demo-public/fingerprint", api.assessor_token, nullptr,
                       {{"level", "mechanisms"}, {"pillar", "RES"}, {"phase", "operational"}});
    ASSERT_EQ(fp.status, 200) << fp.body;
    EXPECT_EQ(fp.json_body()["axes"].size(), 2u);

    auto csv = api.call("GET", "/assessments/demo-public/export", tok, nullptr, {{"format", "tabular"}});
    EXPECT_EQ(csv.status, 200);
    EXPECT_EQ(csv.content_type.rfind("text/csv", 0), 0u);
    EXPECT_EQ(api.call("GET", "/assessments/demo-public/export", tok, nullptr, {{"format", "xlsx"}}).status, 400);

    auto tmpl = api.call("GET", "/templates/distaf-sample", tok);
    EXPECT_EQ(tmpl.status, 200);
    EXPECT_EQ(template_from_json(tmpl.json_body()), fixtures::sample());

    auto cmp = api.call("GET", "/compare", api.assessor_token, nullptr, {{"a", "demo-draft"}, {"b", "demo-public"}});
    EXPECT_EQ(cmp.status, 200);
    EXPECT_EQ(api.call("GET", "/nowhere", tok).status, 404);
}

TEST_F(ApiTest, FuzzedRequestsLeakNothing) {
    auto r = harness::fuzz_external(api, 2024, 3000);
    EXPECT_EQ(r.requests, 3000);
    EXPECT_EQ(r.leaks, 0) << r.first_leak;
}

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances and time limits are fixed below.

#include "api_harness.hpp"
#include "property_checks.hpp"

#include "distaf/auth.hpp"
#include "distaf/report.hpp"
#include "distaf/store.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

namespace {

constexpr double kExact = 0.0;
constexpr double kOracleTolerance = 1e-9;
constexpr int kOracleFrameworks = 1000;
constexpr double kOracleSeconds = 60.0;
constexpr int kPropertyCases = 500;
constexpr double kPropertySeconds = 120.0;
constexpr double kCapSeconds = 1.0;
constexpr int kFuzzRequests = 3000;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail.str("");
            detail << what;
        }
    }
};

int failures = 0;

void criterion(const std::string& name, const std::function<void(Outcome&)>& body) {
    Outcome o;
    try {
        body(o);
    } catch (const std::exception& e) {
        o.require(false, std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failures;
    const auto d = o.detail.str();
    std::printf("%s %s%s%s\n", o.pass ? "PASS" : "FAIL", name.c_str(), d.empty() ? "" : " | ", d.c_str());
    std::fflush(stdout);
}

bool within(double got, double want, double tol) { return std::abs(got - want) <= tol; }

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Sample template with the operational RES pillar weighted towards RS, so
// the pillar's raw score clears its own cap while IDR stays violated.
distaf::FrameworkTemplate cap_template() {
    auto t = fixtures::sample();
    t.id = "distaf-caps";
    for (auto& p : t.pillars)
        if (p.code == "RES") p.mechanism_weights = {{"IDR", 1.0}, {"RS", 4.0}};
    return t;
}

void caps(Outcome& o) {
    const auto t = cap_template();
    auto a = fixtures::blank_assessment(t, "caps");
    a.status = distaf::Status::Private;
    a.metric_values["RES.IDR.O1"] = distaf::scored_value("RES.IDR.O1", 100.0, distaf::Origin::Direct, true);
    a.metric_values["RES.IDR.O2"] = distaf::scored_value("RES.IDR.O2", 100.0, distaf::Origin::Direct, true);
    a.metric_values["RES.IDR.O6"] = distaf::scored_value("RES.IDR.O6", 0.0, distaf::Origin::Direct, false);
    a.metric_values["RES.RS.O1"] = distaf::scored_value("RES.RS.O1", 100.0, distaf::Origin::Direct, true);

    const auto t0 = Clock::now();
    const auto card = distaf::assessment_scorecard(t, a);
    const double elapsed = seconds_since(t0);

    const auto& ph = card.phase(distaf::Phase::Operational);
    const auto& mech = ph.mechanisms.at("RES.IDR");
    const auto& pil = ph.pillars.at("RES");
    o.require(mech.raw_score > 40.0, "mechanism raw " + num(mech.raw_score) + " does not exceed its cap");
    o.require(within(mech.capped_score, 40.0, kExact), "mechanism capped " + num(mech.capped_score));
    o.require(pil.raw_score > 80.0, "pillar raw " + num(pil.raw_score) + " does not exceed its cap");
    o.require(within(pil.capped_score, 80.0, kExact), "pillar capped " + num(pil.capped_score));
    o.require(mech.mandatory_violations.count("RES.IDR.O6") && pil.mandatory_violations.count("RES.IDR.O6"),
              "violation not reported");
    o.require(elapsed < kCapSeconds, "took " + num(elapsed) + " s");

    const auto exact = oracle::score(t, a, distaf::Phase::Operational);
    o.require(exact.mechanisms.at("RES.IDR").capped == 40 && exact.pillars.at("RES").capped == 80,
              "oracle disagrees on the capped values");
    o.detail << "mechanism " << num(mech.raw_score) << " -> " << num(mech.capped_score) << ", pillar "
             << num(pil.raw_score) << " -> " << num(pil.capped_score);
}

void cluster_answers(Outcome& o) {
    const auto reg = props::registry_with(fixtures::sample());
    distaf::AssessmentStore store(reg);
    const double want[4][2] = {{0, 0}, {0, 25}, {0, 75}, {100, 100}};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto id = "answer-" + std::to_string(i);
        distaf::CreateRequest req;
        req.template_id = "distaf-sample";
        req.id = id;
        const auto a = store.create_assessment(req).state;
        store.set_cluster_answer(id, a.revision, "S.AC", distaf::Phase::Design, i);
        const auto card = store.scorecard(id);
        const auto& m = card.phase(distaf::Phase::Design).metrics;
        const double d8 = m.at("S.AC.D8").normalized.value_or(-1), d9 = m.at("S.AC.D9").normalized.value_or(-1);
        o.require(within(d8, want[i][0], kExact) && within(d9, want[i][1], kExact),
                  "answer " + std::to_string(i) + " gave (" + num(d8) + "," + num(d9) + ")");
    }
}

void sanitization(Outcome& o) {
    const auto reg = props::registry_with(fixtures::sample());
    distaf::AssessmentStore store(reg);
    distaf::CreateRequest req;
    req.template_id = "distaf-sample";
    req.id = "frr";
    auto a = store.create_assessment(req).state;
    for (double f : {0.0, 5.0, 50.0, 100.0}) {
        a = store.set_metric_value("frr", a.revision, "S.SAA.O10", f);
        const double got = a.metric_values.at("S.SAA.O10").normalized.value_or(-1);
        o.require(within(got, 100.0 - f, kExact), "FRR " + num(f) + " normalized to " + num(got));
    }
}

void color_bands(Outcome& o) {
    using distaf::ColorBand;
    const std::pair<double, ColorBand> cases[] = {{0.0, ColorBand::TomatoRed},
                                                  {33.0, ColorBand::TomatoRed},
                                                  {33.01, ColorBand::LemonChiffon},
                                                  {66.0, ColorBand::LemonChiffon},
                                                  {66.01, ColorBand::LightGreen},
                                                  {100.0, ColorBand::LightGreen}};
    for (auto [score, band] : cases)
        o.require(distaf::numeric_band(score) == band, "score " + num(score) + " banded " +
                                                           std::string(to_string(distaf::numeric_band(score))));

    distaf::ScoreNode n;
    n.state = distaf::NodeState::Scored;
    n.raw_score = n.capped_score = 95.0;
    n.mandatory_violations = {"X.Y.D1"};
    o.require(distaf::color_band(n) == ColorBand::DeepPink, "violation not DeepPink");
    n.excluded = true;
    n.state = distaf::NodeState::Excluded;
    o.require(distaf::color_band(n) == ColorBand::Transparent, "exclusion not Transparent");

    // The same rules on a real scorecard.
    auto a = fixtures::demo();
    a.excluded_mechanisms.insert("S.RC");
    const auto card = distaf::assessment_scorecard(fixtures::sample(), a);
    o.require(distaf::color_band(card.operational.pillars.at("RES")) == ColorBand::DeepPink,
              "demo RES operational not DeepPink");
    o.require(distaf::color_band(card.design.mechanisms.at("S.RC")) == ColorBand::Transparent,
              "excluded S.RC not Transparent");
}

void standards(Outcome& o) {
    const auto& t = fixtures::sample();
    std::set<std::string> mapped;
    for (const auto& s : t.standards)
        if (s.standard_id == "CIS-Controls")
            mapped.insert(s.satisfied_metrics.begin(), s.satisfied_metrics.end());
    o.require(mapped.size() == 7, "CIS-Controls maps " + std::to_string(mapped.size()) + " metrics");

    const auto reg = props::registry_with(t);
    distaf::AssessmentStore store(reg);
    distaf::CreateRequest req;
    req.template_id = t.id;
    req.id = "cis";
    const auto a = store.create_assessment(req).state;
    store.set_standard("cis", a.revision, "CIS-Controls", true);
    const auto card = store.scorecard("cis");
    std::set<std::string> scored;
    for (auto ph : distaf::kPhases)
        for (const auto& [code, v] : card.phase(ph).metrics)
            if (v.scored()) {
                scored.insert(code);
                o.require(v.normalized == 100.0 && v.origin == distaf::Origin::Standard,
                          code + " scored " + num(*v.normalized));
            }
    o.require(scored == mapped, std::to_string(scored.size()) + " metrics scored instead of the mapped set");
    o.detail << scored.size() << " metrics scored";
}

void oracle_equivalence(Outcome& o) {
    const auto r = props::oracle_equivalence(20240, kOracleFrameworks, kOracleTolerance);
    o.require(r.ok(kOracleFrameworks), r.first_failure.empty() ? "too few cases" : r.first_failure);
    o.require(r.seconds < kOracleSeconds, "took " + num(r.seconds) + " s");
    o.detail << r.cases << " frameworks in " << r.seconds << " s";
}

void property_suites(Outcome& o) {
    using Check = props::CheckResult (*)(std::uint64_t, int);
    const std::pair<const char*, Check> checks[] = {
        {"range", &props::range},
        {"cap dominance", &props::cap_dominance},
        {"monotonicity", &props::monotonicity},
        {"phase isolation", &props::phase_isolation},
        {"exclusion involution", &props::exclusion_involution},
        {"persistence round trip", &props::persistence_round_trip},
        {"derived equality", &props::derived_equality},
    };
    double total = 0.0;
    std::uint64_t seed = 3000;
    for (const auto& [name, check] : checks) {
        const auto r = check(++seed, kPropertyCases);
        total += r.seconds;
        o.require(r.ok(kPropertyCases), std::string(name) + ": " +
                                            (r.first_failure.empty() ? "too few cases" : r.first_failure));
    }
    o.require(total < kPropertySeconds, "took " + num(total) + " s");
    o.detail << std::size(checks) << " suites x " << kPropertyCases << " cases in " << total << " s";
}

void access_control(Outcome& o) {
    harness::Api api;
    int cells = 0;
    for (auto role : distaf::kRoles)
        for (auto action : distaf::kActions)
            for (auto status : distaf::kStatuses) {
                ++cells;
                const bool want = harness::expected_allowed(role, action, status);
                const bool decided = distaf::authz_check(role, action, status).allowed;
                const int code = harness::exercise(api, role, action, status);
                const std::string cell = std::string(to_string(role)) + "/" + std::string(to_string(action)) +
                                         "/" + std::string(to_string(status));
                o.require(decided == want, cell + " decided wrongly");
                o.require((code != 403) == want && code != 401, cell + " answered " + std::to_string(code));
            }
    o.require(cells == 54, "matrix has " + std::to_string(cells) + " cells");
    const auto fuzz = harness::fuzz_external(api, 77, kFuzzRequests);
    o.require(fuzz.leaks == 0, fuzz.first_leak);
    o.detail << cells << " cells, " << fuzz.requests << " fuzzed requests";
}

void lifecycle(Outcome& o) {
    const auto& t = fixtures::sample();
    const auto reg = props::registry_with(t);
    distaf::AssessmentStore store(reg);
    distaf::CreateRequest req;
    req.template_id = t.id;
    req.id = "life";
    auto a = store.create_assessment(req).state;
    o.require(a.status == distaf::Status::Draft && a.revision == 1, "new assessment is not a draft at revision 1");

    bool blocked = false;
    try {
        store.transition_status("life", a.revision, distaf::Status::Public);
    } catch (const distaf::Error& e) {
        blocked = e.code() == distaf::ErrorCode::IncompleteAssessment;
    }
    o.require(blocked, "incomplete draft was published");

    std::vector<std::pair<std::string, distaf::RawScore>> edits;
    int i = 0;
    for (const auto& p : t.pillars)
        for (const auto& m : p.mechanisms)
            for (const auto& metric : m.metrics) {
                if (metric.kind == distaf::MetricKind::Boolean)
                    edits.emplace_back(metric.code.str(), distaf::RawScore(i % 3 != 0));
                else
                    edits.emplace_back(metric.code.str(), distaf::RawScore(static_cast<double>((i * 37) % 101)));
                ++i;
            }
    a = store.set_metric_values("life", a.revision, edits);
    a = store.transition_status("life", a.revision, distaf::Status::Public);
    o.require(a.status == distaf::Status::Public, "complete draft could not be published");

    distaf::CreateRequest next;
    next.template_id = t.id;
    next.id = "life-2";
    next.from = "life";
    const auto d = store.create_assessment(next).state;
    bool copied = d.metric_values.size() == a.metric_values.size() && d.status == distaf::Status::Draft;
    for (const auto& [code, v] : a.metric_values) {
        auto it = d.metric_values.find(code);
        copied = copied && it != d.metric_values.end() && it->second.same_value(v);
    }
    o.require(copied, "derived assessment did not copy every score");
    const auto ca = store.scorecard("life"), cd = store.scorecard("life-2");
    for (auto ph : distaf::kPhases)
        o.require(ca.phase(ph).pillars == cd.phase(ph).pillars, "derived pillar scores differ");
    o.detail << d.metric_values.size() << " scores copied";
}

} // namespace

int main() {
    criterion("mandatory caps hold exactly at mechanism and pillar level", caps);
    criterion("cluster answers set the configured metric values", cluster_answers);
    criterion("complement sanitization maps f to 100 - f", sanitization);
    criterion("color bands, violation and exclusion colors", color_bands);
    criterion("declaring a standard scores exactly its mapped metrics", standards);
    criterion("engine agrees with the exact rational oracle", oracle_equivalence);
    criterion("scoring and store property suites", property_suites);
    criterion("role matrix enforced and hidden assessments never leak", access_control);
    criterion("assessment lifecycle and derivation", lifecycle);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

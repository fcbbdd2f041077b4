#include "fixtures.hpp"

#include "distaf/report.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace distaf;

namespace {

ScoreNode node(double capped) {
    ScoreNode n;
    n.raw_score = n.capped_score = capped;
    n.state = NodeState::Scored;
    return n;
}

std::size_t line_count(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST(ColorBand, Boundaries) {
    EXPECT_EQ(color_band(node(0)), ColorBand::TomatoRed);
    EXPECT_EQ(color_band(node(33)), ColorBand::TomatoRed);
    EXPECT_EQ(color_band(node(33.01)), ColorBand::LemonChiffon);
    EXPECT_EQ(color_band(node(66)), ColorBand::LemonChiffon);
    EXPECT_EQ(color_band(node(66.01)), ColorBand::LightGreen);
    EXPECT_EQ(color_band(node(100)), ColorBand::LightGreen);
    EXPECT_EQ(css_color(ColorBand::TomatoRed), "#FF6347");
    EXPECT_EQ(css_color(ColorBand::Transparent), "transparent");
}

TEST(ColorBand, ViolationAndExclusion) {
    auto n = node(95);
    n.mandatory_violations.insert("RES.IDR.O6");
    EXPECT_EQ(color_band(n), ColorBand::DeepPink);
    n.excluded = true;
    EXPECT_EQ(color_band(n), ColorBand::Transparent) << "exclusion outranks a violation";
    auto e = node(10);
    e.excluded = true;
    EXPECT_EQ(color_band(e), ColorBand::Transparent);
}

TEST(ColorBand, MetricBands) {
    TemplateIndex index(fixtures::sample());
    const auto& o6 = *index.metric("RES.IDR.O6").metric;
    EXPECT_EQ(metric_band(o6, scored_value("RES.IDR.O6", 0, Origin::Direct)), ColorBand::DeepPink);
    EXPECT_EQ(metric_band(o6, scored_value("RES.IDR.O6", 100, Origin::Direct)), ColorBand::LightGreen);
    EXPECT_FALSE(metric_band(o6, MetricValue{}).has_value());
}

TEST(Fingerprint, PillarAndMechanismAxes) {
    const auto& t = fixtures::sample();
    auto a = fixtures::demo();
    a.excluded_mechanisms.insert("S.RC");
    auto card = assessment_scorecard(t, a);

    auto pillars = fingerprint_series(t, card, FingerprintLevel::Pillars, Phase::Design);
    ASSERT_EQ(pillars.axes.size(), 6u);
    EXPECT_EQ(pillars.axes[0].code, "S");
    EXPECT_EQ(pillars.axes[0].value, card.design.pillars.at("S").capped_score);

    auto mechs = fingerprint_series(t, card, FingerprintLevel::MechanismsOfPillar, Phase::Design, "S");
    std::size_t expected = 0;
    for (const auto& mech : t.pillars[0].mechanisms)
        if (mech.has_phase(Phase::Design) && mech.code != "RC") ++expected;
    EXPECT_EQ(mechs.axes.size(), expected);
    for (const auto& axis : mechs.axes) EXPECT_NE(axis.code, "S.RC");

    EXPECT_THROW(fingerprint_series(t, card, FingerprintLevel::MechanismsOfPillar, Phase::Design, "ZZ"), Error);
}

TEST(Compare, DeltasAndBandChanges) {
    const auto& t = fixtures::sample();
    auto a = fixtures::demo();
    auto b = a;
    b.id = "turing-demo-2";
    b.metric_values["RES.IDR.O6"] = scored_value("RES.IDR.O6", 100, Origin::Direct, RawScore(true));
    auto report = compare(assessment_scorecard(t, a), assessment_scorecard(t, b));
    EXPECT_EQ(report.a, "turing-demo");
    EXPECT_EQ(report.b, "turing-demo-2");

    const NodeDelta* res = nullptr;
    const NodeDelta* idr = nullptr;
    for (const auto& d : report.nodes) {
        if (d.phase == Phase::Operational && d.subject == "RES" && d.is_pillar) res = &d;
        if (d.phase == Phase::Operational && d.subject == "RES.IDR") idr = &d;
        if (d.phase == Phase::Design) {
            EXPECT_EQ(d.delta, 0.0) << d.subject;
        }
    }
    ASSERT_TRUE(res && idr);
    EXPECT_GT(idr->delta, 0.0);
    EXPECT_EQ(idr->delta, idr->after - idr->before);
    EXPECT_EQ(idr->newly_satisfied, std::set<std::string>{"RES.IDR.O6"});
    EXPECT_EQ(res->band_before, ColorBand::DeepPink);
    EXPECT_TRUE(res->band_changed());

    auto other = assessment_scorecard(t, a);
    other.template_ref.id = "other";
    EXPECT_THROW(compare(assessment_scorecard(t, a), other), Error);
}

TEST(Export, TabularHasOneRowPerIncludedMetric) {
    const auto& t = fixtures::sample();
    auto a = fixtures::demo();
    a.excluded_mechanisms.insert("E.OP");
    auto card = assessment_scorecard(t, a);
    auto csv = export_assessment(t, a, card, "tabular");
    EXPECT_EQ(csv.rfind("code,phase,value,origin,mechanism,pillar,band\n", 0), 0u);
    const auto included = card.design.metrics.size() + card.operational.metrics.size();
    EXPECT_EQ(line_count(csv), included + 1);
    EXPECT_EQ(csv.find("E.OP.D1"), std::string::npos);
    EXPECT_NE(csv.find("S.SAA.O10,operational,95,direct,SAA,S,LightGreen\n"), std::string::npos) << csv;
    EXPECT_NE(csv.find("RES.IDR.O6,operational,0,direct,IDR,RES,DeepPink\n"), std::string::npos);
}

TEST(Export, ValuesAreExact) {
    const auto& t = fixtures::sample();
    auto a = fixtures::demo();
    a.metric_values["S.SAA.O10"] = scored_value("S.SAA.O10", 100.0 / 3.0, Origin::Direct);
    auto csv = export_assessment(t, a, assessment_scorecard(t, a), "csv");
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("S.SAA.O10,", 0) == 0) {
            auto value = line.substr(line.find(',', 10) + 1);
            value = value.substr(0, value.find(','));
            EXPECT_EQ(std::stod(value), 100.0 / 3.0);
            return;
        }
    FAIL() << "row missing";
}

TEST(Export, DumpRoundTrips) {
    const auto& t = fixtures::sample();
    auto a = fixtures::demo();
    a.excluded_mechanisms.insert("ROB.IV");
    a.declared_standards.insert("GDPR");
    auto text = export_assessment(t, a, assessment_scorecard(t, a), ExportFormat::Dump);
    auto back = import_dump(text);
    EXPECT_EQ(back, a);
    EXPECT_THROW(import_dump("{\"format\":\"other\"}"), Error);
}

TEST(Export, SummaryAndUnknownFormat) {
    const auto& t = fixtures::sample();
    auto a = fixtures::demo();
    auto card = assessment_scorecard(t, a);
    auto text = export_assessment(t, a, card, "summary");
    EXPECT_NE(text.find("Assessment turing-demo"), std::string::npos);
    EXPECT_NE(text.find("fingerprint [design]: S="), std::string::npos);
    try {
        export_assessment(t, a, card, "xlsx");
        FAIL() << "xlsx accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnsupportedFormat);
    }
}

TEST(Report, PillarTableListsEveryPillar) {
    const auto& t = fixtures::sample();
    auto text = render_pillar_table(t, assessment_scorecard(t, fixtures::demo()), {Phase::Operational});
    for (const auto& p : t.pillars) EXPECT_NE(text.find("\n" + p.code + " "), std::string::npos) << p.code;
    EXPECT_EQ(text.find("[design]"), std::string::npos);
}

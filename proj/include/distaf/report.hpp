#pragma once

#include "distaf/scoring.hpp"

#include <charconv>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace distaf {

enum class ColorBand { DeepPink, TomatoRed, LemonChiffon, LightGreen, Transparent };

inline std::string_view to_string(ColorBand b) {
    switch (b) {
    case ColorBand::DeepPink: return "DeepPink";
    case ColorBand::TomatoRed: return "TomatoRed";
    case ColorBand::LemonChiffon: return "LemonChiffon";
    case ColorBand::LightGreen: return "LightGreen";
    case ColorBand::Transparent: return "Transparent";
    }
    return "Transparent";
}

/// CSS colour for the band background.
inline std::string_view css_color(ColorBand b) {
    switch (b) {
    case ColorBand::DeepPink: return "#FF1493";
    case ColorBand::TomatoRed: return "#FF6347";
    case ColorBand::LemonChiffon: return "#FFFACD";
    case ColorBand::LightGreen: return "#90EE90";
    case ColorBand::Transparent: return "transparent";
    }
    return "transparent";
}

inline ColorBand numeric_band(double score) {
    if (score <= 33.0) return ColorBand::TomatoRed;
    if (score <= 66.0) return ColorBand::LemonChiffon;
    return ColorBand::LightGreen;
}

// Exclusion beats violations, violations beat the numeric bands.
inline ColorBand color_band(const ScoreNode& node) {
    if (node.excluded) return ColorBand::Transparent;
    if (!node.mandatory_violations.empty()) return ColorBand::DeepPink;
    return numeric_band(node.capped_score);
}

/// Band for a single metric row; nullopt while unscored.
inline std::optional<ColorBand> metric_band(const Metric& m, const MetricValue& v) {
    if (!v.scored()) return std::nullopt;
    if (m.mandatory && *v.normalized < m.mandatory->satisfied_when_at_least) return ColorBand::DeepPink;
    return numeric_band(*v.normalized);
}

enum class FingerprintLevel { Pillars, MechanismsOfPillar };

struct FingerprintAxis {
    std::string code;
    std::string label;
    double value = 0.0;
    bool incomplete = false;

    friend bool operator==(const FingerprintAxis&, const FingerprintAxis&) = default;
};

struct FingerprintSeries {
    Phase phase = Phase::Design;
    FingerprintLevel level = FingerprintLevel::Pillars;
    std::string pillar; // set for MechanismsOfPillar
    std::vector<FingerprintAxis> axes;

    friend bool operator==(const FingerprintSeries&, const FingerprintSeries&) = default;
};

/// Radar-chart data in template order. Excluded mechanisms and pillars with
/// nothing to score get no axis.
inline FingerprintSeries fingerprint_series(const FrameworkTemplate& t, const Scorecard& card, FingerprintLevel level,
                                            Phase phase, const std::string& pillar_code = {}) {
    FingerprintSeries series{phase, level, {}, {}};
    const auto& ps = card.phase(phase);
    if (level == FingerprintLevel::Pillars) {
        for (const auto& p : t.pillars) {
            auto it = ps.pillars.find(p.code);
            if (it == ps.pillars.end() || it->second.state == NodeState::NoScorableChildren) continue;
            series.axes.push_back({p.code, p.name, it->second.capped_score, it->second.state != NodeState::Scored});
        }
        return series;
    }
    const auto* pillar = t.find_pillar(pillar_code);
    if (!pillar) throw Error(ErrorCode::UnknownPillar, "pillar '" + pillar_code + "' not in template " + t.id);
    series.pillar = pillar->code;
    for (const auto& mech : pillar->mechanisms) {
        auto it = ps.mechanisms.find(mechanism_key(pillar->code, mech.code));
        if (it == ps.mechanisms.end() || it->second.excluded) continue;
        series.axes.push_back(
            {it->first, mech.name, it->second.capped_score, it->second.state != NodeState::Scored});
    }
    return series;
}

inline json to_json(const FingerprintSeries& s) {
    json axes = json::array();
    for (const auto& a : s.axes)
        axes.push_back({{"code", a.code}, {"label", a.label}, {"value", a.value}, {"incomplete", a.incomplete}});
    json j = {{"phase", to_string(s.phase)},
              {"level", s.level == FingerprintLevel::Pillars ? "pillars" : "mechanisms"},
              {"axes", axes}};
    if (!s.pillar.empty()) j["pillar"] = s.pillar;
    return j;
}

struct NodeDelta {
    Phase phase = Phase::Design;
    std::string subject;
    bool is_pillar = false;
    double before = 0.0;
    double after = 0.0;
    double delta = 0.0;
    ColorBand band_before = ColorBand::Transparent;
    ColorBand band_after = ColorBand::Transparent;
    std::set<std::string> newly_satisfied;
    std::set<std::string> newly_unsatisfied;

    bool band_changed() const { return band_before != band_after; }
};

struct ComparisonReport {
    std::string a;
    std::string b;
    std::string template_id;
    std::vector<NodeDelta> nodes;
};

/// Per-node delta b - a over nodes present in both scorecards.
inline ComparisonReport compare(const Scorecard& a, const Scorecard& b) {
    if (a.template_ref.id != b.template_ref.id)
        throw Error(ErrorCode::TemplateMismatch, "cannot compare " + a.template_ref.id + " with " + b.template_ref.id);
    ComparisonReport report{a.assessment_id, b.assessment_id, a.template_ref.id, {}};
    auto diff = [&](Phase phase, const std::map<std::string, ScoreNode>& left,
                    const std::map<std::string, ScoreNode>& right, bool pillars) {
        for (const auto& [key, na] : left) {
            auto it = right.find(key);
            if (it == right.end()) continue;
            const auto& nb = it->second;
            NodeDelta d;
            d.phase = phase;
            d.subject = key;
            d.is_pillar = pillars;
            d.before = na.capped_score;
            d.after = nb.capped_score;
            d.delta = nb.capped_score - na.capped_score;
            d.band_before = color_band(na);
            d.band_after = color_band(nb);
            for (const auto& c : na.mandatory_violations)
                if (!nb.mandatory_violations.count(c)) d.newly_satisfied.insert(c);
            for (const auto& c : nb.mandatory_violations)
                if (!na.mandatory_violations.count(c)) d.newly_unsatisfied.insert(c);
            report.nodes.push_back(std::move(d));
        }
    };
    for (Phase p : kPhases) {
        diff(p, a.phase(p).pillars, b.phase(p).pillars, true);
        diff(p, a.phase(p).mechanisms, b.phase(p).mechanisms, false);
    }
    return report;
}

inline json to_json(const ComparisonReport& r) {
    json nodes = json::array();
    for (const auto& d : r.nodes)
        nodes.push_back({{"phase", to_string(d.phase)},
                         {"subject", d.subject},
                         {"level", d.is_pillar ? "pillar" : "mechanism"},
                         {"before", d.before},
                         {"after", d.after},
                         {"delta", d.delta},
                         {"band_before", to_string(d.band_before)},
                         {"band_after", to_string(d.band_after)},
                         {"band_changed", d.band_changed()},
                         {"newly_satisfied", d.newly_satisfied},
                         {"newly_unsatisfied", d.newly_unsatisfied}});
    return {{"a", r.a}, {"b", r.b}, {"template_id", r.template_id}, {"nodes", nodes}};
}

enum class ExportFormat { Dump, Tabular, Summary };

inline ExportFormat parse_export_format(std::string_view s) {
    if (s == "dump") return ExportFormat::Dump;
    if (s == "tabular" || s == "csv") return ExportFormat::Tabular;
    if (s == "summary") return ExportFormat::Summary;
    throw Error(ErrorCode::UnsupportedFormat, "format '" + std::string(s) + "' (expected dump, tabular or summary)");
}

namespace detail {

// Shortest representation that reads back to the same double.
inline std::string exact_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::string fixed1(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << display_round(v);
    return os.str();
}

inline std::string node_band_label(const ScoreNode& n) {
    if (n.state == NodeState::NoScorableChildren) return "-";
    return std::string(to_string(color_band(n)));
}

} // namespace detail

/// Plain-text per-phase pillar table; the band sits in the last column.
inline std::string render_pillar_table(const FrameworkTemplate& t, const Scorecard& card,
                                       const std::vector<Phase>& phases = {Phase::Design, Phase::Operational}) {
    std::ostringstream os;
    for (Phase phase : phases) {
        const auto& ps = card.phase(phase);
        os << "[" << to_string(phase) << "] completeness " << detail::fixed1(ps.completeness * 100.0) << "%\n";
        os << std::left << std::setw(8) << "pillar" << std::setw(16) << "name" << std::right << std::setw(8) << "raw"
           << std::setw(8) << "capped" << "  " << std::left << std::setw(20) << "state" << "band\n";
        for (const auto& p : t.pillars) {
            const auto& n = ps.pillars.at(p.code);
            os << std::left << std::setw(8) << p.code << std::setw(16) << p.name.substr(0, 15) << std::right
               << std::setw(8) << detail::fixed1(n.raw_score) << std::setw(8) << detail::fixed1(n.capped_score)
               << "  " << std::left << std::setw(20) << to_string(n.state) << detail::node_band_label(n) << "\n";
        }
    }
    return os.str();
}

/// `dump` embeds the assessment document plus its scorecard; `tabular` is
/// one CSV row per included metric; `summary` is the pillar table with
/// fingerprint values.
inline std::string export_assessment(const FrameworkTemplate& t, const AssessmentState& a, const Scorecard& card,
                                     ExportFormat format) {
    switch (format) {
    case ExportFormat::Dump: {
        json doc = {{"format", "distaf-dump"}, {"assessment", to_json(a)}, {"scorecard", to_json(card)}};
        return doc.dump(2) + "\n";
    }
    case ExportFormat::Tabular: {
        const TemplateIndex index(t);
        std::string out = "code,phase,value,origin,mechanism,pillar,band\n";
        for (const auto& pillar : t.pillars)
            for (const auto& mech : pillar.mechanisms)
                for (const auto& m : mech.metrics) {
                    const auto code = m.code.str();
                    auto it = card.phase(m.phase()).metrics.find(code);
                    if (it == card.phase(m.phase()).metrics.end()) continue; // excluded
                    const auto& v = it->second;
                    auto band = metric_band(m, v);
                    out += code + "," + std::string(to_string(m.phase())) + "," +
                           (v.scored() ? detail::exact_number(*v.normalized) : "") + "," +
                           (v.scored() ? std::string(to_string(v.origin)) : "") + "," + mech.code + "," +
                           pillar.code + "," + (band ? std::string(to_string(*band)) : "") + "\n";
                }
        return out;
    }
    case ExportFormat::Summary: {
        std::ostringstream os;
        os << "Assessment " << a.id << " (" << to_string(a.status) << ", revision " << a.revision << ")\n";
        if (!a.description.empty()) os << a.description << "\n";
        os << "Template " << t.id << "@" << t.version << "\n\n";
        os << render_pillar_table(t, card);
        for (Phase phase : kPhases) {
            auto series = fingerprint_series(t, card, FingerprintLevel::Pillars, phase);
            os << "\nfingerprint [" << to_string(phase) << "]:";
            for (const auto& axis : series.axes)
                os << " " << axis.code << "=" << detail::fixed1(axis.value) << (axis.incomplete ? "*" : "");
        }
        os << "\n";
        return os.str();
    }
    }
    throw Error(ErrorCode::UnsupportedFormat, "unknown format");
}

inline std::string export_assessment(const FrameworkTemplate& t, const AssessmentState& a, const Scorecard& card,
                                     std::string_view format) {
    return export_assessment(t, a, card, parse_export_format(format));
}

/// Reads a `dump` export back into the assessment it was produced from.
inline AssessmentState import_dump(const std::string& text) {
    auto doc = parse_json_text(text, "dump");
    if (!doc.is_object() || doc.value("format", "") != "distaf-dump" || !doc.contains("assessment"))
        throw Error(ErrorCode::ParseError, "not a distaf dump document");
    return assessment_from_json(doc["assessment"]);
}

} // namespace distaf

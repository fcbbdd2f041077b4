#pragma once

#include "distaf/store.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace fixtures {

inline std::filesystem::path source_dir() { return DISTAF_SOURCE_DIR; }
inline std::filesystem::path template_dir() { return source_dir() / "templates"; }
inline std::filesystem::path sample_template_path() { return template_dir() / "distaf-sample.json"; }
inline std::filesystem::path demo_path() { return source_dir() / "fixtures" / "turing-demo.json"; }

inline const distaf::FrameworkTemplate& sample() {
    static const auto t = distaf::load_template(sample_template_path());
    return t;
}

inline distaf::AssessmentState demo() {
    auto a = distaf::load_assessment(demo_path());
    distaf::TemplateIndex index(sample());
    distaf::normalize_values(index, a.metric_values);
    return a;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("distaf-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

// Small hand-built frameworks -------------------------------------------------

inline distaf::Metric metric(const std::string& code, distaf::MetricKind kind = distaf::MetricKind::Percentage) {
    distaf::Metric m;
    m.code = distaf::parse_metric_code(code);
    m.title = code;
    m.kind = kind;
    return m;
}

inline distaf::Metric mandatory(distaf::Metric m, double mech_cap, double pillar_cap, double threshold = 100.0) {
    m.mandatory = distaf::MandatoryCaps{mech_cap, pillar_cap, threshold};
    return m;
}

inline distaf::Mechanism mechanism(const std::string& code, std::vector<distaf::Metric> metrics) {
    distaf::Mechanism mech;
    mech.code = code;
    mech.name = code;
    mech.metrics = std::move(metrics);
    return mech;
}

inline distaf::Pillar pillar(const std::string& code, std::vector<distaf::Mechanism> mechs) {
    distaf::Pillar p;
    p.code = code;
    p.name = code;
    p.mechanisms = std::move(mechs);
    return p;
}

inline distaf::FrameworkTemplate framework(std::vector<distaf::Pillar> pillars, std::string id = "tiny") {
    distaf::FrameworkTemplate t;
    t.id = std::move(id);
    t.version = "1";
    t.name = t.id;
    t.pillars = std::move(pillars);
    return t;
}

inline distaf::AssessmentState blank_assessment(const distaf::FrameworkTemplate& t, std::string id = "a1") {
    distaf::AssessmentState a;
    a.id = std::move(id);
    a.template_ref = {t.id, t.version};
    return a;
}

inline void put(distaf::AssessmentState& a, const std::string& code, double normalized) {
    a.metric_values[code] = distaf::scored_value(code, normalized, distaf::Origin::Direct, distaf::RawScore(normalized));
}

} // namespace fixtures

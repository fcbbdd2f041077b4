// Offline companion to the assessment service: validate templates, score
// assessment files, export reports, seed the first admin, run the API.

#include "distaf/http_server.hpp"
#include "distaf/report.hpp"
#include "distaf/store.hpp"
#include "distaf/validation.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

enum Exit { kOk = 0, kDomain = 1, kIo = 2, kUsage = 3 };

int exit_code_for(const distaf::Error& e) {
    switch (e.code()) {
    case distaf::ErrorCode::IoError: return kIo;
    case distaf::ErrorCode::UnsupportedFormat: return kUsage;
    default: return kDomain;
    }
}

std::filesystem::path resolve(const std::string& file, const std::string& dir) {
    std::filesystem::path p(file);
    if (p.is_relative() && !dir.empty() && !std::filesystem::exists(p)) return std::filesystem::path(dir) / p;
    return p;
}

std::vector<distaf::Phase> phases_for(const std::string& phase) {
    if (phase == "both") return {distaf::Phase::Design, distaf::Phase::Operational};
    return {distaf::parse_phase(phase)};
}

struct Loaded {
    distaf::FrameworkTemplate tmpl;
    distaf::AssessmentState assessment;
    distaf::Scorecard card;
};

Loaded load_and_score(const std::string& template_file, const std::string& assessment_file,
                      const std::string& template_dir, const std::string& data_dir) {
    Loaded out;
    out.tmpl = distaf::load_template(resolve(template_file, template_dir));
    auto report = distaf::validate_template(out.tmpl);
    if (report.has_errors()) {
        std::ostringstream os;
        os << report;
        throw distaf::Error(distaf::ErrorCode::ParseError, "template is invalid:\n" + os.str());
    }
    out.assessment = distaf::load_assessment(resolve(assessment_file, data_dir));
    const distaf::TemplateIndex index(out.tmpl);
    distaf::normalize_values(index, out.assessment.metric_values);
    out.card = distaf::assessment_scorecard(out.tmpl, out.assessment);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"distaf: trustworthiness assessment scoring"};
    app.require_subcommand(1);

    std::string template_dir = "templates";
    std::string data_dir = "data";
    app.add_option("--template-dir", template_dir, "Directory of template files")->envname("DISTAF_TEMPLATE_DIR");
    app.add_option("--data-dir", data_dir, "Directory for assessments and users")->envname("DISTAF_DATA_DIR");

    auto* validate = app.add_subcommand("validate", "Check a template file");
    std::string validate_file;
    validate->add_option("template", validate_file, "Template file")->required();

    auto* score = app.add_subcommand("score", "Print per-phase pillar scores of an assessment file");
    std::string score_template, score_assessment, phase = "both";
    score->add_option("template", score_template, "Template file")->required();
    score->add_option("assessment", score_assessment, "Assessment file")->required();
    score->add_option("--phase", phase, "design|operational|both")
        ->check(CLI::IsMember({"design", "operational", "both"}));

    auto* exp = app.add_subcommand("export", "Export an assessment file");
    std::string export_template, export_assessment, format = "summary", output;
    exp->add_option("template", export_template, "Template file")->required();
    exp->add_option("assessment", export_assessment, "Assessment file")->required();
    exp->add_option("--format", format, "dump|tabular|summary");
    exp->add_option("-o,--output", output, "Write to file instead of stdout");

    auto* init_admin = app.add_subcommand("init-admin", "Create the first admin account");
    std::string admin_name = "admin";
    init_admin->add_option("username", admin_name, "Admin username");

    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    std::string bind = "127.0.0.1:8080";
    int session_minutes = 480;
    serve->add_option("--bind", bind, "host:port")->envname("DISTAF_BIND");
    serve->add_option("--session-lifetime", session_minutes, "Session lifetime in minutes")
        ->envname("DISTAF_SESSION_MINUTES");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*validate) {
            auto t = distaf::load_template(resolve(validate_file, template_dir));
            auto report = distaf::validate_template(t);
            std::cout << report;
            std::cout << (report.has_errors() ? "INVALID" : "OK") << ": " << t.id << "@" << t.version << " ("
                      << report.error_count() << " errors, " << report.findings.size() - report.error_count()
                      << " warnings)\n";
            return report.has_errors() ? kDomain : kOk;
        }
        if (*score) {
            auto loaded = load_and_score(score_template, score_assessment, template_dir, data_dir);
            std::cout << "Assessment " << loaded.assessment.id << " against " << loaded.tmpl.id << "@"
                      << loaded.tmpl.version << "\n";
            std::cout << distaf::render_pillar_table(loaded.tmpl, loaded.card, phases_for(phase));
            return kOk;
        }
        if (*exp) {
            auto loaded = load_and_score(export_template, export_assessment, template_dir, data_dir);
            auto text = distaf::export_assessment(loaded.tmpl, loaded.assessment, loaded.card, format);
            if (output.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(output, std::ios::binary);
                if (!out) throw distaf::Error(distaf::ErrorCode::IoError, "cannot write " + output);
                out << text;
            }
            return kOk;
        }
        if (*init_admin) {
            distaf::UserDirectory users{std::filesystem::path(data_dir)};
            auto issued = users.bootstrap_admin(admin_name);
            std::cout << "created admin '" << issued.user.username << "' with temporary password "
                      << issued.temporary_password << "\n";
            return kOk;
        }
        if (*serve) {
            auto registry = distaf::TemplateRegistry::from_directory(template_dir);
            distaf::AssessmentStore store(registry, std::filesystem::path(data_dir));
            distaf::UserDirectory users{std::filesystem::path(data_dir)};
            distaf::SessionManager sessions{std::chrono::minutes(session_minutes)};
            distaf::ApiService api(registry, store, users, sessions);

            const auto colon = bind.rfind(':');
            if (colon == std::string::npos) {
                std::cerr << "--bind must be host:port\n";
                return kUsage;
            }
            const auto host = bind.substr(0, colon);
            const int port = std::stoi(bind.substr(colon + 1));
            httplib::Server server;
            distaf::bind_routes(server, api);
            std::cerr << "listening on " << host << ":" << port << "\n";
            if (!server.listen(host, port)) {
                std::cerr << "cannot bind " << bind << "\n";
                return kIo;
            }
            return kOk;
        }
    } catch (const distaf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
    return kUsage;
}

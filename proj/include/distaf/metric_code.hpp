#pragma once

#include "distaf/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace distaf {

enum class Phase { Design, Operational };

inline constexpr Phase kPhases[] = {Phase::Design, Phase::Operational};

inline std::string_view to_string(Phase p) {
    return p == Phase::Design ? "design" : "operational";
}

inline char phase_letter(Phase p) { return p == Phase::Design ? 'D' : 'O'; }

inline Phase parse_phase(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "design" || lower == "d") return Phase::Design;
    if (lower == "operational" || lower == "o") return Phase::Operational;
    throw Error(ErrorCode::ParseError, "unknown phase '" + std::string(text) + "'");
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline bool is_code_token(std::string_view s) {
    return !s.empty() && s.size() <= 8 &&
           std::all_of(s.begin(), s.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

} // namespace detail

// <PILLAR>.<MECH>.<D|O><index>, e.g. S.AC.D8
struct MetricCode {
    std::string pillar;
    std::string mechanism;
    Phase phase = Phase::Design;
    std::uint32_t index = 1;

    std::string str() const {
        return pillar + "." + mechanism + "." + phase_letter(phase) + std::to_string(index);
    }

    /// "S.AC" -- the key under which the owning mechanism is addressed.
    std::string mechanism_key() const { return pillar + "." + mechanism; }

    friend bool operator==(const MetricCode&, const MetricCode&) = default;
    friend auto operator<=>(const MetricCode& a, const MetricCode& b) {
        return a.str() <=> b.str();
    }
};

inline MetricCode parse_metric_code(std::string_view text) {
    std::string norm(detail::trim(text));
    std::transform(norm.begin(), norm.end(), norm.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    auto fail = [&](const std::string& why) -> MetricCode {
        throw Error(ErrorCode::MalformedCode, "'" + std::string(text) + "': " + why);
    };

    const auto first = norm.find('.');
    if (first == std::string::npos) return fail("expected three dot-separated segments");
    const auto second = norm.find('.', first + 1);
    if (second == std::string::npos || norm.find('.', second + 1) != std::string::npos)
        return fail("expected three dot-separated segments");

    std::string_view all(norm);
    auto pillar = all.substr(0, first);
    auto mech = all.substr(first + 1, second - first - 1);
    auto tail = all.substr(second + 1);

    if (!detail::is_code_token(pillar)) return fail("pillar must be 1-8 letters A-Z");
    if (!detail::is_code_token(mech)) return fail("mechanism must be 1-8 letters A-Z");
    if (tail.size() < 2) return fail("missing phase letter or index");
    if (tail.front() != 'D' && tail.front() != 'O') return fail("phase letter must be D or O");

    auto digits = tail.substr(1);
    if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
        return fail("index must be numeric");
    std::uint32_t index = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) return fail("index out of range");
    if (index == 0) return fail("index must be >= 1");
    // Leading zeros would break the canonical round trip.
    if (digits.front() == '0') return fail("index must not have leading zeros");

    return MetricCode{std::string(pillar), std::string(mech),
                      tail.front() == 'D' ? Phase::Design : Phase::Operational, index};
}

inline std::string mechanism_key(std::string_view pillar, std::string_view mechanism) {
    return std::string(pillar) + "." + std::string(mechanism);
}

} // namespace distaf

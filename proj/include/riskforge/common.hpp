#pragma once

#include <json.hpp>

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace riskforge {

using json = nlohmann::json;

// Mirrors rf_status in riskforge.h; keep the numeric values in sync.
enum class ErrorCode : int {
    InvalidArgument = 2,
    StorageFailure = 3,
    UnknownKey = 4,
    KeyAbsent = 5,
    MalformedCorpus = 6,
    DuplicateIdentifier = 7,
    ProfileInvalid = 8,
    ContextOverflow = 9,
    ProviderUnreachable = 10,
    ProviderError = 11,
    NoScriptForRole = 12,
    MissingContextKey = 13,
    Unparseable = 14,
    SchemaViolation = 15,
    AgentFailed = 16,
    IncompleteContext = 17,
    NoRunsSelected = 18,
    MissingFunction = 19,
    ConfigError = 20,
    Internal = 99,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

enum class AgentRole {
    RiskIntake,
    ThreatModeling,
    ControlAssessment,
    RiskScoring,
    Mitigation,
    ReportSynthesis,
};

inline constexpr std::array<AgentRole, 6> kAllRoles = {
    AgentRole::RiskIntake,     AgentRole::ThreatModeling, AgentRole::ControlAssessment,
    AgentRole::RiskScoring,    AgentRole::Mitigation,     AgentRole::ReportSynthesis,
};

std::string_view to_string(AgentRole role) noexcept;
std::optional<AgentRole> parse_role(std::string_view name) noexcept;

// Sorted keys, no insignificant whitespace. nlohmann::json objects are
// std::map-backed, so dump() already yields lexicographic key order.
std::string canonical(const json& doc);

// Number of Unicode code points in a UTF-8 string. Invalid lead bytes count
// as one character each.
std::size_t utf8_length(std::string_view text) noexcept;

// Current UTC time as RFC 3339 with millisecond precision.
std::string rfc3339_now();

}  // namespace riskforge

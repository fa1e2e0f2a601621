#include "riskforge/common.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

namespace riskforge {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::StorageFailure: return "StorageFailure";
        case ErrorCode::UnknownKey: return "UnknownKey";
        case ErrorCode::KeyAbsent: return "KeyAbsent";
        case ErrorCode::MalformedCorpus: return "MalformedCorpus";
        case ErrorCode::DuplicateIdentifier: return "DuplicateIdentifier";
        case ErrorCode::ProfileInvalid: return "ProfileInvalid";
        case ErrorCode::ContextOverflow: return "ContextOverflow";
        case ErrorCode::ProviderUnreachable: return "ProviderUnreachable";
        case ErrorCode::ProviderError: return "ProviderError";
        case ErrorCode::NoScriptForRole: return "NoScriptForRole";
        case ErrorCode::MissingContextKey: return "MissingContextKey";
        case ErrorCode::Unparseable: return "Unparseable";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::AgentFailed: return "AgentFailed";
        case ErrorCode::IncompleteContext: return "IncompleteContext";
        case ErrorCode::NoRunsSelected: return "NoRunsSelected";
        case ErrorCode::MissingFunction: return "MissingFunction";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

std::string_view to_string(AgentRole role) noexcept {
    switch (role) {
        case AgentRole::RiskIntake: return "risk_intake";
        case AgentRole::ThreatModeling: return "threat_modeling";
        case AgentRole::ControlAssessment: return "control_assessment";
        case AgentRole::RiskScoring: return "risk_scoring";
        case AgentRole::Mitigation: return "mitigation";
        case AgentRole::ReportSynthesis: return "report_synthesis";
    }
    return "unknown";
}

std::optional<AgentRole> parse_role(std::string_view name) noexcept {
    for (AgentRole role : kAllRoles) {
        if (to_string(role) == name) return role;
    }
    return std::nullopt;
}

std::string canonical(const json& doc) {
    return doc.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::size_t utf8_length(std::string_view text) noexcept {
    std::size_t count = 0;
    for (unsigned char c : text) {
        // continuation bytes are 10xxxxxx
        if ((c & 0xC0) != 0x80) ++count;
    }
    return count;
}

std::string rfc3339_now() {
    using namespace std::chrono;
    const auto now = system_clock::now();
    const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    const std::time_t secs = system_clock::to_time_t(now);
    std::tm utc{};
    gmtime_r(&secs, &utc);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", utc.tm_year + 1900,
                  utc.tm_mon + 1, utc.tm_mday, utc.tm_hour, utc.tm_min, utc.tm_sec,
                  static_cast<int>(ms));
    return buf;
}

}  // namespace riskforge

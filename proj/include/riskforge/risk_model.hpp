#pragma once

#include "riskforge/common.hpp"
#include "riskforge/grounding.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace riskforge {

enum class Ordinal { Low = 1, Medium = 2, High = 3 };
enum class Band { Low, Medium, High };

std::string_view to_string(Ordinal o) noexcept;
std::string_view to_string(Band b) noexcept;
// Case-insensitive, exact vocabulary {low, medium, high}.
std::optional<Ordinal> parse_ordinal(std::string_view text) noexcept;

struct SeverityScore {
    int value = 1;
    Band band = Band::Low;
};

SeverityScore derive_severity(Ordinal likelihood, Ordinal impact) noexcept;

struct RiskItem {
    std::string title;
    Ordinal likelihood = Ordinal::Low;
    Ordinal impact = Ordinal::Low;
    std::string reasoning;
    std::vector<std::string> linked_threat_titles;
    std::vector<std::string> linked_control_gaps;
    std::vector<FrameworkCitation> citations;

    SeverityScore severity() const noexcept { return derive_severity(likelihood, impact); }
};

// Parses `{"risks": [...]}` (or a bare array). Citations are attached when a
// corpus is given.
std::vector<RiskItem> risks_from_register(const json& register_doc, const Corpus* corpus = nullptr);
json to_json(const RiskItem& item);

/// Descending severity, then impact descending, then title ascending.
std::vector<RiskItem> rank_risks(std::vector<RiskItem> risks);

/// Case-fold, punctuation to spaces, collapse whitespace, trim.
std::string normalize_title(std::string_view title);

enum class ComplianceStatus { Compliant, PartiallyCompliant, NotCompliant };
std::string_view to_string(ComplianceStatus s) noexcept;

inline constexpr std::array<std::string_view, 5> kCsfFunctions = {"Identify", "Protect", "Detect", "Respond",
                                                                   "Recover"};

struct ComplianceRollup {
    std::map<std::string, ComplianceStatus> status;
    std::map<std::string, std::vector<std::string>> evidence;
};

json to_json(const ComplianceRollup& rollup);

/// Per CSF function: NotCompliant when every finding is a gap, Compliant when
/// none is, PartiallyCompliant otherwise. Expects the control_assessment
/// document shape `{"functions": {"Identify": [{"finding", "status"}...]}}`.
ComplianceRollup compliance_rollup(const json& control_assessment);

enum class ContradictionKind { UnaddressedHighRisk, DanglingReference };
std::string_view to_string(ContradictionKind kind) noexcept;

struct ContradictionFlag {
    ContradictionKind kind = ContradictionKind::UnaddressedHighRisk;
    std::string risk_title;
    std::string recommendation;  // empty for unaddressed risks
    std::string detail;
};

json to_json(const ContradictionFlag& flag);

/// Flags every high-band risk no recommendation links to, and every
/// recommendation link naming a risk absent from the register.
std::vector<ContradictionFlag> check_contradictions(const std::vector<RiskItem>& risks,
                                                    const json& recommendations);

}  // namespace riskforge

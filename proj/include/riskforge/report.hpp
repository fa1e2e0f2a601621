#pragma once

#include "riskforge/common.hpp"
#include "riskforge/context_store.hpp"
#include "riskforge/grounding.hpp"
#include "riskforge/risk_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace riskforge {

enum class PhaseBucket { Days30 = 30, Days60 = 60, Days90 = 90, Beyond = 1000 };

std::string_view to_string(PhaseBucket bucket) noexcept;
std::optional<PhaseBucket> parse_phase(const json& value) noexcept;

struct Recommendation {
    std::string action;
    PhaseBucket phase = PhaseBucket::Days30;
    std::string cost_range;  // carried verbatim
    std::vector<std::string> linked_risk_titles;
    std::string rationale;
};

std::vector<Recommendation> recommendations_from(const json& recommendations_doc);
json to_json(const Recommendation& rec);

struct RoadmapPhase {
    PhaseBucket bucket = PhaseBucket::Days30;
    std::vector<Recommendation> items;
};

/// Groups by bucket ascending; within a bucket, by the highest severity among
/// linked register risks, descending, original order on ties.
std::vector<RoadmapPhase> summarize_roadmap(const json& recommendations_doc, const std::vector<RiskItem>& risks);

struct SourcedCitation {
    std::string source;  // entry-kind the citation was found in
    FrameworkCitation citation;
};

// Verifies the canonical payload of each entry, in snapshot order.
std::vector<SourcedCitation> collect_citations(const ContextSnapshot& snapshot, const Corpus& corpus);

struct RunMetadata {
    std::string run_id;
    std::string model_id;
    std::string mode;
    std::int64_t seed = 0;
    std::size_t window = 0;
    double wall_seconds = 0.0;
};

struct AssessmentReport {
    std::string exec_summary;
    json profile_echo;
    std::vector<RiskItem> risks;
    ComplianceRollup compliance;
    std::vector<RoadmapPhase> roadmap;
    std::vector<SourcedCitation> citations;
    std::vector<ContradictionFlag> contradiction_flags;
    RunMetadata run_metadata;
};

// Throws IncompleteContext naming the first missing entry-kind.
AssessmentReport build_report(const ContextSnapshot& snapshot, std::vector<SourcedCitation> citations,
                              std::vector<ContradictionFlag> flags, RunMetadata metadata);

json to_json(const AssessmentReport& report);

inline constexpr std::string_view kUnverifiedMark = "UNVERIFIED — requires human review";

/// Deterministic Markdown. Run id and wall time are left out so identical
/// runs render byte-identically; they live in the JSON companion.
std::string render_markdown(const AssessmentReport& report);

std::string render_report(const ContextSnapshot& snapshot, const std::vector<SourcedCitation>& citations,
                          const std::vector<ContradictionFlag>& flags, const RunMetadata& metadata = {});

}  // namespace riskforge

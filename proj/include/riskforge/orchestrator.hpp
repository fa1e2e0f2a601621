#pragma once

#include "riskforge/agent_contracts.hpp"
#include "riskforge/common.hpp"
#include "riskforge/context_store.hpp"
#include "riskforge/grounding.hpp"
#include "riskforge/llm_gateway.hpp"
#include "riskforge/report.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace riskforge {

enum class RunMode { MultiAgent, SingleAgent };
enum class FailureKind { ContextOverflow, AgentFailed, ProviderError };

std::string_view to_string(RunMode mode) noexcept;
std::optional<RunMode> parse_run_mode(std::string_view text) noexcept;
std::string_view to_string(FailureKind kind) noexcept;
std::optional<FailureKind> parse_failure_kind(std::string_view text) noexcept;

inline constexpr std::string_view kSingleAgentRole = "single_agent";

struct PipelinePlan {
    std::vector<std::vector<AgentRole>> stages;

    // intake, {threat modeling, control assessment}, scoring, mitigation, synthesis
    static PipelinePlan standard();

    // Throws InvalidArgument unless every role appears once and each role's
    // reads are written by a strictly earlier stage.
    void validate() const;
};

struct RunRecord {
    std::string run_id;
    std::string profile_id;
    std::string model_id;
    RunMode mode = RunMode::MultiAgent;
    std::int64_t seed = 0;
    std::size_t window = 0;
    bool completed = false;
    std::optional<std::string> failed_stage;
    std::optional<FailureKind> failure_kind;
    std::string failure_detail;
    double wall_seconds = 0.0;
    bool structural_ok = false;
    std::vector<std::string> unique_threat_titles;
};

json to_json(const RunRecord& record);
RunRecord run_record_from_json(const json& doc);

/// Appends one JSON line with a single write(2) on an O_APPEND descriptor,
/// serialized within the process, so concurrent writers never interleave.
void record_run(const RunRecord& record, const std::filesystem::path& path);
std::vector<RunRecord> read_ledger(const std::filesystem::path& path);

struct BudgetDecision {
    bool pass = true;
    std::string role;
    std::size_t reads_tokens = 0;
    std::size_t overhead_tokens = 0;
    std::size_t prospective_tokens = 0;
    std::size_t reserved_tokens = 0;
    std::size_t window = 0;
    std::size_t deficit = 0;
    std::string largest_entry;
    std::size_t largest_entry_tokens = 0;

    std::string diagnostic() const;
};

/// Prospective prompt = footprint of the role's reads in `snapshot` plus
/// `overhead_tokens` (template and grounding). Fails iff prospective +
/// reserved output exceeds the window.
BudgetDecision enforce_budget(const ContextSnapshot& snapshot, AgentRole role, const ModelConfig& config,
                              std::size_t overhead_tokens);

struct PipelineObserver {
    std::function<void(std::string_view role)> on_agent_start;
    std::function<void(std::string_view role, bool ok)> on_agent_finish;
};

struct PipelineEnv {
    const ContractSet& contracts;
    const Corpus& corpus;
    Gateway& gateway;
};

struct PipelineOptions {
    RunMode mode = RunMode::MultiAgent;
    ModelConfig config;
    // Defaults: case study for multi-agent, cross-sector (3/3/3) for single-agent.
    std::optional<SchemaMode> schema_mode;
    int retry_limit = 2;
    std::size_t grounding_k = 4;
    std::string run_id;  // generated when empty
    std::optional<std::filesystem::path> session_log;
    const PipelineObserver* observer = nullptr;
};

struct StageTiming {
    std::vector<std::string> roles;
    double seconds = 0.0;
};

struct PipelineResult {
    RunRecord record;
    std::optional<ContextEntry> report_entry;
    std::optional<AssessmentReport> report;
    std::optional<BudgetDecision> budget_failure;
    std::vector<StageTiming> stages;
    std::unique_ptr<ContextStore> store;
};

std::string make_run_id();
SchemaMode default_schema_mode(RunMode mode) noexcept;

/// Runs one assessment over a fresh context store. Stage failures abort the
/// remaining stages and are captured in the record; only an invalid profile
/// throws (ProfileInvalid), before anything runs.
PipelineResult execute_pipeline(const json& profile, const PipelineEnv& env, const PipelineOptions& options);

}  // namespace riskforge

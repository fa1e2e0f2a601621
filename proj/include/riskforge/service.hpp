#pragma once

#include "riskforge/agent_contracts.hpp"
#include "riskforge/grounding.hpp"
#include "riskforge/orchestrator.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace riskforge {

// Explicit value, else $RISKFORGE_DATA, else the directory baked in at build time.
std::filesystem::path resolve_data_dir(const std::optional<std::filesystem::path>& explicit_dir);

/// Contracts and corpus loaded from a data directory (templates/, schemas/,
/// corpus/csf_mini.jsonl unless overridden or $RISKFORGE_CORPUS is set).
struct Workspace {
    std::filesystem::path data_dir;
    ContractSet contracts;
    Corpus corpus;

    static Workspace load(const std::optional<std::filesystem::path>& data_dir,
                          const std::optional<std::filesystem::path>& corpus_path = std::nullopt);
};

struct ModelSpec {
    std::string label = "specific";  // recorded as model_id
    std::string provider = "stub";  // "stub" or "http"
    std::optional<std::filesystem::path> stub_dir;  // default: <data>/stub/<label>
    std::optional<std::string> base_url;           // http; default $RISKFORGE_MODEL_URL
    std::optional<std::size_t> window;             // http probes when absent
    std::size_t reserved_output_tokens = 1024;
    double temperature = 0.2;
    std::optional<double> stub_sleep_seconds;
};

std::unique_ptr<Gateway> make_gateway(const ModelSpec& spec, const std::filesystem::path& data_dir);

struct AssessRequest {
    std::filesystem::path profile;
    RunMode mode = RunMode::MultiAgent;
    ModelSpec model;
    std::int64_t seed = 1;
    std::optional<SchemaMode> schema_mode;
    std::optional<std::filesystem::path> data_dir;
    std::optional<std::filesystem::path> corpus;
    std::filesystem::path out_dir = "runs";
};

struct AssessOutcome {
    RunRecord record;
    std::filesystem::path run_dir;
    std::optional<BudgetDecision> budget_failure;
    std::vector<StageTiming> stages;
};

json load_json_file(const std::filesystem::path& path);

/// Runs one assessment and writes `<out>/<run_id>/{report.md,report.json,
/// context.jsonl,record.json}`, appending the record to `<out>/runs.jsonl`.
/// Report files are written only for completed runs.
AssessOutcome assess(const AssessRequest& request);

struct AblationRequest {
    std::filesystem::path profiles_dir;
    std::filesystem::path models_config;
    int runs = 3;
    RunMode mode = RunMode::SingleAgent;
    std::filesystem::path ledger;
    int jobs = 1;
    std::optional<std::size_t> window;  // overrides every model's window
    std::optional<std::filesystem::path> data_dir;
    std::optional<std::filesystem::path> corpus;
};

struct AblationSummary {
    std::size_t scheduled = 0;
    std::size_t skipped = 0;
    std::size_t completed = 0;
    std::size_t failed = 0;
};

// `{"models": [{"label", "provider", "stub_dir", "window", ...}]}`; relative
// stub_dir paths resolve against the config file's directory.
std::vector<ModelSpec> load_model_specs(const std::filesystem::path& config);

/// profiles × models × seeds 1..runs. Cells whose (profile, model, seed, mode)
/// already appear in the ledger are skipped.
AblationSummary run_ablation(const AblationRequest& request);

}  // namespace riskforge

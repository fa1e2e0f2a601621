#pragma once

#include "riskforge/common.hpp"
#include "riskforge/orchestrator.hpp"
#include "riskforge/risk_model.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace riskforge {

struct PractitionerAnnotation {
    std::string assessor_id;
    std::string risk_title;
    Ordinal severity = Ordinal::Low;
};

// JSON Lines; lines starting with '#' or '//' are comments. Throws
// InvalidArgument on a duplicate (assessor, normalized title).
std::vector<PractitionerAnnotation> load_annotations(const std::filesystem::path& path);
std::vector<PractitionerAnnotation> annotations_from_json(const json& array);

/// Declared (system title, practitioner title) equivalences, compared after
/// normalization in either direction.
class AliasMap {
public:
    AliasMap() = default;
    // Throws InvalidArgument when one practitioner title is tied to two
    // different system titles.
    void add(std::string_view system_title, std::string_view practitioner_title);
    bool matches(std::string_view system_title, std::string_view practitioner_title) const;
    std::size_t size() const noexcept { return to_system_.size(); }

    static AliasMap from_json(const json& pairs);
    static AliasMap load(const std::filesystem::path& path);

private:
    std::map<std::string, std::string> to_system_;
};

struct Ratio {
    std::size_t matched = 0;
    std::size_t total = 0;

    bool defined() const noexcept { return total != 0; }
    double value() const noexcept { return total ? static_cast<double>(matched) / static_cast<double>(total) : 0.0; }
    std::string display() const;  // three decimals or "n/a"
    json to_json() const;         // number or "n/a"
};

struct RunSelector {
    std::optional<std::string> model;
    std::optional<RunMode> mode;
    std::optional<std::string> profile;

    // "model=specific,mode=single,profile=health_15"; any subset, any order.
    static RunSelector parse(std::string_view text);
    bool accepts(const RunRecord& record) const;
};

// First annotation per (system risk, assessor) that matches by title.
Ratio severity_agreement(const std::vector<RiskItem>& system, const std::vector<PractitionerAnnotation>& annotations,
                         const AliasMap& aliases);
Ratio coverage(const std::vector<RiskItem>& system, const std::vector<PractitionerAnnotation>& annotations,
               const AliasMap& aliases);

// Completed-and-valid over all selected runs; undefined when none selected.
Ratio structural_stability(const std::vector<RunRecord>& ledger, const RunSelector& selector);

// Distinct normalized threat titles over the selected completed runs.
// Throws NoRunsSelected.
std::size_t title_variability(const std::vector<RunRecord>& ledger, std::string_view profile_id,
                              std::string_view model_id, std::optional<RunMode> mode = std::nullopt);

struct LatencyStats {
    std::size_t runs = 0;
    double mean_s = 0.0;
    double min_s = 0.0;
    double max_s = 0.0;
};

// Throws NoRunsSelected.
LatencyStats latency_stats(const std::vector<RunRecord>& ledger, const RunSelector& selector);

struct VariabilityRow {
    std::string profile_id;
    std::string model_id;
    RunMode mode = RunMode::MultiAgent;
    std::size_t runs = 0;
    std::size_t unique_titles = 0;
};

struct LatencyRow {
    std::string model_id;
    RunMode mode = RunMode::MultiAgent;
    LatencyStats stats;
};

struct MetricsReport {
    std::optional<Ratio> agreement;
    std::optional<Ratio> coverage;
    std::optional<Ratio> stability;
    std::size_t selected_runs = 0;
    std::size_t completed_runs = 0;
    std::vector<VariabilityRow> variability;
    std::vector<LatencyRow> latency;

    json to_json() const;
    std::string to_table() const;
};

struct EvalInputs {
    std::optional<std::filesystem::path> ledger;
    std::optional<std::filesystem::path> annotations;
    std::optional<std::filesystem::path> aliases;
    std::optional<std::filesystem::path> system_register;  // risk_register JSON
    RunSelector selector;
};

MetricsReport evaluate(const EvalInputs& inputs);

}  // namespace riskforge

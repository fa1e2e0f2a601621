#include "riskforge/report.hpp"

#include "riskforge/agent_contracts.hpp"

#include <algorithm>
#include <sstream>

namespace riskforge {

std::string_view to_string(PhaseBucket bucket) noexcept {
    switch (bucket) {
        case PhaseBucket::Days30: return "30";
        case PhaseBucket::Days60: return "60";
        case PhaseBucket::Days90: return "90";
        case PhaseBucket::Beyond: return "beyond";
    }
    return "beyond";
}

std::optional<PhaseBucket> parse_phase(const json& value) noexcept {
    std::string text;
    if (value.is_number_integer()) text = std::to_string(value.get<long long>());
    else if (value.is_string()) text = value.get<std::string>();
    if (text == "30") return PhaseBucket::Days30;
    if (text == "60") return PhaseBucket::Days60;
    if (text == "90") return PhaseBucket::Days90;
    if (text == "beyond") return PhaseBucket::Beyond;
    return std::nullopt;
}

std::vector<Recommendation> recommendations_from(const json& doc) {
    const json& list = doc.is_array() ? doc : doc.at("recommendations");
    std::vector<Recommendation> out;
    for (const auto& item : list) {
        Recommendation r;
        r.action = item.at("action").get<std::string>();
        auto phase = parse_phase(item.at("phase_days"));
        if (!phase) throw Error(ErrorCode::SchemaViolation, "bad phase_days for '" + r.action + "'");
        r.phase = *phase;
        r.cost_range = item.value("cost_range", std::string{});
        r.rationale = item.value("rationale", std::string{});
        for (const auto& t : item.at("linked_risk_titles")) r.linked_risk_titles.push_back(t.get<std::string>());
        out.push_back(std::move(r));
    }
    return out;
}

json to_json(const Recommendation& rec) {
    json phase = rec.phase == PhaseBucket::Beyond ? json("beyond") : json(static_cast<int>(rec.phase));
    return json{{"action", rec.action},
                {"phase_days", phase},
                {"cost_range", rec.cost_range},
                {"linked_risk_titles", rec.linked_risk_titles},
                {"rationale", rec.rationale}};
}

std::vector<RoadmapPhase> summarize_roadmap(const json& doc, const std::vector<RiskItem>& risks) {
    auto recs = recommendations_from(doc);

    auto max_severity = [&](const Recommendation& rec) {
        int best = 0;
        for (const auto& title : rec.linked_risk_titles) {
            const std::string norm = normalize_title(title);
            for (const auto& r : risks) {
                if (normalize_title(r.title) == norm) best = std::max(best, r.severity().value);
            }
        }
        return best;
    };

    std::vector<RoadmapPhase> phases;
    for (PhaseBucket bucket : {PhaseBucket::Days30, PhaseBucket::Days60, PhaseBucket::Days90, PhaseBucket::Beyond}) {
        std::vector<std::pair<int, Recommendation>> items;
        for (const auto& rec : recs) {
            if (rec.phase == bucket) items.emplace_back(max_severity(rec), rec);
        }
        if (items.empty()) continue;
        std::stable_sort(items.begin(), items.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        RoadmapPhase phase{bucket, {}};
        for (auto& [sev, rec] : items) phase.items.push_back(std::move(rec));
        phases.push_back(std::move(phase));
    }
    return phases;
}

std::vector<SourcedCitation> collect_citations(const ContextSnapshot& snapshot, const Corpus& corpus) {
    std::vector<SourcedCitation> out;
    for (const auto& entry : snapshot.entries) {
        for (auto& c : corpus.verify_citations(canonical(entry.payload))) {
            out.push_back({entry.key, std::move(c)});
        }
    }
    return out;
}

AssessmentReport build_report(const ContextSnapshot& snapshot, std::vector<SourcedCitation> citations,
                              std::vector<ContradictionFlag> flags, RunMetadata metadata) {
    for (const auto& key : registered_entry_kinds()) {
        if (!snapshot.contains(key)) {
            throw Error(ErrorCode::IncompleteContext, "cannot render report: context lacks '" + key + "'");
        }
    }
    AssessmentReport report;
    report.exec_summary = snapshot.find("report")->payload.value("exec_summary", std::string{});
    report.profile_echo = snapshot.find("org_profile")->payload;
    report.risks = rank_risks(risks_from_register(snapshot.find("risk_register")->payload));
    report.compliance = compliance_rollup(snapshot.find("control_assessment")->payload);
    report.roadmap = summarize_roadmap(snapshot.find("recommendations")->payload, report.risks);
    report.citations = std::move(citations);
    report.contradiction_flags = std::move(flags);
    report.run_metadata = std::move(metadata);
    return report;
}

json to_json(const AssessmentReport& report) {
    json risks = json::array();
    for (const auto& r : report.risks) risks.push_back(to_json(r));
    json roadmap = json::array();
    for (const auto& phase : report.roadmap) {
        json items = json::array();
        for (const auto& rec : phase.items) items.push_back(to_json(rec));
        roadmap.push_back({{"phase", to_string(phase.bucket)}, {"items", std::move(items)}});
    }
    json citations = json::array();
    for (const auto& c : report.citations) {
        json j = to_json(c.citation);
        j["source"] = c.source;
        citations.push_back(std::move(j));
    }
    json flags = json::array();
    for (const auto& f : report.contradiction_flags) flags.push_back(to_json(f));
    const auto& m = report.run_metadata;
    return json{
        {"exec_summary", report.exec_summary},
        {"profile_echo", report.profile_echo},
        {"risks", std::move(risks)},
        {"compliance", to_json(report.compliance)},
        {"roadmap", std::move(roadmap)},
        {"citations", std::move(citations)},
        {"contradiction_flags", std::move(flags)},
        {"run_metadata",
         {{"run_id", m.run_id},
          {"model_id", m.model_id},
          {"mode", m.mode},
          {"seed", m.seed},
          {"window", m.window},
          {"wall_seconds", m.wall_seconds}}},
    };
}

namespace {

std::string cell(std::string text) {
    std::string out;
    for (char c : text) {
        if (c == '|') out += "\\|";
        else if (c == '\n' || c == '\r') out += ' ';
        else out.push_back(c);
    }
    return out;
}

std::string list_text(const json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number()) return value.dump();
    if (!value.is_array()) return "";
    std::string out;
    for (const auto& item : value) {
        if (!out.empty()) out += ", ";
        out += item.is_string() ? item.get<std::string>() : item.dump();
    }
    return out.empty() ? "none listed" : out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += sep;
        out += item;
    }
    return out;
}

std::string phase_heading(PhaseBucket bucket) {
    switch (bucket) {
        case PhaseBucket::Days30: return "Days 0–30";
        case PhaseBucket::Days60: return "Days 31–60";
        case PhaseBucket::Days90: return "Days 61–90";
        case PhaseBucket::Beyond: return "Beyond 90 days";
    }
    return "";
}

}  // namespace

std::string render_markdown(const AssessmentReport& report) {
    std::ostringstream md;
    const json& profile = report.profile_echo;
    const auto& meta = report.run_metadata;

    md << "# Cybersecurity Risk Assessment: " << profile.value("profile_id", std::string("unnamed")) << "\n\n";
    if (!meta.model_id.empty()) {
        md << "Model `" << meta.model_id << "`, mode `" << meta.mode << "`, seed " << meta.seed
           << ", context window " << meta.window << " tokens.\n\n";
    }

    md << "## Executive Summary\n\n" << report.exec_summary << "\n\n";

    md << "## Organization Profile\n\n| Field | Value |\n|---|---|\n";
    static const std::vector<std::pair<const char*, const char*>> kProfileRows = {
        {"industry", "Industry"},
        {"employee_count", "Employees"},
        {"regulatory_scope", "Regulatory scope"},
        {"systems", "Systems"},
        {"data_locations", "Data locations"},
        {"self_rated_maturity", "Self-rated maturity (1-10)"},
    };
    for (const auto& [field, label] : kProfileRows) {
        if (profile.contains(field)) md << "| " << label << " | " << cell(list_text(profile[field])) << " |\n";
    }
    md << "\n";
    if (profile.contains("ambiguities") && profile["ambiguities"].is_array() && !profile["ambiguities"].empty()) {
        md << "Flagged at intake for human confirmation:\n\n";
        for (const auto& a : profile["ambiguities"]) md << "- " << a.get<std::string>() << "\n";
        md << "\n";
    }

    md << "## Risk Register\n\n| # | Risk | Likelihood | Impact | Severity |\n|---|---|---|---|---|\n";
    for (std::size_t i = 0; i < report.risks.size(); ++i) {
        const auto& r = report.risks[i];
        const auto sev = r.severity();
        md << "| " << i + 1 << " | " << cell(r.title) << " | " << to_string(r.likelihood) << " | "
           << to_string(r.impact) << " | " << sev.value << " (" << to_string(sev.band) << ") |\n";
    }
    md << "\n";
    for (std::size_t i = 0; i < report.risks.size(); ++i) {
        const auto& r = report.risks[i];
        md << "### " << i + 1 << ". " << r.title << "\n\n" << r.reasoning << "\n\n";
        if (!r.linked_threat_titles.empty()) md << "- Threats: " << join(r.linked_threat_titles, "; ") << "\n";
        if (!r.linked_control_gaps.empty()) md << "- Control gaps: " << join(r.linked_control_gaps, "; ") << "\n";
        md << "\n";
    }

    md << "## NIST CSF Compliance\n\n| Function | Status |\n|---|---|\n";
    for (auto fn : kCsfFunctions) {
        const std::string name(fn);
        md << "| " << name << " | " << to_string(report.compliance.status.at(name)) << " |\n";
    }
    md << "\n";
    for (auto fn : kCsfFunctions) {
        const std::string name(fn);
        md << "**" << name << "**\n\n";
        for (const auto& e : report.compliance.evidence.at(name)) md << "- " << e << "\n";
        md << "\n";
    }

    md << "## Remediation Roadmap\n\n";
    if (report.roadmap.empty()) md << "No recommendations were produced.\n\n";
    for (const auto& phase : report.roadmap) {
        md << "### " << phase_heading(phase.bucket) << "\n\n";
        for (const auto& rec : phase.items) {
            md << "- **" << rec.action << "** (" << (rec.cost_range.empty() ? "cost not estimated" : rec.cost_range)
               << "). Addresses: " << join(rec.linked_risk_titles, "; ") << ".\n";
        }
        md << "\n";
    }

    md << "## Appendix A: Framework Citations\n\n";
    if (report.citations.empty()) {
        md << "No framework identifiers were cited.\n\n";
    } else {
        md << "| # | Citation | Framework | Found in | Status |\n|---|---|---|---|---|\n";
        for (std::size_t i = 0; i < report.citations.size(); ++i) {
            const auto& c = report.citations[i];
            md << "| " << i + 1 << " | `" << c.citation.raw << "` | " << to_string(c.citation.framework) << " | "
               << c.source << " | " << (c.citation.verified ? std::string("verified") : std::string(kUnverifiedMark))
               << " |\n";
        }
        md << "\n";
    }

    md << "## Appendix B: Consistency Flags\n\n";
    if (report.contradiction_flags.empty()) md << "No contradictions detected.\n";
    for (const auto& f : report.contradiction_flags) {
        md << "- `" << to_string(f.kind) << "`: \"" << f.risk_title << "\"";
        if (!f.recommendation.empty()) md << " (recommendation: " << f.recommendation << ")";
        md << ": " << f.detail << "\n";
    }
    return md.str();
}

std::string render_report(const ContextSnapshot& snapshot, const std::vector<SourcedCitation>& citations,
                          const std::vector<ContradictionFlag>& flags, const RunMetadata& metadata) {
    return render_markdown(build_report(snapshot, citations, flags, metadata));
}

}  // namespace riskforge

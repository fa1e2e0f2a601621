#include "riskforge/risk_model.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace riskforge {

std::string_view to_string(Ordinal o) noexcept {
    switch (o) {
        case Ordinal::Low: return "Low";
        case Ordinal::Medium: return "Medium";
        case Ordinal::High: return "High";
    }
    return "Low";
}

std::string_view to_string(Band b) noexcept {
    switch (b) {
        case Band::Low: return "low";
        case Band::Medium: return "medium";
        case Band::High: return "high";
    }
    return "low";
}

std::optional<Ordinal> parse_ordinal(std::string_view text) noexcept {
    std::string lower;
    for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "low") return Ordinal::Low;
    if (lower == "medium") return Ordinal::Medium;
    if (lower == "high") return Ordinal::High;
    return std::nullopt;
}

SeverityScore derive_severity(Ordinal likelihood, Ordinal impact) noexcept {
    SeverityScore s;
    s.value = static_cast<int>(likelihood) * static_cast<int>(impact);
    if (s.value >= 6) s.band = Band::High;
    else if (s.value >= 3) s.band = Band::Medium;
    else s.band = Band::Low;
    return s;
}

namespace {

std::vector<std::string> string_list(const json& doc, const char* field) {
    std::vector<std::string> out;
    if (!doc.contains(field) || !doc[field].is_array()) return out;
    for (const auto& item : doc[field]) {
        if (item.is_string()) out.push_back(item.get<std::string>());
    }
    return out;
}

Ordinal require_ordinal(const json& item, const char* field) {
    const std::string raw = item.value(field, std::string{});
    auto parsed = parse_ordinal(raw);
    if (!parsed) {
        throw Error(ErrorCode::SchemaViolation, std::string(field) + " must be low/medium/high, got '" + raw + "'");
    }
    return *parsed;
}

}  // namespace

std::vector<RiskItem> risks_from_register(const json& register_doc, const Corpus* corpus) {
    const json& list = register_doc.is_array() ? register_doc : register_doc.at("risks");
    std::vector<RiskItem> out;
    for (const auto& item : list) {
        RiskItem r;
        r.title = item.at("title").get<std::string>();
        r.likelihood = require_ordinal(item, "likelihood");
        r.impact = require_ordinal(item, "impact");
        r.reasoning = item.value("reasoning", std::string{});
        r.linked_threat_titles = string_list(item, "linked_threat_titles");
        r.linked_control_gaps = string_list(item, "linked_control_gaps");
        if (corpus) r.citations = corpus->verify_citations(r.reasoning);
        out.push_back(std::move(r));
    }
    return out;
}

json to_json(const RiskItem& item) {
    const auto sev = item.severity();
    json citations = json::array();
    for (const auto& c : item.citations) citations.push_back(to_json(c));
    return json{
        {"title", item.title},
        {"likelihood", to_string(item.likelihood)},
        {"impact", to_string(item.impact)},
        {"severity", sev.value},
        {"band", to_string(sev.band)},
        {"reasoning", item.reasoning},
        {"linked_threat_titles", item.linked_threat_titles},
        {"linked_control_gaps", item.linked_control_gaps},
        {"citations", std::move(citations)},
    };
}

std::vector<RiskItem> rank_risks(std::vector<RiskItem> risks) {
    std::stable_sort(risks.begin(), risks.end(), [](const RiskItem& a, const RiskItem& b) {
        const int sa = a.severity().value;
        const int sb = b.severity().value;
        if (sa != sb) return sa > sb;
        if (a.impact != b.impact) return a.impact > b.impact;
        return a.title < b.title;
    });
    return risks;
}

std::string normalize_title(std::string_view title) {
    std::string out;
    bool pending_space = false;
    for (char c : title) {
        const auto uc = static_cast<unsigned char>(c);
        // Non-ASCII bytes are kept as-is so UTF-8 sequences survive.
        const bool word_char = std::isalnum(uc) || uc >= 0x80;
        if (!word_char) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(uc)));
    }
    return out;
}

std::string_view to_string(ComplianceStatus s) noexcept {
    switch (s) {
        case ComplianceStatus::Compliant: return "Compliant";
        case ComplianceStatus::PartiallyCompliant: return "Partially Compliant";
        case ComplianceStatus::NotCompliant: return "Not Compliant";
    }
    return "Not Compliant";
}

json to_json(const ComplianceRollup& rollup) {
    json out = json::object();
    for (auto fn : kCsfFunctions) {
        const std::string name(fn);
        out[name] = {{"status", to_string(rollup.status.at(name))}, {"evidence", rollup.evidence.at(name)}};
    }
    return out;
}

ComplianceRollup compliance_rollup(const json& control_assessment) {
    if (!control_assessment.contains("functions") || !control_assessment["functions"].is_object()) {
        throw Error(ErrorCode::MissingFunction, "control assessment has no 'functions' object");
    }
    const json& functions = control_assessment["functions"];
    ComplianceRollup rollup;
    for (auto fn : kCsfFunctions) {
        const std::string name(fn);
        if (!functions.contains(name) || !functions[name].is_array()) {
            throw Error(ErrorCode::MissingFunction, "control assessment lacks CSF function '" + name + "'");
        }
        std::size_t gaps = 0;
        std::vector<std::string> evidence;
        for (const auto& finding : functions[name]) {
            if (finding.value("status", std::string{}) == "gap") ++gaps;
            evidence.push_back(finding.value("finding", std::string{}));
        }
        const std::size_t total = evidence.size();
        ComplianceStatus status;
        if (gaps == total) status = ComplianceStatus::NotCompliant;
        else if (gaps == 0) status = ComplianceStatus::Compliant;
        else status = ComplianceStatus::PartiallyCompliant;
        rollup.status[name] = status;
        rollup.evidence[name] = std::move(evidence);
    }
    return rollup;
}

std::string_view to_string(ContradictionKind kind) noexcept {
    return kind == ContradictionKind::UnaddressedHighRisk ? "unaddressed_high_risk" : "dangling_reference";
}

json to_json(const ContradictionFlag& flag) {
    return json{{"kind", to_string(flag.kind)},
                {"risk_title", flag.risk_title},
                {"recommendation", flag.recommendation},
                {"detail", flag.detail}};
}

std::vector<ContradictionFlag> check_contradictions(const std::vector<RiskItem>& risks,
                                                    const json& recommendations) {
    const json& recs = recommendations.is_array() ? recommendations : recommendations.at("recommendations");

    std::set<std::string> register_titles;
    for (const auto& r : risks) register_titles.insert(normalize_title(r.title));

    std::set<std::string> linked;
    std::vector<ContradictionFlag> flags;
    for (const auto& rec : recs) {
        const std::string action = rec.value("action", std::string{});
        for (const auto& title : string_list(rec, "linked_risk_titles")) {
            const std::string norm = normalize_title(title);
            linked.insert(norm);
            if (!register_titles.count(norm)) {
                flags.push_back({ContradictionKind::DanglingReference, title, action,
                                 "recommendation references a risk that is not in the register"});
            }
        }
    }

    std::vector<ContradictionFlag> unaddressed;
    for (const auto& r : risks) {
        if (r.severity().band != Band::High || linked.count(normalize_title(r.title))) continue;
        unaddressed.push_back({ContradictionKind::UnaddressedHighRisk, r.title, "",
                               "rated high but no recommendation addresses it"});
    }
    unaddressed.insert(unaddressed.end(), flags.begin(), flags.end());
    return unaddressed;
}

}  // namespace riskforge

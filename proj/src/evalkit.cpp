#include "riskforge/evalkit.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace riskforge {

namespace fs = std::filesystem;

namespace {

json read_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::InvalidArgument, path.string() + ": invalid JSON");
    return doc;
}

PractitionerAnnotation annotation_from(const json& item) {
    PractitionerAnnotation a;
    try {
        a.assessor_id = item.at("assessor_id").get<std::string>();
        a.risk_title = item.at("risk_title").get<std::string>();
        const auto sev = parse_ordinal(item.at("severity").get<std::string>());
        if (!sev) throw Error(ErrorCode::InvalidArgument, "bad severity for '" + a.risk_title + "'");
        a.severity = *sev;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("bad annotation: ") + e.what());
    }
    return a;
}

void check_unique(const std::vector<PractitionerAnnotation>& list) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& a : list) {
        if (!seen.emplace(a.assessor_id, normalize_title(a.risk_title)).second) {
            throw Error(ErrorCode::InvalidArgument,
                        "duplicate annotation for assessor " + a.assessor_id + ": '" + a.risk_title + "'");
        }
    }
}

Ordinal band_label(const RiskItem& r) {
    switch (r.severity().band) {
        case Band::High: return Ordinal::High;
        case Band::Medium: return Ordinal::Medium;
        case Band::Low: return Ordinal::Low;
    }
    return Ordinal::Low;
}

std::vector<std::string> assessors_in_order(const std::vector<PractitionerAnnotation>& annotations) {
    std::vector<std::string> out;
    for (const auto& a : annotations) {
        if (std::find(out.begin(), out.end(), a.assessor_id) == out.end()) out.push_back(a.assessor_id);
    }
    return out;
}

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace

std::vector<PractitionerAnnotation> annotations_from_json(const json& array) {
    std::vector<PractitionerAnnotation> out;
    for (const auto& item : array) out.push_back(annotation_from(item));
    check_unique(out);
    return out;
}

std::vector<PractitionerAnnotation> load_annotations(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path.string());
    std::vector<PractitionerAnnotation> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#' || line.compare(first, 2, "//") == 0) continue;
        json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded()) {
            throw Error(ErrorCode::InvalidArgument, path.string() + ":" + std::to_string(line_no) + ": invalid JSON");
        }
        out.push_back(annotation_from(doc));
    }
    check_unique(out);
    return out;
}

void AliasMap::add(std::string_view system_title, std::string_view practitioner_title) {
    const std::string sys = normalize_title(system_title);
    const std::string prac = normalize_title(practitioner_title);
    auto [it, inserted] = to_system_.emplace(prac, sys);
    if (!inserted && it->second != sys) {
        throw Error(ErrorCode::InvalidArgument, "alias '" + std::string(practitioner_title) +
                                                    "' maps to two system titles: '" + it->second + "' and '" + sys +
                                                    "'");
    }
}

bool AliasMap::matches(std::string_view system_title, std::string_view practitioner_title) const {
    const std::string sys = normalize_title(system_title);
    const std::string prac = normalize_title(practitioner_title);
    if (sys == prac) return true;
    if (auto it = to_system_.find(prac); it != to_system_.end() && it->second == sys) return true;
    if (auto it = to_system_.find(sys); it != to_system_.end() && it->second == prac) return true;
    return false;
}

AliasMap AliasMap::from_json(const json& pairs) {
    if (!pairs.is_array()) throw Error(ErrorCode::InvalidArgument, "alias file must be a JSON list of pairs");
    AliasMap map;
    for (const auto& p : pairs) {
        if (p.is_array() && p.size() == 2 && p[0].is_string() && p[1].is_string()) {
            map.add(p[0].get<std::string>(), p[1].get<std::string>());
        } else if (p.is_object() && p.contains("system") && p.contains("practitioner")) {
            map.add(p["system"].get<std::string>(), p["practitioner"].get<std::string>());
        } else {
            throw Error(ErrorCode::InvalidArgument, "alias entry must be [system, practitioner]: " + p.dump());
        }
    }
    return map;
}

AliasMap AliasMap::load(const fs::path& path) { return from_json(read_json_file(path)); }

std::string Ratio::display() const { return defined() ? fixed3(value()) : "n/a"; }

json Ratio::to_json() const {
    if (!defined()) return "n/a";
    return json::parse(fixed3(value()));
}

RunSelector RunSelector::parse(std::string_view text) {
    RunSelector sel;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        const auto part = text.substr(pos, comma - pos);
        pos = comma + 1;
        if (part.empty()) continue;
        const auto eq = part.find('=');
        if (eq == std::string_view::npos || eq == 0 || eq + 1 == part.size()) {
            throw Error(ErrorCode::InvalidArgument, "selector term must be key=value: '" + std::string(part) + "'");
        }
        const auto key = part.substr(0, eq);
        const std::string value(part.substr(eq + 1));
        if (key == "model") {
            sel.model = value;
        } else if (key == "profile") {
            sel.profile = value;
        } else if (key == "mode") {
            sel.mode = parse_run_mode(value);
            if (!sel.mode) throw Error(ErrorCode::InvalidArgument, "unknown mode in selector: " + value);
        } else {
            throw Error(ErrorCode::InvalidArgument, "unknown selector key: " + std::string(key));
        }
    }
    return sel;
}

bool RunSelector::accepts(const RunRecord& r) const {
    return (!model || *model == r.model_id) && (!mode || *mode == r.mode) && (!profile || *profile == r.profile_id);
}

Ratio severity_agreement(const std::vector<RiskItem>& system, const std::vector<PractitionerAnnotation>& annotations,
                         const AliasMap& aliases) {
    Ratio out;
    const auto assessors = assessors_in_order(annotations);
    for (const auto& risk : system) {
        const Ordinal label = band_label(risk);
        for (const auto& assessor : assessors) {
            for (const auto& a : annotations) {
                if (a.assessor_id != assessor || !aliases.matches(risk.title, a.risk_title)) continue;
                ++out.total;
                if (a.severity == label) ++out.matched;
                break;
            }
        }
    }
    return out;
}

Ratio coverage(const std::vector<RiskItem>& system, const std::vector<PractitionerAnnotation>& annotations,
               const AliasMap& aliases) {
    std::vector<std::string> pooled;
    std::set<std::string> seen;
    for (const auto& a : annotations) {
        if (seen.insert(normalize_title(a.risk_title)).second) pooled.push_back(a.risk_title);
    }
    Ratio out;
    out.total = pooled.size();
    for (const auto& title : pooled) {
        for (const auto& risk : system) {
            if (aliases.matches(risk.title, title)) {
                ++out.matched;
                break;
            }
        }
    }
    return out;
}

Ratio structural_stability(const std::vector<RunRecord>& ledger, const RunSelector& selector) {
    Ratio out;
    for (const auto& r : ledger) {
        if (!selector.accepts(r)) continue;
        ++out.total;
        if (r.completed && r.structural_ok) ++out.matched;
    }
    return out;
}

std::size_t title_variability(const std::vector<RunRecord>& ledger, std::string_view profile_id,
                              std::string_view model_id, std::optional<RunMode> mode) {
    std::set<std::string> titles;
    std::size_t runs = 0;
    for (const auto& r : ledger) {
        if (r.profile_id != profile_id || r.model_id != model_id || !r.completed) continue;
        if (mode && r.mode != *mode) continue;
        ++runs;
        for (const auto& t : r.unique_threat_titles) titles.insert(normalize_title(t));
    }
    if (runs == 0) {
        throw Error(ErrorCode::NoRunsSelected,
                    "no completed runs for profile " + std::string(profile_id) + ", model " + std::string(model_id));
    }
    return titles.size();
}

LatencyStats latency_stats(const std::vector<RunRecord>& ledger, const RunSelector& selector) {
    LatencyStats s;
    double sum = 0.0;
    for (const auto& r : ledger) {
        if (!selector.accepts(r)) continue;
        if (s.runs == 0) {
            s.min_s = s.max_s = r.wall_seconds;
        } else {
            s.min_s = std::min(s.min_s, r.wall_seconds);
            s.max_s = std::max(s.max_s, r.wall_seconds);
        }
        sum += r.wall_seconds;
        ++s.runs;
    }
    if (s.runs == 0) throw Error(ErrorCode::NoRunsSelected, "latency: selector matched no runs");
    s.mean_s = sum / static_cast<double>(s.runs);
    return s;
}

json MetricsReport::to_json() const {
    json out = json::object();
    auto ratio_json = [](const Ratio& r, const char* total_name) {
        return json{{"matched", r.matched}, {total_name, r.total}, {"ratio", r.to_json()}};
    };
    if (agreement) out["agreement"] = ratio_json(*agreement, "total_pairs");
    if (coverage) out["coverage"] = ratio_json(*coverage, "pooled");
    if (stability) {
        out["stability"] = stability->to_json();
        out["runs"] = {{"selected", selected_runs}, {"completed", completed_runs}, {"structural_ok", stability->matched}};
        json var = json::array();
        for (const auto& v : variability) {
            var.push_back({{"profile_id", v.profile_id},
                           {"model_id", v.model_id},
                           {"mode", to_string(v.mode)},
                           {"runs", v.runs},
                           {"unique_titles", v.unique_titles}});
        }
        out["variability"] = std::move(var);
        json lat = json::array();
        for (const auto& l : latency) {
            lat.push_back({{"model_id", l.model_id},
                           {"mode", to_string(l.mode)},
                           {"runs", l.stats.runs},
                           {"mean_s", l.stats.mean_s},
                           {"min_s", l.stats.min_s},
                           {"max_s", l.stats.max_s}});
        }
        out["latency"] = std::move(lat);
    }
    return out;
}

std::string MetricsReport::to_table() const {
    std::ostringstream t;
    char buf[256];
    t << "metric                 matched / total   ratio\n";
    if (agreement) {
        std::snprintf(buf, sizeof buf, "severity agreement     %7zu / %-7zu %s\n", agreement->matched, agreement->total,
                      agreement->display().c_str());
        t << buf;
    }
    if (coverage) {
        std::snprintf(buf, sizeof buf, "coverage               %7zu / %-7zu %s\n", coverage->matched, coverage->total,
                      coverage->display().c_str());
        t << buf;
    }
    if (stability) {
        std::snprintf(buf, sizeof buf, "structural stability   %7zu / %-7zu %s\n", stability->matched, stability->total,
                      stability->display().c_str());
        t << buf;
        std::snprintf(buf, sizeof buf, "completion             %7zu / %-7zu %s\n", completed_runs, selected_runs,
                      Ratio{completed_runs, selected_runs}.display().c_str());
        t << buf;
    }
    if (!variability.empty()) {
        t << "\nprofile          model        mode          runs  unique threat titles\n";
        for (const auto& v : variability) {
            std::snprintf(buf, sizeof buf, "%-16s %-12s %-13s %4zu  %zu\n", v.profile_id.c_str(), v.model_id.c_str(),
                          std::string(to_string(v.mode)).c_str(), v.runs, v.unique_titles);
            t << buf;
        }
    }
    if (!latency.empty()) {
        t << "\nmodel        mode          runs    mean_s     min_s     max_s\n";
        for (const auto& l : latency) {
            std::snprintf(buf, sizeof buf, "%-12s %-13s %4zu %9.3f %9.3f %9.3f\n", l.model_id.c_str(),
                          std::string(to_string(l.mode)).c_str(), l.stats.runs, l.stats.mean_s, l.stats.min_s,
                          l.stats.max_s);
            t << buf;
        }
    }
    return t.str();
}

MetricsReport evaluate(const EvalInputs& in) {
    MetricsReport report;

    if (in.annotations) {
        const auto annotations = load_annotations(*in.annotations);
        const AliasMap aliases = in.aliases ? AliasMap::load(*in.aliases) : AliasMap{};
        if (!in.system_register) {
            throw Error(ErrorCode::InvalidArgument, "annotations given without a system risk register");
        }
        json doc = read_json_file(*in.system_register);
        // Accept a bare register or a rendered report.json.
        const auto system = risks_from_register(doc);
        report.agreement = severity_agreement(system, annotations, aliases);
        report.coverage = coverage(system, annotations, aliases);
    }

    if (in.ledger) {
        const auto ledger = read_ledger(*in.ledger);
        report.stability = structural_stability(ledger, in.selector);
        report.selected_runs = report.stability->total;

        std::vector<std::tuple<std::string, std::string, RunMode>> cells;
        std::vector<std::pair<std::string, RunMode>> groups;
        for (const auto& r : ledger) {
            if (!in.selector.accepts(r)) continue;
            if (r.completed) ++report.completed_runs;
            std::tuple cell{r.profile_id, r.model_id, r.mode};
            if (std::find(cells.begin(), cells.end(), cell) == cells.end()) cells.push_back(cell);
            std::pair group{r.model_id, r.mode};
            if (std::find(groups.begin(), groups.end(), group) == groups.end()) groups.push_back(group);
        }
        std::sort(cells.begin(), cells.end());
        std::sort(groups.begin(), groups.end());
        for (const auto& [profile, model, mode] : cells) {
            VariabilityRow row{profile, model, mode, 0, 0};
            for (const auto& r : ledger) {
                if (r.profile_id == profile && r.model_id == model && r.mode == mode && r.completed) ++row.runs;
            }
            if (row.runs == 0) continue;
            row.unique_titles = title_variability(ledger, profile, model, mode);
            report.variability.push_back(std::move(row));
        }
        for (const auto& [model, mode] : groups) {
            RunSelector sel = in.selector;
            sel.model = model;
            sel.mode = mode;
            report.latency.push_back({model, mode, latency_stats(ledger, sel)});
        }
    }
    return report;
}

}  // namespace riskforge

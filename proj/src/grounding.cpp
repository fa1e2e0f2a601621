#include "riskforge/grounding.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

namespace riskforge {

namespace {

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string lookup_key(Framework framework, std::string_view identifier) {
    return std::string(to_string(framework)) + ":" + std::string(identifier);
}

std::size_t digit_run(std::string_view text, std::size_t pos) {
    std::size_t n = 0;
    while (pos + n < text.size() && is_digit(text[pos + n])) ++n;
    return n;
}

// Length of a NIST CSF identifier starting at pos, or 0.
std::size_t match_nist(std::string_view text, std::size_t pos) {
    std::size_t i = pos;
    if (i + 2 > text.size() || !is_upper(text[i]) || !is_upper(text[i + 1])) return 0;
    i += 2;
    if (i >= text.size() || text[i] != '.') return 0;
    ++i;
    std::size_t letters = 0;
    while (i + letters < text.size() && is_upper(text[i + letters]) && letters < 3) ++letters;
    if (letters < 2) return 0;
    i += letters;
    if (i >= text.size() || text[i] != '-') return 0;
    ++i;
    const std::size_t digits = digit_run(text, i);
    if (digits < 1 || digits > 2) return 0;
    return i + digits - pos;
}

constexpr std::string_view kCisPrefix = "CIS Control ";

// Length of a CIS reference starting at pos and the offset of its number.
std::size_t match_cis(std::string_view text, std::size_t pos) {
    if (text.substr(pos, kCisPrefix.size()) != kCisPrefix) return 0;
    std::size_t i = pos + kCisPrefix.size();
    const std::size_t major = digit_run(text, i);
    if (major < 1 || major > 2) return 0;
    i += major;
    if (i + 1 < text.size() && text[i] == '.') {
        const std::size_t minor = digit_run(text, i + 1);
        if (minor >= 1 && minor <= 2) return i + 1 + minor - pos;
    }
    return i - pos;
}

}  // namespace

std::string_view to_string(Framework framework) noexcept {
    return framework == Framework::Cis ? "cis" : "nist_csf";
}

std::optional<Framework> parse_framework(std::string_view name) noexcept {
    if (name == "nist_csf") return Framework::NistCsf;
    if (name == "cis") return Framework::Cis;
    return std::nullopt;
}

std::string FrameworkExcerpt::citation_label() const {
    return framework == Framework::Cis ? std::string(kCisPrefix) + identifier : identifier;
}

json to_json(const FrameworkExcerpt& excerpt) {
    return json{{"framework", to_string(excerpt.framework)},
                {"identifier", excerpt.identifier},
                {"title", excerpt.title},
                {"body", excerpt.body}};
}

json to_json(const FrameworkCitation& citation) {
    return json{{"raw", citation.raw},
                {"framework", to_string(citation.framework)},
                {"identifier", citation.identifier},
                {"span", {citation.begin, citation.end}},
                {"verified", citation.verified}};
}

FrameworkCitation citation_from_json(const json& doc) {
    FrameworkCitation c;
    c.raw = doc.at("raw").get<std::string>();
    c.framework = parse_framework(doc.at("framework").get<std::string>()).value_or(Framework::NistCsf);
    c.identifier = doc.at("identifier").get<std::string>();
    c.begin = doc.at("span").at(0).get<std::size_t>();
    c.end = doc.at("span").at(1).get<std::size_t>();
    c.verified = doc.at("verified").get<bool>();
    return c;
}

std::vector<IdentifierMatch> parse_identifier(std::string_view text) {
    std::vector<IdentifierMatch> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        if (pos > 0 && is_alnum(text[pos - 1])) {
            ++pos;
            continue;
        }
        std::size_t len = 0;
        IdentifierMatch m;
        if ((len = match_nist(text, pos)) != 0) {
            m.framework = Framework::NistCsf;
            m.identifier = std::string(text.substr(pos, len));
        } else if ((len = match_cis(text, pos)) != 0) {
            m.framework = Framework::Cis;
            m.identifier = std::string(text.substr(pos + kCisPrefix.size(), len - kCisPrefix.size()));
        }
        if (len == 0 || (pos + len < text.size() && is_digit(text[pos + len]))) {
            ++pos;
            continue;
        }
        m.begin = pos;
        m.end = pos + len;
        out.push_back(std::move(m));
        pos += len;
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (current.empty()) return;
        if (std::find(kStopwords.begin(), kStopwords.end(), current) == kStopwords.end()) {
            tokens.push_back(current);
        }
        current.clear();
    };
    for (char c : text) {
        if (is_alnum(c)) {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

Corpus Corpus::ingest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MalformedCorpus, "cannot open corpus " + path.string());

    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.string() + ": line " + std::to_string(line_no) + ": ";

        json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) {
            throw Error(ErrorCode::MalformedCorpus, where + "not a JSON object");
        }
        for (const char* field : {"framework", "identifier", "title", "body"}) {
            if (!doc.contains(field) || !doc[field].is_string()) {
                throw Error(ErrorCode::MalformedCorpus, where + "missing string field '" + field + "'");
            }
        }
        auto framework = parse_framework(doc["framework"].get<std::string>());
        if (!framework) {
            throw Error(ErrorCode::MalformedCorpus,
                        where + "unknown framework '" + doc["framework"].get<std::string>() + "'");
        }
        FrameworkExcerpt excerpt{*framework, doc["identifier"].get<std::string>(),
                                 doc["title"].get<std::string>(), doc["body"].get<std::string>()};
        corpus.add(std::move(excerpt), line_no);
    }
    return corpus;
}

Corpus Corpus::from_excerpts(std::vector<FrameworkExcerpt> excerpts) {
    Corpus corpus;
    std::size_t n = 0;
    for (auto& e : excerpts) corpus.add(std::move(e), ++n);
    return corpus;
}

void Corpus::add(FrameworkExcerpt excerpt, std::size_t line_no) {
    const std::string label = excerpt.citation_label();
    const auto parsed = parse_identifier(label);
    if (parsed.size() != 1 || parsed[0].begin != 0 || parsed[0].end != label.size() ||
        parsed[0].framework != excerpt.framework) {
        throw Error(ErrorCode::MalformedCorpus, "line " + std::to_string(line_no) + ": identifier '" +
                                                    excerpt.identifier + "' is not a valid " +
                                                    std::string(to_string(excerpt.framework)) + " identifier");
    }
    const std::string key = lookup_key(excerpt.framework, excerpt.identifier);
    if (by_id_.count(key)) {
        throw Error(ErrorCode::DuplicateIdentifier,
                    "line " + std::to_string(line_no) + ": duplicate identifier '" + excerpt.identifier + "'");
    }

    const std::size_t index = excerpts_.size();
    std::set<std::string> distinct;
    for (auto& tok : tokenize(excerpt.title + " " + excerpt.body)) distinct.insert(std::move(tok));
    for (const auto& tok : distinct) postings_[tok].push_back(index);

    by_id_.emplace(key, index);
    excerpts_.push_back(std::move(excerpt));
}

std::map<Framework, std::size_t> Corpus::counts() const {
    std::map<Framework, std::size_t> out{{Framework::NistCsf, 0}, {Framework::Cis, 0}};
    for (const auto& e : excerpts_) ++out[e.framework];
    return out;
}

const FrameworkExcerpt* Corpus::find(Framework framework, std::string_view identifier) const {
    auto it = by_id_.find(lookup_key(framework, identifier));
    return it == by_id_.end() ? nullptr : &excerpts_[it->second];
}

std::vector<FrameworkExcerpt> Corpus::retrieve(std::string_view query, std::size_t k) const {
    std::set<std::string> query_tokens;
    for (auto& tok : tokenize(query)) query_tokens.insert(std::move(tok));

    std::unordered_map<std::size_t, std::size_t> scores;
    for (const auto& tok : query_tokens) {
        auto it = postings_.find(tok);
        if (it == postings_.end()) continue;
        for (std::size_t doc : it->second) ++scores[doc];
    }

    std::vector<std::pair<std::size_t, std::size_t>> ranked(scores.begin(), scores.end());
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return excerpts_[a.first].identifier < excerpts_[b.first].identifier;
    });

    std::vector<FrameworkExcerpt> out;
    for (std::size_t i = 0; i < ranked.size() && out.size() < k; ++i) {
        out.push_back(excerpts_[ranked[i].first]);
    }
    return out;
}

std::vector<FrameworkCitation> Corpus::verify_citations(std::string_view text) const {
    std::vector<FrameworkCitation> out;
    for (auto& m : parse_identifier(text)) {
        FrameworkCitation c;
        c.raw = std::string(text.substr(m.begin, m.end - m.begin));
        c.framework = m.framework;
        c.verified = find(m.framework, m.identifier) != nullptr;
        c.identifier = std::move(m.identifier);
        c.begin = m.begin;
        c.end = m.end;
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace riskforge

#pragma once

#include "riskforge/common.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace riskforge {

enum class Framework { NistCsf, Cis };

std::string_view to_string(Framework framework) noexcept;
std::optional<Framework> parse_framework(std::string_view name) noexcept;

struct FrameworkExcerpt {
    Framework framework = Framework::NistCsf;
    std::string identifier;  // canonical: "PR.AC-1" or "5.2"
    std::string title;
    std::string body;

    // How the identifier is written in prose: "PR.AC-1" or "CIS Control 5.2".
    std::string citation_label() const;
};

struct IdentifierMatch {
    Framework framework = Framework::NistCsf;
    std::string identifier;
    std::size_t begin = 0;  // byte offsets into the scanned text, [begin, end)
    std::size_t end = 0;
};

struct FrameworkCitation {
    std::string raw;
    Framework framework = Framework::NistCsf;
    std::string identifier;
    std::size_t begin = 0;
    std::size_t end = 0;
    bool verified = false;
};

json to_json(const FrameworkExcerpt& excerpt);
json to_json(const FrameworkCitation& citation);
FrameworkCitation citation_from_json(const json& doc);

/// Finds NIST CSF identifiers (`PR.AC-1`, `GV.OC-01`) and CIS references
/// (`CIS Control 5.2`) left to right without overlap. A match may not start
/// right after a letter or digit and may not be followed by a digit.
std::vector<IdentifierMatch> parse_identifier(std::string_view text);

inline constexpr std::array<std::string_view, 30> kStopwords = {
    "a",    "an",   "and",  "are",  "as",   "at",   "be",    "by",    "for",  "from",
    "has",  "have", "in",   "is",   "it",   "its",  "of",    "on",    "or",   "that",
    "the",  "their", "this", "to",  "was",  "were", "will",  "with",  "we",   "our",
};

// Splits on non-alphanumerics, lowercases ASCII, drops stopwords. Duplicates kept.
std::vector<std::string> tokenize(std::string_view text);

/// Immutable framework knowledge base with exact-identifier lookup and an
/// inverted index for keyword-overlap retrieval.
class Corpus {
public:
    Corpus() = default;

    // JSON Lines: {"framework","identifier","title","body"} per line. Blank
    // lines are skipped.
    static Corpus ingest(const std::filesystem::path& path);
    static Corpus from_excerpts(std::vector<FrameworkExcerpt> excerpts);

    std::size_t size() const noexcept { return excerpts_.size(); }
    const std::vector<FrameworkExcerpt>& excerpts() const noexcept { return excerpts_; }
    std::map<Framework, std::size_t> counts() const;

    const FrameworkExcerpt* find(Framework framework, std::string_view identifier) const;

    // Top-k by count of shared distinct tokens over title + body; ties by
    // identifier ascending; zero-score excerpts never returned.
    std::vector<FrameworkExcerpt> retrieve(std::string_view query, std::size_t k) const;

    std::vector<FrameworkCitation> verify_citations(std::string_view text) const;

private:
    void add(FrameworkExcerpt excerpt, std::size_t line_no);

    std::vector<FrameworkExcerpt> excerpts_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::unordered_map<std::string, std::vector<std::size_t>> postings_;
};

}  // namespace riskforge

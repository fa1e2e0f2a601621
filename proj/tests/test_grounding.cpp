#include "riskforge/grounding.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>
#include <regex>
#include <set>

using namespace riskforge;
using rftest::TempDir;

namespace {

// Oracle: identifier grammar as regexes, tried at every position.
std::vector<IdentifierMatch> naive_scan(const std::string& text) {
    static const std::regex nist(R"([A-Z]{2}\.[A-Z]{2,3}-[0-9]{1,2}(?![0-9]))");
    static const std::regex cis(R"(CIS Control ([0-9]{1,2}(?:\.[0-9]{1,2})?)(?![0-9]))");
    std::vector<IdentifierMatch> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const bool boundary = i == 0 || !std::isalnum(static_cast<unsigned char>(text[i - 1]));
        std::smatch m;
        const auto begin = text.cbegin() + static_cast<std::ptrdiff_t>(i);
        if (boundary && std::regex_search(begin, text.cend(), m, nist, std::regex_constants::match_continuous)) {
            out.push_back({Framework::NistCsf, m.str(0), i, i + m.length(0)});
            i += m.length(0);
        } else if (boundary &&
                   std::regex_search(begin, text.cend(), m, cis, std::regex_constants::match_continuous)) {
            out.push_back({Framework::Cis, m.str(1), i, i + m.length(0)});
            i += m.length(0);
        } else {
            ++i;
        }
    }
    return out;
}

std::string random_text(std::mt19937& rng) {
    static const std::vector<std::string> pieces = {
        "PR", "ID", "DE", "GV", "AC", "AMX", "OC", ".", "-", "1", "2", "12", "123", "0", " ", " ", "  ",
        "a", "x", "Z", "CIS Control ", "CIS Control", "5", ".", "9", "(", ")", ",", "\n", "PR.AC-", "ID.AM-",
        "CIS Control 1", "RS.CO-01", "é"};
    std::string s;
    const int n = std::uniform_int_distribution<int>(0, 40)(rng);
    for (int i = 0; i < n; ++i) s += pieces[std::uniform_int_distribution<std::size_t>(0, pieces.size() - 1)(rng)];
    return s;
}

std::string random_nist(std::mt19937& rng) {
    auto up = [&] { return static_cast<char>('A' + std::uniform_int_distribution<int>(0, 5)(rng)); };
    std::string id;
    id += up();
    id += up();
    id += '.';
    id += up();
    id += up();
    if (rng() % 3 == 0) id += up();
    id += '-';
    id += std::to_string(std::uniform_int_distribution<int>(1, 12)(rng));
    return id;
}

std::string random_cis(std::mt19937& rng) {
    std::string id = std::to_string(std::uniform_int_distribution<int>(1, 18)(rng));
    if (rng() % 2) id += "." + std::to_string(std::uniform_int_distribution<int>(1, 15)(rng));
    return id;
}

}  // namespace

TEST_CASE("parse_identifier examples") {
    auto two = parse_identifier("implement PR.AC-1 and ID.AM-2");
    REQUIRE(two.size() == 2);
    CHECK(two[0].identifier == "PR.AC-1");
    CHECK(two[0].framework == Framework::NistCsf);
    CHECK(two[0].begin == 10);
    CHECK(two[0].end == 17);
    CHECK(two[1].identifier == "ID.AM-2");

    CHECK(parse_identifier("the firewall policy").empty());

    auto cis = parse_identifier("see CIS Control 5.2 for accounts");
    REQUIRE(cis.size() == 1);
    CHECK(cis[0].framework == Framework::Cis);
    CHECK(cis[0].identifier == "5.2");
    CHECK(cis[0].begin == 4);
    CHECK(cis[0].end == 19);
}

TEST_CASE("parse_identifier edge cases") {
    CHECK(parse_identifier("GV.OC-01")[0].identifier == "GV.OC-01");
    CHECK(parse_identifier("PR.AC-123").empty());
    CHECK(parse_identifier("XPR.AC-1").empty());
    CHECK(parse_identifier("PR.A-1").empty());
    CHECK(parse_identifier("pr.ac-1").empty());
    CHECK(parse_identifier("CIS Control 18").at(0).identifier == "18");
    CHECK(parse_identifier("CIS Control 5.").at(0).identifier == "5");
    CHECK(parse_identifier("(PR.AC-1),ID.AM-2.").size() == 2);
}

TEST_CASE("property: parse_identifier agrees with the naive regex scanner") {
    std::mt19937 rng(2024);
    for (int i = 0; i < 2000; ++i) {
        const std::string text = random_text(rng);
        const auto got = parse_identifier(text);
        const auto want = naive_scan(text);
        REQUIRE_MESSAGE(got.size() == want.size(), text);
        for (std::size_t j = 0; j < got.size(); ++j) {
            CHECK(got[j].framework == want[j].framework);
            CHECK(got[j].identifier == want[j].identifier);
            CHECK(got[j].begin == want[j].begin);
            CHECK(got[j].end == want[j].end);
            if (j > 0) CHECK(got[j - 1].end <= got[j].begin);
        }
    }
}

TEST_CASE("ingest bundled corpus") {
    const auto path = rftest::data_dir() / "corpus" / "csf_mini.jsonl";
    std::size_t lines = 0;
    std::istringstream in(rftest::read_file(path));
    for (std::string l; std::getline(in, l);) lines += !l.empty();
    auto corpus = Corpus::ingest(path);
    CHECK(corpus.size() == lines);
    auto counts = corpus.counts();
    CHECK(counts[Framework::NistCsf] + counts[Framework::Cis] == lines);
    for (const auto& e : corpus.excerpts()) {
        auto parsed = parse_identifier(e.citation_label());
        REQUIRE(parsed.size() == 1);
        CHECK(parsed[0].identifier == e.identifier);
        CHECK(parsed[0].framework == e.framework);
    }
}

TEST_CASE("ingest errors") {
    TempDir dir;
    rftest::write_file(dir / "empty.jsonl", "");
    CHECK(Corpus::ingest(dir / "empty.jsonl").size() == 0);

    const std::string line =
        R"({"framework": "nist_csf", "identifier": "PR.AC-1", "title": "t", "body": "b"})";
    rftest::write_file(dir / "dup.jsonl", line + "\n" + line + "\n");
    CHECK(rftest::error_code_of([&] { Corpus::ingest(dir / "dup.jsonl"); }) == ErrorCode::DuplicateIdentifier);

    rftest::write_file(dir / "bad.jsonl", line + "\n{\"framework\": \"nist_csf\"}\n");
    try {
        Corpus::ingest(dir / "bad.jsonl");
        FAIL("expected MalformedCorpus");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MalformedCorpus);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    rftest::write_file(dir / "badid.jsonl",
                       R"({"framework": "nist_csf", "identifier": "not-an-id", "title": "t", "body": "b"})");
    CHECK(rftest::error_code_of([&] { Corpus::ingest(dir / "badid.jsonl"); }) == ErrorCode::MalformedCorpus);
    CHECK(rftest::error_code_of([&] { Corpus::ingest(dir / "missing.jsonl"); }) == ErrorCode::MalformedCorpus);
}

TEST_CASE("tokenize drops stopwords and folds case") {
    CHECK(tokenize("The Multi-Factor and access") == std::vector<std::string>{"multi", "factor", "access"});
    CHECK(kStopwords.size() == 30);
}

TEST_CASE("retrieve examples") {
    const auto& corpus = rftest::corpus();
    auto top = corpus.retrieve("multi-factor authentication access", 2);
    REQUIRE(top.size() == 2);
    // Both access-control excerpts share all four query tokens; ties go to the
    // lower identifier.
    CHECK(top[0].identifier == "6.5");
    CHECK(top[1].identifier == "PR.AC-7");

    auto all = corpus.retrieve("access data network incident recovery asset", 1000);
    CHECK(all.size() <= corpus.size());
    CHECK(!all.empty());

    CHECK(corpus.retrieve("zzzz qqqq", 5).empty());
    CHECK(corpus.retrieve("the and of", 5).empty());
}

TEST_CASE("property: retrieval matches a brute-force scorer and is deterministic") {
    const auto& corpus = rftest::corpus();
    std::vector<std::string> vocab;
    for (const auto& e : corpus.excerpts()) {
        for (auto& t : tokenize(e.title + " " + e.body)) vocab.push_back(t);
    }
    vocab.push_back("nonsenseword");
    std::mt19937 rng(5);
    for (int round = 0; round < 300; ++round) {
        std::string query;
        const int n = std::uniform_int_distribution<int>(1, 6)(rng);
        for (int i = 0; i < n; ++i) query += vocab[rng() % vocab.size()] + " ";
        const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 45)(rng);

        const auto q = tokenize(query);
        const std::set<std::string> qs(q.begin(), q.end());
        std::vector<std::pair<std::size_t, std::string>> scored;
        for (const auto& e : corpus.excerpts()) {
            const auto t = tokenize(e.title + " " + e.body);
            const std::set<std::string> ts(t.begin(), t.end());
            std::size_t score = 0;
            for (const auto& w : qs) score += ts.count(w);
            if (score) scored.emplace_back(score, e.identifier);
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        if (scored.size() > k) scored.resize(k);

        const auto got = corpus.retrieve(query, k);
        REQUIRE(got.size() == scored.size());
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].identifier == scored[i].second);
        const auto again = corpus.retrieve(query, k);
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(again[i].identifier == got[i].identifier);
    }
}

TEST_CASE("verify_citations examples") {
    const auto& corpus = rftest::corpus();
    auto one = corpus.verify_citations("apply PR.AC-1 now");
    REQUIRE(one.size() == 1);
    CHECK(one[0].verified);
    CHECK(one[0].raw == "PR.AC-1");
    CHECK(corpus.verify_citations("no identifiers here").empty());

    auto cis = corpus.verify_citations("CIS Control 5.2 and CIS Control 5.9");
    REQUIRE(cis.size() == 2);
    CHECK(cis[0].verified);
    CHECK(cis[0].raw == "CIS Control 5.2");
    CHECK(!cis[1].verified);
}

TEST_CASE("seeded and grounded report fixtures") {
    const auto& corpus = rftest::corpus();
    auto seeded = corpus.verify_citations(rftest::read_file(rftest::data_dir() / "fixtures" / "seeded_report.md"));
    std::size_t unverified = 0;
    for (const auto& c : seeded) unverified += !c.verified;
    CHECK(unverified == 7);
    CHECK(seeded.size() > 7);

    auto grounded =
        corpus.verify_citations(rftest::read_file(rftest::data_dir() / "fixtures" / "grounded_report.md"));
    CHECK(!grounded.empty());
    for (const auto& c : grounded) CHECK_MESSAGE(c.verified, c.raw);
}

TEST_CASE("property: verify_citations against a membership oracle (1000 cases)") {
    std::mt19937 rng(99);
    for (int round = 0; round < 1000; ++round) {
        // pool of identifiers, a random subset becomes the corpus
        std::vector<std::pair<Framework, std::string>> pool;
        const int pool_size = std::uniform_int_distribution<int>(1, 20)(rng);
        for (int i = 0; i < pool_size; ++i) {
            if (rng() % 3 == 0) {
                pool.emplace_back(Framework::Cis, random_cis(rng));
            } else {
                pool.emplace_back(Framework::NistCsf, random_nist(rng));
            }
        }
        std::set<std::pair<Framework, std::string>> members;
        std::vector<FrameworkExcerpt> excerpts;
        for (const auto& p : pool) {
            if (rng() % 2 && members.insert(p).second) {
                excerpts.push_back({p.first, p.second, "t", "b"});
            }
        }
        const auto corpus = Corpus::from_excerpts(excerpts);

        std::string text;
        std::vector<std::pair<Framework, std::string>> cited;
        const int cites = std::uniform_int_distribution<int>(0, 8)(rng);
        for (int i = 0; i < cites; ++i) {
            const auto& p = pool[rng() % pool.size()];
            text += (rng() % 2 ? " see " : "; ");
            text += p.first == Framework::Cis ? "CIS Control " + p.second : p.second;
            cited.push_back(p);
        }
        text += " end";

        const auto got = corpus.verify_citations(text);
        REQUIRE(got.size() == cited.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].framework == cited[i].first);
            CHECK(got[i].identifier == cited[i].second);
            CHECK(got[i].verified == (members.count(cited[i]) == 1));
            CHECK(text.substr(got[i].begin, got[i].end - got[i].begin) == got[i].raw);
        }
    }
}

TEST_CASE("citation JSON round-trip") {
    auto c = rftest::corpus().verify_citations("x DE.CM-1 y").at(0);
    auto back = citation_from_json(to_json(c));
    CHECK(back.raw == c.raw);
    CHECK(back.identifier == c.identifier);
    CHECK(back.begin == c.begin);
    CHECK(back.end == c.end);
    CHECK(back.verified == c.verified);
}

#pragma once

#include "files.hpp"
#include "riskforge/agent_contracts.hpp"
#include "riskforge/common.hpp"
#include "riskforge/grounding.hpp"

namespace rftest {

inline json profile(const std::string& name) { return load_json(data_dir() / "profiles" / (name + ".json")); }

inline const riskforge::ContractSet& contracts() {
    static const auto set =
        riskforge::ContractSet::load(data_dir() / "templates", data_dir() / "schemas");
    return set;
}

inline const riskforge::Corpus& corpus() {
    static const auto c = riskforge::Corpus::ingest(data_dir() / "corpus" / "csf_mini.jsonl");
    return c;
}

template <class F>
riskforge::ErrorCode error_code_of(F&& f) {
    try {
        f();
    } catch (const riskforge::Error& e) {
        return e.code();
    }
    throw std::runtime_error("expected a riskforge::Error");
}

}  // namespace rftest

#pragma once

#include "riskforge/orchestrator.hpp"
#include "support.hpp"

namespace rftest {

inline riskforge::PipelineResult run_pipeline(const std::string& profile_name, std::size_t window,
                                              riskforge::RunMode mode = riskforge::RunMode::MultiAgent,
                                              std::int64_t seed = 1, const std::string& label = "specific",
                                              const riskforge::PipelineObserver* observer = nullptr,
                                              riskforge::StubOptions stub_options = {}) {
    riskforge::StubGateway stub(data_dir() / "stub" / label, stub_options);
    riskforge::PipelineOptions opts;
    opts.mode = mode;
    opts.config.model_id = label;
    opts.config.context_window_tokens = window;
    opts.config.seed = seed;
    opts.observer = observer;
    return riskforge::execute_pipeline(profile(profile_name), {contracts(), corpus(), stub}, opts);
}

}  // namespace rftest

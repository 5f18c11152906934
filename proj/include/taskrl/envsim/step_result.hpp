#pragma once

#include <map>
#include <string>
#include <vector>

namespace taskrl {

/// Per-step outcome of an environment transition: one observation and one
/// reward per living agent, plus episode-termination flag and diagnostics.
template <class Obs>
struct StepResult {
    std::vector<Obs> observations;
    std::vector<double> rewards;
    bool terminated = false;
    std::map<std::string, double> info;
};

}  // namespace taskrl

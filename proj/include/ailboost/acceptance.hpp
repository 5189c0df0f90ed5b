#pragma once

#include <string>
#include <vector>

#include "ailboost/experiment.hpp"

namespace ailboost::acceptance {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    /// Measured quantities behind the verdict.
    std::string detail;
    double seconds = 0.0;
};

struct CriterionInfo {
    int id;
    const char* name;
    /// Decided by closed-form oracles rather than learning runs.
    bool exact_oracle;
};

const std::vector<CriterionInfo>& criteria();

/// Runs one criterion; unknown ids throw Error. Exceptions raised by the
/// checks themselves become failed results.
CriterionResult run_criterion(int id);

/// `PASS|FAIL [<id>] <name>: <detail> (<seconds>s)`.
std::string format_result(const CriterionResult& result);

/// Configurations of the learning-run criteria, exposed for the CLI and tests.
ExperimentConfig one_trajectory_config();
ExperimentConfig slip_comparison_config();
ExperimentConfig schedule_config();
ExperimentConfig oracle_descent_config();

}  // namespace ailboost::acceptance

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "captl/mdp.hpp"
#include "captl/requirement.hpp"
#include "captl/synthesis.hpp"

namespace captl::cli {

/// One row of the performance table: sizes of M and of the product, and wall
/// times per phase in seconds.
struct RunStats {
    std::string label;
    Cardinality model;
    std::size_t product_states = 0;
    std::size_t product_transitions = 0;
    std::size_t product_choices = 0;
    double construction = 0.0;
    /// Indexed by objective; empty when the objective was never explored.
    std::vector<std::optional<double>> objectives;
    double product = 0.0;
    double verification = 0.0;
    double total = 0.0;
    double c = 0.0;
};

/// Runs persistence synthesis phase by phase and records sizes and times.
/// `construction` is the time already spent building `mdp`.
RunStats measure(const Mdp& mdp, const CaptlRequirement& req, const SolveOptions& opts, std::string label,
                 double construction);

/// Header plus one line per row; objectives are named after `req`.
std::string stats_csv(const CaptlRequirement& req, const std::vector<RunStats>& rows);

/// Exit codes: 0 success, 1 input or validation error, 2 synthesis or numerical error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace captl::cli

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "captl/mdp.hpp"
#include "captl/requirement.hpp"

namespace captl {

struct Cell {
    int x = 0;
    int y = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
};

/// Grid robot with state (g, h, x, y): status g (0 on, 1 sleep, 2 error),
/// battery h and 1-based coordinates.
///
/// A move N/S/E/W needs h >= move_cost and stays inside the grid. With
/// probability 1 - obstacle_prob it succeeds and costs move_cost; otherwise the
/// robot stays put and pays move_cost + obstacle_extra_cost (floored at 0).
/// `sleep` and `error` switch status and then self-loop; `done` lets an active
/// robot at the goal stay there.
struct RobotParams {
    int width = 3;
    int height = 3;
    int initial_battery = 10;
    double obstacle_prob = 0.1;
    int move_cost = 1;
    int obstacle_extra_cost = 1;
    Cell start{1, 1};
    /// Defaults (when left empty): goal at (W, H), charger at (1, H), safe zone at the centre.
    std::vector<Cell> goals;
    std::vector<Cell> chargers;
    std::vector<Cell> safe_zones;
};

/// MEDA biochip segment of width x height cells in 3x3 blocks, with droplets
/// A and B tracked at block resolution.
///
/// Scheduler states 0..7: 0 dispense/abort, 1 mvA_d/mvA_idle/flush/abort,
/// 2 mvB_d/mvB_idle, 3 update, 4 mix (same block) / repeat / exit (both gone),
/// 5 mixed, 6 salvaged, 7 aborted. A move fails with p1(e) and a flush with
/// p2(e), where e is the error count of the droplet's block; every failure
/// counts an error, and a failure at max_errors leaves the block dead (its
/// droplets no longer respond). Moving E out of the last block column, or a
/// successful flush, takes the droplet out of the segment.
struct MedaParams {
    int width = 8;
    int height = 5;
    /// 0-based cell coordinates.
    Cell dispenser_a{1, 1};
    Cell dispenser_b{1, 3};
    /// p1(e) = min(move_error * (1 + e), 1), p2(e) = min(flush_error * (1 + e), 1).
    double move_error = 0.05;
    double flush_error = 0.08;
    int max_errors = 1;
};

struct CaseStudy {
    Mdp model;
    CaptlRequirement requirement;
};

/// Throws ValidationError for invalid parameters.
CaseStudy gen_robot(const RobotParams& params);
CaseStudy gen_meda(const MedaParams& params);

/// "WxH" -> (W, H); throws ValidationError on malformed input.
std::pair<int, int> parse_size(const std::string& text);

} // namespace captl

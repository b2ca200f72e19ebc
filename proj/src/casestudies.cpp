#include "captl/casestudies.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <deque>
#include <map>

#include "captl/errors.hpp"

namespace captl {

namespace {

bool contains_cell(const std::vector<Cell>& cells, int x, int y) {
    return std::find(cells.begin(), cells.end(), Cell{x, y}) != cells.end();
}

// Accumulates branches, merging repeated targets.
void add_branch(std::vector<Branch>& out, StateIndex to, double p) {
    if (p <= 0.0) return;
    for (auto& b : out)
        if (b.to == to) {
            b.prob = std::min(1.0, b.prob + p); // merged rounding may overshoot
            return;
        }
    out.push_back({to, p});
}

// Breadth-first state space exploration over hashable keys.
template <class Key>
class Explorer {
public:
    StateIndex index(const Key& k) {
        auto [it, inserted] = ids_.emplace(k, keys_.size());
        if (inserted) {
            keys_.push_back(k);
            frontier_.push_back(it->second);
        }
        return it->second;
    }
    bool next(StateIndex& s) {
        if (frontier_.empty()) return false;
        s = frontier_.front();
        frontier_.pop_front();
        return true;
    }
    const Key& key(StateIndex s) const { return keys_[s]; }
    std::size_t size() const { return keys_.size(); }

private:
    std::map<Key, StateIndex> ids_;
    std::vector<Key> keys_;
    std::deque<StateIndex> frontier_;
};

struct PendingChoice {
    StateIndex from;
    std::string action;
    std::vector<Branch> branches;
};

// ---- robot ---------------------------------------------------------------

enum RobotStatus { kOn = 0, kSleep = 1, kError = 2 };
using RobotKey = std::array<int, 4>; // g, h, x, y

void check_robot(const RobotParams& p) {
    if (p.width < 1 || p.height < 1) throw ValidationError("robot grid must be at least 1x1");
    if (p.initial_battery < 0) throw ValidationError("initial battery must be non-negative");
    if (!(p.obstacle_prob >= 0.0 && p.obstacle_prob <= 1.0))
        throw ValidationError("obstacle probability must lie in [0, 1]");
    if (p.move_cost < 1 || p.obstacle_extra_cost < 0) throw ValidationError("movement costs must be positive");
    auto inside = [&](Cell c) { return c.x >= 1 && c.x <= p.width && c.y >= 1 && c.y <= p.height; };
    if (!inside(p.start)) throw ValidationError("robot start lies outside the grid");
    for (const auto* cells : {&p.goals, &p.chargers, &p.safe_zones})
        for (Cell c : *cells)
            if (!inside(c)) throw ValidationError("robot location lies outside the grid");
}

const char* kRobotRequirement = R"(objective q0 = Pmax [ F G ("goal" & "h>3" & "on") ];
objective q1 = Pmax [ F G ("chrg" & "h>3" & "sleep") ];
objective q2 = Pmax [ F G ("safe" & "sleep") ];
objective q3 = Pmax [ F G "error" ];
context w01 : q0 -> q1 when Pmax in [0.75, 0.85);
context w02 : q0 -> q2 when Pmax < 0.75;
context w13 : q1 -> q3 when Pmax < 0.7;
context w23 : q2 -> q3 when Pmax < 0.8;
initial q0;
)";

// ---- meda ----------------------------------------------------------------

constexpr int kAbsent = -1;
// sched, block of A, block of B, then one error count per block
using MedaKey = std::vector<int>;

void check_meda(const MedaParams& p) {
    if (p.width < 1 || p.height < 1) throw ValidationError("biochip must be at least 1x1");
    auto inside = [&](Cell c) { return c.x >= 0 && c.x < p.width && c.y >= 0 && c.y < p.height; };
    if (!inside(p.dispenser_a) || !inside(p.dispenser_b)) throw ValidationError("dispenser lies outside the biochip");
    if (!(p.move_error >= 0.0 && p.move_error <= 1.0) || !(p.flush_error >= 0.0 && p.flush_error <= 1.0))
        throw ValidationError("error rates must lie in [0, 1]");
    if (p.max_errors < 0 || p.max_errors > 8) throw ValidationError("max_errors must lie in [0, 8]");
}

const char* kMedaRequirement = R"(objective q0 = Pmax [ F G "mixed" ];
objective q1 = Pmax [ F G "salvaged" ];
objective q2 = Pmax [ F G "aborted" ];
context w01 : q0 -> q1 when Pmax in [0.7, 0.85);
context w02 : q0 -> q2 when Pmax < 0.7;
context w12 : q1 -> q2 when Pmax < 0.7;
initial q0;
)";

// Distribution of the block reached by dispensing at `d` with a uniform
// deviation in {-1, 0, 1} per axis, clipped to the chip.
// Weights are ninths, kept as integer counts so merged outcomes stay exact.
std::map<int, int> dispense_blocks(const MedaParams& p, Cell d, int blocks_x) {
    std::map<int, int> out;
    for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy) {
            int x = std::clamp(d.x + dx, 0, p.width - 1);
            int y = std::clamp(d.y + dy, 0, p.height - 1);
            ++out[(y / 3) * blocks_x + x / 3];
        }
    return out;
}

} // namespace

CaseStudy gen_robot(const RobotParams& params) {
    check_robot(params);
    RobotParams p = params;
    if (p.goals.empty()) p.goals.push_back({p.width, p.height});
    if (p.chargers.empty()) p.chargers.push_back({1, p.height});
    if (p.safe_zones.empty()) p.safe_zones.push_back({(p.width + 1) / 2, (p.height + 1) / 2});

    static constexpr std::array<std::pair<const char*, std::array<int, 2>>, 4> kMoves{
        {{"N", {0, 1}}, {"S", {0, -1}}, {"E", {1, 0}}, {"W", {-1, 0}}}};

    Explorer<RobotKey> ex;
    std::vector<PendingChoice> choices;
    ex.index({kOn, p.initial_battery, p.start.x, p.start.y});
    StateIndex s = 0;
    while (ex.next(s)) {
        auto [g, h, x, y] = ex.key(s);
        if (g != kOn) {
            choices.push_back({s, g == kSleep ? "sleep" : "error", {{s, 1.0}}});
            continue;
        }
        for (const auto& [name, d] : kMoves) {
            int nx = x + d[0], ny = y + d[1];
            if (h < p.move_cost || nx < 1 || nx > p.width || ny < 1 || ny > p.height) continue;
            std::vector<Branch> br;
            add_branch(br, ex.index({kOn, h - p.move_cost, nx, ny}), 1.0 - p.obstacle_prob);
            add_branch(br, ex.index({kOn, std::max(0, h - p.move_cost - p.obstacle_extra_cost), x, y}),
                       p.obstacle_prob);
            choices.push_back({s, name, std::move(br)});
        }
        choices.push_back({s, "sleep", {{ex.index({kSleep, h, x, y}), 1.0}}});
        choices.push_back({s, "error", {{ex.index({kError, h, x, y}), 1.0}}});
        if (contains_cell(p.goals, x, y)) choices.push_back({s, "done", {{s, 1.0}}});
    }

    MdpBuilder b(ex.size());
    for (const char* a : {"N", "S", "E", "W", "sleep", "error", "done"}) b.add_action(a);
    for (const char* q : {"goal", "chrg", "safe", "on", "sleep", "error", "h>3"}) b.add_proposition(q);
    for (StateIndex v = 0; v < ex.size(); ++v) {
        auto [g, h, x, y] = ex.key(v);
        if (contains_cell(p.goals, x, y)) b.add_label(v, "goal");
        if (contains_cell(p.chargers, x, y)) b.add_label(v, "chrg");
        if (contains_cell(p.safe_zones, x, y)) b.add_label(v, "safe");
        b.add_label(v, g == kOn ? "on" : g == kSleep ? "sleep" : "error");
        if (h > 3) b.add_label(v, "h>3");
        char name[64];
        std::snprintf(name, sizeof name, "g%d_h%d_x%d_y%d", g, h, x, y);
        b.set_name(v, name);
    }
    for (auto& c : choices) b.add_choice(c.from, c.action, std::move(c.branches));
    b.set_initial(0);
    return {b.build(), parse_requirement(kRobotRequirement)};
}

CaseStudy gen_meda(const MedaParams& p) {
    check_meda(p);
    const int bx = (p.width + 2) / 3;
    const int by = (p.height + 2) / 3;
    const int nblocks = bx * by;
    const int dead = p.max_errors + 1;

    auto p1 = [&](int e) { return e >= dead ? 1.0 : std::min(p.move_error * (1 + e), 1.0); };
    auto p2 = [&](int e) { return e >= dead ? 1.0 : std::min(p.flush_error * (1 + e), 1.0); };

    static constexpr std::array<std::pair<char, std::array<int, 2>>, 4> kMoves{
        {{'N', {0, 1}}, {'S', {0, -1}}, {'E', {1, 0}}, {'W', {-1, 0}}}};

    Explorer<MedaKey> ex;
    std::vector<PendingChoice> choices;
    MedaKey init(3 + nblocks, 0);
    init[1] = init[2] = kAbsent;
    ex.index(init);

    auto with_sched = [](MedaKey k, int sched) {
        k[0] = sched;
        return k;
    };
    auto bump = [&](MedaKey& k, int block) { k[3 + block] = std::min(k[3 + block] + 1, dead); };

    StateIndex s = 0;
    while (ex.next(s)) {
        const MedaKey k = ex.key(s);
        const int sched = k[0];
        switch (sched) {
        case 0: {
            std::vector<Branch> br;
            auto da = dispense_blocks(p, p.dispenser_a, bx);
            auto db = dispense_blocks(p, p.dispenser_b, bx);
            for (auto [a, pa] : da)
                for (auto [bb, pb] : db) {
                    MedaKey n = with_sched(k, 1);
                    n[1] = a;
                    n[2] = bb;
                    add_branch(br, ex.index(n), (pa * pb) / 81.0);
                }
            choices.push_back({s, "dispense", std::move(br)});
            choices.push_back({s, "abort", {{ex.index(with_sched(k, 7)), 1.0}}});
            break;
        }
        case 1:
        case 2: {
            const int slot = sched; // 1 = droplet A, 2 = droplet B
            const char tag = slot == 1 ? 'A' : 'B';
            const int pos = k[slot];
            if (pos != kAbsent && k[3 + pos] < dead) {
                const int cx = pos % bx, cy = pos / bx;
                for (const auto& [dname, d] : kMoves) {
                    int nx = cx + d[0], ny = cy + d[1];
                    bool exits = nx == bx && ny == cy;
                    if (!exits && (nx < 0 || nx >= bx || ny < 0 || ny >= by)) continue;
                    MedaKey ok = with_sched(k, sched + 1);
                    ok[slot] = exits ? kAbsent : ny * bx + nx;
                    MedaKey fail = with_sched(k, sched + 1);
                    bump(fail, pos);
                    double pf = p1(k[3 + pos]);
                    std::vector<Branch> br;
                    add_branch(br, ex.index(ok), 1.0 - pf);
                    add_branch(br, ex.index(fail), pf);
                    choices.push_back({s, std::string("mv") + tag + "_" + dname, std::move(br)});
                }
            }
            choices.push_back({s, std::string("mv") + tag + "_idle", {{ex.index(with_sched(k, sched + 1)), 1.0}}});
            if (sched == 1) {
                if (k[1] != kAbsent || k[2] != kAbsent) {
                    // Each present droplet leaves independently.
                    std::vector<std::pair<MedaKey, double>> outcomes{{with_sched(k, 3), 1.0}};
                    for (int d = 1; d <= 2; ++d) {
                        if (k[d] == kAbsent) continue;
                        std::vector<std::pair<MedaKey, double>> next;
                        for (auto& [m, pr] : outcomes) {
                            double pf = p2(m[3 + k[d]]);
                            MedaKey gone = m;
                            gone[d] = kAbsent;
                            MedaKey fail = m;
                            bump(fail, k[d]);
                            if (pf < 1.0) next.push_back({gone, pr * (1.0 - pf)});
                            if (pf > 0.0) next.push_back({fail, pr * pf});
                        }
                        outcomes = std::move(next);
                    }
                    std::vector<Branch> br;
                    for (auto& [m, pr] : outcomes) add_branch(br, ex.index(m), pr);
                    choices.push_back({s, "flush", std::move(br)});
                }
                choices.push_back({s, "abort", {{ex.index(with_sched(k, 7)), 1.0}}});
            }
            break;
        }
        case 3:
            choices.push_back({s, "update", {{ex.index(with_sched(k, 4)), 1.0}}});
            break;
        case 4: {
            bool both_absent = k[1] == kAbsent && k[2] == kAbsent;
            if (k[1] != kAbsent && k[1] == k[2]) choices.push_back({s, "mix", {{ex.index(with_sched(k, 5)), 1.0}}});
            if (!both_absent) choices.push_back({s, "repeat", {{ex.index(with_sched(k, 1)), 1.0}}});
            else choices.push_back({s, "exit", {{ex.index(with_sched(k, 6)), 1.0}}});
            break;
        }
        default:
            choices.push_back({s, "done", {{s, 1.0}}});
        }
    }

    MdpBuilder b(ex.size());
    b.add_action("dispense");
    for (char tag : {'A', 'B'}) {
        for (const auto& [dname, d] : kMoves) b.add_action(std::string("mv") + tag + "_" + dname);
        b.add_action(std::string("mv") + tag + "_idle");
    }
    for (const char* a : {"flush", "update", "mix", "repeat", "exit", "abort", "done"}) b.add_action(a);
    for (const char* q : {"inBlock", "abAbsent", "mixed", "salvaged", "aborted"}) b.add_proposition(q);

    auto block_text = [&](int pos) {
        if (pos == kAbsent) return std::string("-");
        return std::to_string(pos % bx) + ":" + std::to_string(pos / bx);
    };
    for (StateIndex v = 0; v < ex.size(); ++v) {
        const MedaKey& k = ex.key(v);
        if (k[1] != kAbsent && k[1] == k[2]) b.add_label(v, "inBlock");
        if (k[0] != 0 && k[1] == kAbsent && k[2] == kAbsent) b.add_label(v, "abAbsent");
        if (k[0] == 5) b.add_label(v, "mixed");
        if (k[0] == 6) b.add_label(v, "salvaged");
        if (k[0] == 7) b.add_label(v, "aborted");
        std::string name = "k" + std::to_string(k[0]) + "_A" + block_text(k[1]) + "_B" + block_text(k[2]) + "_e";
        for (int i = 0; i < nblocks; ++i) name += static_cast<char>('0' + k[3 + i]);
        b.set_name(v, std::move(name));
    }
    for (auto& c : choices) b.add_choice(c.from, c.action, std::move(c.branches));
    b.set_initial(0);
    return {b.build(), parse_requirement(kMedaRequirement)};
}

std::pair<int, int> parse_size(const std::string& text) {
    auto x = text.find_first_of("xX");
    auto bad = [&]() { return ValidationError("malformed size '" + text + "', expected WxH"); };
    if (x == std::string::npos || x == 0 || x + 1 == text.size()) throw bad();
    int w = 0, h = 0;
    const char* first = text.data();
    const char* mid = first + x;
    const char* last = first + text.size();
    auto r1 = std::from_chars(first, mid, w);
    auto r2 = std::from_chars(mid + 1, last, h);
    if (r1.ec != std::errc{} || r1.ptr != mid || r2.ec != std::errc{} || r2.ptr != last || w < 1 || h < 1)
        throw bad();
    return {w, h};
}

} // namespace captl

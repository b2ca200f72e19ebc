#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "captl/logic.hpp"

namespace captl {

/// One optimization query Popt[ F f ] or Popt[ F G f ].
struct Objective {
    std::string id;
    Direction direction = Direction::Max;
    PathFormula path = PathFormula::eventually(StateFormula::truth());

    friend bool operator==(const Objective&, const Objective&) = default;
};

/// Edge source -> target, taken when Pmax of the source objective's formula
/// lies in `interval`.
struct Context {
    std::string id;
    std::string source;
    std::string target;
    PathFormula formula = PathFormula::eventually(StateFormula::truth());
    Interval interval;

    friend bool operator==(const Context&, const Context&) = default;
};

/// Acyclic graph of objectives joined by interval-guarded contexts.
class CaptlRequirement {
public:
    /// Throws ValidationError on duplicate ids, dangling references, self
    /// loops, malformed intervals, a missing initial objective or a cycle.
    /// Each context's formula is taken from its source objective.
    CaptlRequirement(std::vector<Objective> objectives, std::vector<Context> contexts, std::string initial);

    const std::vector<Objective>& objectives() const noexcept { return objectives_; }
    const std::vector<Context>& contexts() const noexcept { return contexts_; }
    const std::string& initial() const noexcept { return initial_; }
    std::size_t initial_index() const { return index_of(initial_); }

    std::optional<std::size_t> find(std::string_view id) const;
    /// Declaration index; throws ValidationError for an unknown id.
    std::size_t index_of(std::string_view id) const;
    const Objective& objective(std::string_view id) const { return objectives_[index_of(id)]; }
    const Context* find_context(std::string_view id) const;

    /// Objective indices such that every context goes from an earlier to a later one.
    std::vector<std::size_t> topological_order() const;

    friend bool operator==(const CaptlRequirement&, const CaptlRequirement&) = default;

private:
    std::vector<Objective> objectives_;
    std::vector<Context> contexts_;
    std::string initial_;
};

/// Parses the requirement DSL:
///
///   objective q0 = Pmax [ F G ("goal" & "on") ];
///   context w01 : q0 -> q1 when Pmax in [0.75, 0.85);
///   initial q0;
///
/// `//` starts a comment. Without an `initial` declaration the first objective
/// is initial. Throws ParseError for syntax errors and ValidationError for
/// semantic ones.
CaptlRequirement parse_requirement(std::string_view text);

/// Canonical text; parse_requirement(print_requirement(r)) == r.
std::string print_requirement(const CaptlRequirement& req);

/// Reasons the requirement is outside the persistence fragment: every
/// objective Pmax [ F G B ], and per objective the context intervals are
/// pairwise disjoint with union [0, c). Empty when conforming.
std::vector<std::string> validate_persistence(const CaptlRequirement& req);

/// Contexts leaving `q` in declaration order; throws ValidationError for an unknown objective.
std::vector<Context> contexts_of(const CaptlRequirement& req, std::string_view q);

/// A single quantitative query, `Pmax [ F "goal" ]` or `Pmin>=0.5 [ "a" U<=4 "b" ]`.
struct Query {
    Direction direction = Direction::Max;
    std::optional<Interval> bound;
    PathFormula path = PathFormula::eventually(StateFormula::truth());
};

/// Query grammar: ("Pmax"|"Pmin") [("<"|"<="|">"|">=") NUM | "in" ival] "[" path "]"
/// with path one of X f, F f, F G f, f U g, f U<=k g.
Query parse_query(std::string_view text);

/// State formula on its own, in the same syntax.
StateFormula parse_state_formula(std::string_view text);

} // namespace captl

#pragma once

#include <string>
#include <string_view>

#include "captl/mdp.hpp"

namespace captl {

/// Parses the JSON model interchange format.
///
///   { "states": n, "init": s0, "actions": [...], "props": [...], "labels": {"<s>": [...]},
///     "names": {"<s>": "..."}, "transitions": [{"from", "action", "branches": [{"to", "prob"}]}] }
///
/// "actions" is optional; it fixes declaration order and may list unused
/// actions. Other action indices follow first appearance in "transitions".
/// Throws ParseError
/// (with line/column) for malformed JSON or schema violations and
/// ValidationError for model-invariant violations.
Mdp parse_model(std::string_view text);

/// Canonical JSON form: transitions ordered by (action, from), so that
/// parse_model(serialize_model(m)) == m for any parsed or generated model.
std::string serialize_model(const Mdp& mdp);

} // namespace captl

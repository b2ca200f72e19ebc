#include "captl/model_io.hpp"

#include <algorithm>
#include <charconv>
#include <json.hpp>

#include "captl/errors.hpp"

namespace captl {

namespace {

using nlohmann::json;

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

[[noreturn]] void schema_error(const std::string& message) { throw ParseError("model: " + message, 0, 0); }

std::size_t as_index(const json& j, const std::string& what) {
    if (!j.is_number_integer() || j.get<long long>() < 0) schema_error(what + " must be a non-negative integer");
    return j.get<std::size_t>();
}

std::size_t key_index(const std::string& key, const std::string& what) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), value);
    if (ec != std::errc() || ptr != key.data() + key.size() || key.empty())
        schema_error(what + " key '" + key + "' is not a state index");
    return value;
}

const json& field(const json& obj, const char* name) {
    auto it = obj.find(name);
    if (it == obj.end()) schema_error(std::string("missing field '") + name + "'");
    return *it;
}

} // namespace

Mdp parse_model(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        auto [line, column] = line_column(text, e.byte);
        std::string what = e.what();
        auto pos = what.find("syntax error");
        throw ParseError(pos == std::string::npos ? what : what.substr(pos), line, column);
    }
    if (!doc.is_object()) schema_error("document must be a JSON object");

    std::size_t n = as_index(field(doc, "states"), "'states'");
    MdpBuilder builder(n);
    builder.set_initial(as_index(field(doc, "init"), "'init'"));

    if (auto it = doc.find("actions"); it != doc.end()) {
        if (!it->is_array()) schema_error("'actions' must be an array");
        for (const json& a : *it) {
            if (!a.is_string()) schema_error("action names must be strings");
            builder.add_action(a.get<std::string>());
        }
    }
    if (auto it = doc.find("props"); it != doc.end()) {
        if (!it->is_array()) schema_error("'props' must be an array");
        for (const json& p : *it) {
            if (!p.is_string()) schema_error("proposition names must be strings");
            builder.add_proposition(p.get<std::string>());
        }
    }
    if (auto it = doc.find("labels"); it != doc.end()) {
        if (!it->is_object()) schema_error("'labels' must be an object");
        for (auto& [key, list] : it->items()) {
            std::size_t s = key_index(key, "'labels'");
            if (!list.is_array()) schema_error("labels of state " + key + " must be an array");
            for (const json& p : list) {
                if (!p.is_string()) schema_error("labels must be strings");
                builder.add_label(s, p.get<std::string>());
            }
        }
    }
    if (auto it = doc.find("names"); it != doc.end()) {
        if (!it->is_object()) schema_error("'names' must be an object");
        for (auto& [key, name] : it->items()) {
            if (!name.is_string()) schema_error("names must be strings");
            builder.set_name(key_index(key, "'names'"), name.get<std::string>());
        }
    }
    const json& transitions = field(doc, "transitions");
    if (!transitions.is_array()) schema_error("'transitions' must be an array");
    for (const json& t : transitions) {
        if (!t.is_object()) schema_error("transition entries must be objects");
        std::size_t from = as_index(field(t, "from"), "'from'");
        const json& action = field(t, "action");
        if (!action.is_string()) schema_error("'action' must be a string");
        const json& branches = field(t, "branches");
        if (!branches.is_array()) schema_error("'branches' must be an array");
        std::vector<Branch> list;
        for (const json& b : branches) {
            if (!b.is_object()) schema_error("branch entries must be objects");
            const json& prob = field(b, "prob");
            if (!prob.is_number()) schema_error("'prob' must be a number");
            list.push_back({as_index(field(b, "to"), "'to'"), prob.get<double>()});
        }
        builder.add_choice(from, action.get<std::string>(), std::move(list));
    }
    return builder.build();
}

std::string serialize_model(const Mdp& mdp) {
    using ojson = nlohmann::ordered_json;
    ojson doc;
    doc["states"] = mdp.num_states();
    doc["init"] = mdp.initial();
    doc["actions"] = mdp.action_names();
    doc["props"] = mdp.propositions();

    ojson labels = ojson::object();
    for (StateIndex s = 0; s < mdp.num_states(); ++s) {
        auto l = mdp.labels(s);
        if (l.empty()) continue;
        ojson names = ojson::array();
        for (PropIndex p : l) names.push_back(mdp.propositions()[p]);
        labels[std::to_string(s)] = std::move(names);
    }
    doc["labels"] = std::move(labels);

    if (mdp.has_display_names()) {
        ojson names = ojson::object();
        for (StateIndex s = 0; s < mdp.num_states(); ++s)
            if (!mdp.display_name(s).empty()) names[std::to_string(s)] = mdp.display_name(s);
        doc["names"] = std::move(names);
    }

    struct Entry {
        ActionIndex action;
        StateIndex from;
        const Choice* choice;
    };
    std::vector<Entry> entries;
    for (StateIndex s = 0; s < mdp.num_states(); ++s)
        for (const Choice& c : mdp.choices(s)) entries.push_back({c.action, s, &c});
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.action < b.action; });

    ojson transitions = ojson::array();
    for (const Entry& e : entries) {
        ojson branches = ojson::array();
        for (const Branch& b : mdp.branches(*e.choice)) branches.push_back({{"to", b.to}, {"prob", b.prob}});
        transitions.push_back(
            {{"from", e.from}, {"action", mdp.action_names()[e.action]}, {"branches", std::move(branches)}});
    }
    doc["transitions"] = std::move(transitions);
    return doc.dump(1) + "\n";
}

} // namespace captl

#include "toonforge/textparse.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace toonforge {

namespace {

bool word_byte(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (word_byte(c)) {
            cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
        } else if ((c == '-' || c == '\'') && !cur.empty() && i + 1 < text.size() &&
                   word_byte(static_cast<unsigned char>(text[i + 1]))) {
            cur += static_cast<char>(c);
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

Lexicon::Lexicon(std::vector<LexiconEntry> entries, std::vector<ColorTerm> colors, std::vector<std::string> distractors)
    : entries_(std::move(entries)), colors_(std::move(colors)), distractors_(std::move(distractors)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) entry_index_[entries_[i].tokens.front()].push_back(i);
    for (auto& [tok, list] : entry_index_)
        std::stable_sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
            const auto& ea = entries_[a];
            const auto& eb = entries_[b];
            if (ea.tokens.size() != eb.tokens.size()) return ea.tokens.size() > eb.tokens.size();
            return ea.priority > eb.priority;
        });
    for (std::size_t i = 0; i < colors_.size(); ++i) color_index_[colors_[i].tokens.front()].push_back(i);
    for (auto& [tok, list] : color_index_)
        std::stable_sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
            return colors_[a].tokens.size() > colors_[b].tokens.size();
        });
}

const std::vector<std::size_t>& Lexicon::entries_starting_with(const std::string& token) const {
    static const std::vector<std::size_t> none;
    auto it = entry_index_.find(token);
    return it == entry_index_.end() ? none : it->second;
}

const std::vector<std::size_t>& Lexicon::colors_starting_with(const std::string& token) const {
    static const std::vector<std::size_t> none;
    auto it = color_index_.find(token);
    return it == color_index_.end() ? none : it->second;
}

std::vector<const LexiconEntry*> Lexicon::forms_for(std::string_view target, std::string_view value) const {
    std::vector<const LexiconEntry*> out;
    for (const auto& e : entries_)
        if (e.target == target && e.value == value) out.push_back(&e);
    return out;
}

const ColorTerm* Lexicon::find_color(std::string_view name) const {
    for (const auto& c : colors_)
        if (c.name == name) return &c;
    return nullptr;
}

Lexicon parse_lexicon(std::string_view text, const ComponentCatalog& catalog) {
    std::vector<LexiconEntry> entries;
    std::vector<ColorTerm> colors;
    std::vector<std::string> distractors;
    std::set<std::pair<std::string, std::string>> seen;
    std::set<std::string> color_names;

    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // Whole-line comments, or a trailing comment after the priority field
        // ('#' elsewhere is part of a color value).
        if (trim(line).empty() || trim(line).front() == '#') continue;
        if (const auto bar = line.rfind('|'); bar != std::string::npos)
            if (const auto hash = line.find('#', bar); hash != std::string::npos) line.erase(hash);
        const std::string where = "lexicon line " + std::to_string(line_no);
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const auto bar = line.find('|', start);
            fields.push_back(trim(std::string_view(line).substr(start, bar - start)));
            if (bar == std::string::npos) break;
            start = bar + 1;
        }
        if (fields.size() != 4) throw LexiconError(where + ": expected 'form | target | value | priority'");
        const std::string& form = fields[0];
        const std::string& target = fields[1];
        const std::string& value = fields[2];
        int priority = 0;
        auto [p, ec] = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), priority);
        if (ec != std::errc{} || p != fields[3].data() + fields[3].size())
            throw LexiconError(where + ": bad priority '" + fields[3] + "'");

        if (target == kTargetFiller) {
            distractors.push_back(form);
            continue;
        }
        auto tokens = tokenize(form);
        if (tokens.empty()) throw LexiconError(where + ": empty surface form");
        std::string canonical;
        for (const auto& t : tokens) canonical += (canonical.empty() ? "" : " ") + t;
        if (!seen.insert({canonical, target}).second)
            throw LexiconError(where + ": duplicate surface form '" + canonical + "' for " + target);

        if (target == kTargetColor) {
            auto rgb = parse_hex(value);
            if (!rgb) throw LexiconError(where + ": color value must be #rrggbb");
            if (!color_names.insert(canonical).second) throw LexiconError(where + ": duplicate color " + canonical);
            colors.push_back({std::move(tokens), canonical, *rgb});
            continue;
        }
        if (target != kTargetIgnore) {
            if (catalog.find_slot(target)) {
                if (!catalog.find_variant(target, value))
                    throw LexiconError(where + ": '" + value + "' is not a variant of slot " + target);
            } else if (const AttributeDomain* a = catalog.find_attribute(target)) {
                if (value != kAnchorValue && std::find(a->values.begin(), a->values.end(), value) == a->values.end())
                    throw LexiconError(where + ": '" + value + "' is not in the domain of " + target);
            } else {
                throw LexiconError(where + ": unknown target '" + target + "'");
            }
        }
        entries.push_back({std::move(tokens), target, value, priority});
    }
    return Lexicon(std::move(entries), std::move(colors), std::move(distractors));
}

Lexicon load_lexicon(const std::filesystem::path& path, const ComponentCatalog& catalog) {
    std::ifstream in(path);
    if (!in) throw LexiconError("cannot open lexicon " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_lexicon(ss.str(), catalog);
    } catch (const LexiconError& e) {
        throw LexiconError(path.string() + ": " + e.what());
    }
}

bool ParsedDescription::same_content(const ParsedDescription& o) const {
    return selection == o.selection && colors == o.colors && attributes == o.attributes;
}

std::string serialize_gold(const ParsedDescription& d) {
    nlohmann::json j;
    j["selection"] = d.selection;
    j["attributes"] = d.attributes;
    nlohmann::json colors = nlohmann::json::object();
    for (const auto& [k, c] : d.colors) colors[k] = to_hex(c);
    j["colors"] = colors;
    return j.dump();
}

ParsedDescription deserialize_gold(std::string_view line) {
    ParsedDescription d;
    try {
        const auto j = nlohmann::json::parse(line);
        d.selection = j.at("selection").get<std::map<std::string, std::string>>();
        d.attributes = j.at("attributes").get<std::map<std::string, std::string>>();
        for (const auto& [k, v] : j.at("colors").items()) {
            auto c = parse_hex(v.get<std::string>());
            if (!c) throw std::invalid_argument("bad color for " + k);
            d.colors[k] = *c;
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed gold record: ") + e.what());
    }
    return d;
}

namespace {

struct ColorHit {
    std::size_t first = 0, last = 0;  // token indices
    const ColorTerm* term = nullptr;
};

struct TermHit {
    std::size_t first = 0, head = 0;  // head = last token of the form
    const LexiconEntry* entry = nullptr;
};

}  // namespace

ParsedDescription parse_description(std::string_view text, const Lexicon& lexicon, const ComponentCatalog& catalog) {
    ParsedDescription out;
    const std::vector<std::string> tokens = tokenize(text);
    const std::size_t n = tokens.size();

    // Pass 1: colors, longest match.
    std::vector<ColorHit> colors;
    std::vector<char> is_color(n, 0);
    for (std::size_t i = 0; i < n;) {
        const ColorTerm* best = nullptr;
        for (std::size_t idx : lexicon.colors_starting_with(tokens[i])) {
            const ColorTerm& c = lexicon.color_terms()[idx];
            if (i + c.tokens.size() <= n && std::equal(c.tokens.begin(), c.tokens.end(), tokens.begin() + i)) {
                best = &c;
                break;  // candidates are sorted longest first
            }
        }
        if (!best) {
            ++i;
            continue;
        }
        colors.push_back({i, i + best->tokens.size() - 1, best});
        for (std::size_t k = 0; k < best->tokens.size(); ++k) is_color[i + k] = 1;
        i += best->tokens.size();
    }

    // Pass 2: component/attribute forms over the non-color tokens.
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < n; ++i)
        if (!is_color[i]) rest.push_back(i);
    std::vector<TermHit> terms;
    for (std::size_t j = 0; j < rest.size();) {
        const LexiconEntry* best = nullptr;
        for (std::size_t idx : lexicon.entries_starting_with(tokens[rest[j]])) {
            const LexiconEntry& e = lexicon.entries()[idx];
            if (j + e.tokens.size() > rest.size()) continue;
            bool ok = true;
            for (std::size_t k = 0; k < e.tokens.size() && ok; ++k) ok = tokens[rest[j + k]] == e.tokens[k];
            if (ok) {
                best = &e;
                break;  // sorted by length, priority, manifest order
            }
        }
        if (!best) {
            out.unmatched_tokens.push_back(tokens[rest[j]]);
            ++j;
            continue;
        }
        terms.push_back({rest[j], rest[j + best->tokens.size() - 1], best});
        j += best->tokens.size();
    }

    // Selections and attribute values, last mention wins.
    for (const auto& t : terms) {
        const LexiconEntry& e = *t.entry;
        if (catalog.find_slot(e.target)) {
            if (const auto* group = catalog.exclusive_group_of(e.target))
                for (const auto& other : *group) out.selection.erase(other);
            out.selection[e.target] = e.value;
        } else if (e.target != kTargetIgnore && e.value != kAnchorValue) {
            out.attributes[e.target] = e.value;
        }
    }

    // Color binding: nearest term whose head lies 1..window tokens right of the
    // color, else the closest term before it.
    for (const auto& c : colors) {
        const TermHit* bound = nullptr;
        for (const auto& t : terms)
            if (t.head > c.last && t.head - c.last <= static_cast<std::size_t>(kColorWindow)) {
                bound = &t;
                break;
            }
        if (!bound)
            for (const auto& t : terms)
                if (t.head < c.first) bound = &t;
        if (!bound) {
            for (const auto& tok : c.term->tokens) out.unmatched_tokens.push_back(tok);
            continue;
        }
        const LexiconEntry& e = *bound->entry;
        if (e.target == kTargetIgnore) continue;
        out.colors[e.target] = c.term->rgb;
        if (const AttributeDomain* a = catalog.find_attribute(e.target);
            a && e.value == kAnchorValue &&
            std::find(a->values.begin(), a->values.end(), c.term->name) != a->values.end())
            out.attributes[e.target] = c.term->name;
    }
    return out;
}

}  // namespace toonforge

#include "toonforge/textparse.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace toonforge {

namespace {

constexpr std::string_view kOpeners[] = {
    "a girl with",          "a boy with",           "an anime girl with", "a cute character with",
    "draw a cartoon girl with", "a young woman with", "a chibi boy with",   "please make a character with",
};

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string s;
    for (const auto& t : tokens) s += (s.empty() ? "" : " ") + t;
    return s;
}

bool chance(std::mt19937_64& rng, int percent) { return static_cast<int>(uniform_index(rng, 100)) < percent; }

template <class T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
    return v[uniform_index(rng, v.size())];
}

struct ColorAttribute {
    const AttributeDomain* domain = nullptr;
    std::vector<const LexiconEntry*> anchors;
    std::vector<const ColorTerm*> values;  // colors named like domain values
};

struct ValueAttribute {
    const AttributeDomain* domain = nullptr;
    std::vector<std::pair<std::string, std::vector<const LexiconEntry*>>> values;  // value -> forms
};

}  // namespace

std::vector<CorpusPair> generate_corpus(const ComponentCatalog& catalog, const Lexicon& lexicon, std::size_t n,
                                        std::uint64_t seed, Noise noise) {
    if (n == 0) throw std::invalid_argument("generate_corpus: n must be >= 1");

    // Precompute how every catalog value can be said.
    std::map<std::string, std::vector<std::vector<const LexiconEntry*>>> slot_forms;  // slot -> per variant forms
    for (const auto& slot : catalog.slots)
        for (const auto& v : catalog.variants.at(slot.id)) {
            auto forms = lexicon.forms_for(slot.id, v.id);
            if (forms.empty())
                throw std::invalid_argument("generate_corpus: lexicon has no surface form for " + slot.id + "/" + v.id);
            slot_forms[slot.id].push_back(std::move(forms));
        }
    std::vector<ColorAttribute> color_attrs;
    std::vector<ValueAttribute> value_attrs;
    for (const auto& a : catalog.attribute_domains) {
        auto anchors = lexicon.forms_for(a.id, kAnchorValue);
        if (!anchors.empty()) {
            ColorAttribute ca{&a, std::move(anchors), {}};
            for (const auto& v : a.values)
                if (const ColorTerm* c = lexicon.find_color(v)) ca.values.push_back(c);
            if (!ca.values.empty()) color_attrs.push_back(std::move(ca));
            continue;
        }
        ValueAttribute va{&a, {}};
        for (const auto& v : a.values)
            if (auto forms = lexicon.forms_for(a.id, v); !forms.empty()) va.values.emplace_back(v, std::move(forms));
        if (!va.values.empty()) value_attrs.push_back(std::move(va));
    }
    std::vector<const ColorTerm*> palette;
    for (const auto& c : lexicon.color_terms()) palette.push_back(&c);
    if (palette.empty()) throw std::invalid_argument("generate_corpus: lexicon has no color terms");

    std::mt19937_64 rng(seed);
    std::vector<CorpusPair> corpus;
    corpus.reserve(n);
    const bool noisy = noise == Noise::on;
    auto choose_form = [&](const std::vector<const LexiconEntry*>& forms) -> const LexiconEntry& {
        return noisy ? *pick(rng, forms) : *forms.front();
    };

    for (std::size_t i = 0; i < n; ++i) {
        CorpusPair pair;
        std::vector<std::vector<std::string>> phrases;

        std::set<std::string> excluded;
        for (const auto& g : catalog.exclusive_groups) {
            const std::size_t keep = uniform_index(rng, g.size());
            for (std::size_t k = 0; k < g.size(); ++k)
                if (k != keep) excluded.insert(g[k]);
        }
        for (const auto& slot : catalog.slots) {
            if (excluded.count(slot.id) || !chance(rng, 60)) continue;
            const auto& variants = catalog.variants.at(slot.id);
            const std::size_t vi = uniform_index(rng, variants.size());
            pair.gold.selection[slot.id] = variants[vi].id;
            std::vector<std::string> words = choose_form(slot_forms[slot.id][vi]).tokens;
            if (chance(rng, 40)) {
                const ColorTerm* c = pick(rng, palette);
                pair.gold.colors[slot.id] = c->rgb;
                // Hair reads naturally with the color inside: "long pink back hair".
                const bool inside = slot.id.ends_with("_hair") && words.size() >= 2 && chance(rng, 35);
                words.insert(words.begin() + (inside ? 1 : 0), c->tokens.begin(), c->tokens.end());
            }
            phrases.push_back(std::move(words));
        }
        for (const auto& ca : color_attrs) {
            if (!chance(rng, 50)) continue;
            const ColorTerm* c = pick(rng, ca.values);
            pair.gold.colors[ca.domain->id] = c->rgb;
            pair.gold.attributes[ca.domain->id] = c->name;
            std::vector<std::string> words = c->tokens;
            const auto& anchor = choose_form(ca.anchors).tokens;
            words.insert(words.end(), anchor.begin(), anchor.end());
            phrases.push_back(std::move(words));
        }
        for (const auto& va : value_attrs) {
            if (!chance(rng, 30)) continue;
            const auto& [value, forms] = pick(rng, va.values);
            pair.gold.attributes[va.domain->id] = value;
            phrases.push_back(choose_form(forms).tokens);
        }
        for (std::size_t k = phrases.size(); k > 1; --k) std::swap(phrases[k - 1], phrases[uniform_index(rng, k)]);

        if (noisy && !lexicon.distractor_pool().empty()) {
            const std::size_t extra = uniform_index(rng, 4);
            for (std::size_t k = 0; k < extra; ++k) {
                const std::size_t at = uniform_index(rng, phrases.size() + 1);
                phrases.insert(phrases.begin() + static_cast<std::ptrdiff_t>(at),
                               tokenize(pick(rng, lexicon.distractor_pool())));
            }
        }

        std::string text(kOpeners[uniform_index(rng, std::size(kOpeners))]);
        for (std::size_t k = 0; k < phrases.size(); ++k) {
            if (k == 0)
                text += ' ';
            else if (k + 1 == phrases.size())
                text += " and ";
            else
                text += ", ";
            text += join_tokens(phrases[k]);
        }
        pair.text = std::move(text);
        corpus.push_back(std::move(pair));
    }
    return corpus;
}

std::string write_corpus(const std::vector<CorpusPair>& corpus) {
    std::string out;
    for (const auto& p : corpus) {
        if (p.text.find_first_of("\t\n") != std::string::npos)
            throw std::invalid_argument("write_corpus: text contains a tab or newline");
        out += p.text;
        out += '\t';
        out += serialize_gold(p.gold);
        out += '\n';
    }
    return out;
}

std::vector<CorpusPair> read_corpus(std::string_view text) {
    std::vector<CorpusPair> corpus;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw std::invalid_argument("corpus line " + std::to_string(line_no) + ": no tab");
        corpus.push_back({line.substr(0, tab), deserialize_gold(std::string_view(line).substr(tab + 1))});
    }
    return corpus;
}

AccuracyReport evaluate_parser(const std::vector<CorpusPair>& corpus, const Lexicon& lexicon,
                               const ComponentCatalog& catalog) {
    if (corpus.empty()) throw std::invalid_argument("evaluate_parser: empty corpus");
    std::map<std::string, std::size_t> slot_ok, attr_ok;
    std::size_t exact = 0;
    auto get = [](const std::map<std::string, std::string>& m, const std::string& k) -> std::string {
        auto it = m.find(k);
        return it == m.end() ? std::string("<absent>") : it->second;
    };
    for (const auto& pair : corpus) {
        const ParsedDescription pred = parse_description(pair.text, lexicon, catalog);
        for (const auto& slot : catalog.slots)
            slot_ok[slot.id] += get(pred.selection, slot.id) == get(pair.gold.selection, slot.id) ? 1 : 0;
        for (const auto& a : catalog.attribute_domains)
            attr_ok[a.id] += get(pred.attributes, a.id) == get(pair.gold.attributes, a.id) ? 1 : 0;
        exact += pred.same_content(pair.gold) ? 1 : 0;
    }
    AccuracyReport r;
    r.n = corpus.size();
    const double total = static_cast<double>(r.n);
    for (const auto& slot : catalog.slots) r.per_slot_accuracy[slot.id] = static_cast<double>(slot_ok[slot.id]) / total;
    for (const auto& a : catalog.attribute_domains) r.per_attribute_accuracy[a.id] = static_cast<double>(attr_ok[a.id]) / total;
    r.exact_match = static_cast<double>(exact) / total;
    return r;
}

}  // namespace toonforge

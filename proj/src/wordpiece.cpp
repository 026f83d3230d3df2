#include "sparsekit/wordpiece.hpp"

#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sparsekit/analyzer.hpp"

namespace sparsekit {

namespace {

std::vector<std::string> whitespace_split(std::string_view text) {
    std::vector<std::string> words;
    std::string current;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            if (!current.empty()) {
                words.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

// splits a word into its single-codepoint units: first codepoint bare, the
// rest with the continuation prefix
std::vector<std::string> char_units(const std::string& word) {
    std::vector<std::string> units;
    std::size_t i = 0;
    bool first = true;
    while (i < word.size()) {
        std::size_t start = i;
        decode_utf8(word, i);
        std::string unit = first ? "" : "##";
        unit.append(word, start, i - start);
        units.push_back(std::move(unit));
        first = false;
    }
    return units;
}

std::string strip_continuation(const std::string& unit) {
    return unit.rfind("##", 0) == 0 ? unit.substr(2) : unit;
}

}  // namespace

SubwordModel::SubwordModel(std::vector<std::string> units) : units_(std::move(units)) {
    for (const auto& unit : units_) {
        if (!unit_set_.insert(unit).second)
            throw std::invalid_argument("duplicate subword unit: " + unit);
    }
}

std::vector<std::string> SubwordModel::tokenize_word(const std::string& word) const {
    std::vector<std::string> pieces;
    if (word.empty()) return pieces;
    std::size_t start = 0;
    while (start < word.size()) {
        std::size_t end = word.size();
        std::string piece;
        bool found = false;
        while (end > start) {
            std::string candidate = (start > 0 ? "##" : "") + word.substr(start, end - start);
            if (unit_set_.count(candidate)) {
                piece = std::move(candidate);
                found = true;
                break;
            }
            --end;
        }
        if (!found) return {kUnknown};  // unsegmentable word
        pieces.push_back(std::move(piece));
        start = end;
    }
    return pieces;
}

std::vector<std::string> SubwordModel::tokenize(std::string_view text) const {
    std::vector<std::string> tokens;
    for (const auto& word : whitespace_split(text)) {
        auto pieces = tokenize_word(word);
        tokens.insert(tokens.end(), pieces.begin(), pieces.end());
    }
    return tokens;
}

std::size_t wordpiece_alphabet_size(const std::vector<std::string>& corpus_lines) {
    std::unordered_set<std::string> alphabet;
    for (const auto& line : corpus_lines)
        for (auto& word : whitespace_split(line))
            for (auto& unit : char_units(word)) alphabet.insert(std::move(unit));
    return alphabet.size();
}

SubwordModel train_wordpiece(const std::vector<std::string>& corpus_lines,
                             std::size_t target_size) {
    // word frequencies; std::map keeps iteration deterministic
    std::map<std::string, std::size_t> word_freq;
    for (const auto& line : corpus_lines)
        for (auto& word : whitespace_split(line)) ++word_freq[word];
    if (word_freq.empty()) throw std::invalid_argument("train_wordpiece: empty corpus");

    struct WordState {
        std::vector<std::string> units;
        std::size_t freq;
    };
    std::vector<WordState> words;
    words.reserve(word_freq.size());
    std::set<std::string> alphabet;  // ordered: alphabet units sort ahead of merges
    for (const auto& [word, freq] : word_freq) {
        WordState state{char_units(word), freq};
        for (const auto& unit : state.units) alphabet.insert(unit);
        words.push_back(std::move(state));
    }
    if (target_size < alphabet.size())
        throw std::invalid_argument("train_wordpiece: target size " +
                                    std::to_string(target_size) +
                                    " is below the alphabet size " +
                                    std::to_string(alphabet.size()));

    std::vector<std::string> units(alphabet.begin(), alphabet.end());
    units.reserve(target_size);
    std::unordered_set<std::string> unit_set(units.begin(), units.end());

    while (units.size() < target_size) {
        std::map<std::pair<std::string, std::string>, std::size_t> pair_freq;
        std::map<std::string, std::size_t> unit_freq;
        for (const auto& word : words) {
            for (std::size_t i = 0; i < word.units.size(); ++i) {
                unit_freq[word.units[i]] += word.freq;
                if (i + 1 < word.units.size())
                    pair_freq[{word.units[i], word.units[i + 1]}] += word.freq;
            }
        }
        if (pair_freq.empty()) break;

        // best score by exact rational comparison: pf/(fl*fr)
        const std::pair<std::string, std::string>* best = nullptr;
        unsigned __int128 best_num = 0, best_den = 1;
        for (const auto& [pair, pf] : pair_freq) {
            unsigned __int128 num = pf;
            unsigned __int128 den = static_cast<unsigned __int128>(unit_freq[pair.first]) *
                                    unit_freq[pair.second];
            if (!best || num * best_den > best_num * den) {
                best = &pair;
                best_num = num;
                best_den = den;
            }
        }
        std::string merged = best->first + strip_continuation(best->second);
        if (unit_set.count(merged)) {
            // already present (possible when distinct merges collide); apply
            // the merge to the words but do not re-add the unit
        } else {
            units.push_back(merged);
            unit_set.insert(merged);
        }
        const std::string left = best->first;
        const std::string right = best->second;
        for (auto& word : words) {
            std::vector<std::string> next;
            next.reserve(word.units.size());
            std::size_t i = 0;
            while (i < word.units.size()) {
                if (i + 1 < word.units.size() && word.units[i] == left &&
                    word.units[i + 1] == right) {
                    next.push_back(merged);
                    i += 2;
                } else {
                    next.push_back(word.units[i]);
                    ++i;
                }
            }
            word.units = std::move(next);
        }
    }
    return SubwordModel(std::move(units));
}

}  // namespace sparsekit

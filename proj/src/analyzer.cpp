#include "sparsekit/analyzer.hpp"

#include <algorithm>

namespace sparsekit {

namespace {

// Porter stemmer, ported from the reference C implementation. `end_` is the
// index of the last live character, `stem_end_` marks the stem boundary set
// by ends().
class PorterStemmer {
  public:
    std::string stem(std::string word) {
        buf_ = std::move(word);
        end_ = static_cast<int>(buf_.size()) - 1;
        if (end_ <= 1) return buf_;  // length <= 2: leave unchanged
        step1ab();
        step1c();
        step2();
        step3();
        step4();
        step5();
        buf_.resize(static_cast<std::size_t>(end_) + 1);
        return buf_;
    }

  private:
    std::string buf_;
    int end_ = -1;
    int stem_end_ = -1;

    bool is_consonant(int i) const {
        switch (buf_[static_cast<std::size_t>(i)]) {
            case 'a': case 'e': case 'i': case 'o': case 'u':
                return false;
            case 'y':
                return i == 0 ? true : !is_consonant(i - 1);
            default:
                return true;
        }
    }

    // measure of buf_[0..stem_end_]: [C](VC)^m[V]
    int measure() const {
        int n = 0;
        int i = 0;
        while (true) {
            if (i > stem_end_) return n;
            if (!is_consonant(i)) break;
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i > stem_end_) return n;
                if (is_consonant(i)) break;
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i > stem_end_) return n;
                if (!is_consonant(i)) break;
                ++i;
            }
            ++i;
        }
    }

    bool vowel_in_stem() const {
        for (int i = 0; i <= stem_end_; ++i)
            if (!is_consonant(i)) return true;
        return false;
    }

    bool double_consonant(int i) const {
        if (i < 1) return false;
        if (buf_[static_cast<std::size_t>(i)] != buf_[static_cast<std::size_t>(i - 1)]) return false;
        return is_consonant(i);
    }

    // consonant-vowel-consonant ending at i, last consonant not w, x or y
    bool cvc(int i) const {
        if (i < 2 || !is_consonant(i) || is_consonant(i - 1) || !is_consonant(i - 2)) return false;
        char ch = buf_[static_cast<std::size_t>(i)];
        return ch != 'w' && ch != 'x' && ch != 'y';
    }

    bool ends(std::string_view s) {
        int len = static_cast<int>(s.size());
        if (len > end_ + 1) return false;
        if (buf_.compare(static_cast<std::size_t>(end_ - len + 1), static_cast<std::size_t>(len), s) != 0)
            return false;
        stem_end_ = end_ - len;
        return true;
    }

    void set_to(std::string_view s) {
        buf_.replace(static_cast<std::size_t>(stem_end_ + 1),
                     static_cast<std::size_t>(end_ - stem_end_), s);
        end_ = stem_end_ + static_cast<int>(s.size());
    }

    void replace_if_measure(std::string_view s) {
        if (measure() > 0) set_to(s);
    }

    void step1ab() {
        if (buf_[static_cast<std::size_t>(end_)] == 's') {
            if (ends("sses")) {
                end_ -= 2;
            } else if (ends("ies")) {
                set_to("i");
            } else if (buf_[static_cast<std::size_t>(end_ - 1)] != 's') {
                --end_;
            }
        }
        if (ends("eed")) {
            if (measure() > 0) --end_;
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            end_ = stem_end_;
            if (ends("at")) {
                set_to("ate");
            } else if (ends("bl")) {
                set_to("ble");
            } else if (ends("iz")) {
                set_to("ize");
            } else if (double_consonant(end_)) {
                --end_;
                char ch = buf_[static_cast<std::size_t>(end_)];
                if (ch == 'l' || ch == 's' || ch == 'z') ++end_;
            } else {
                stem_end_ = end_;
                if (measure() == 1 && cvc(end_)) set_to("e");
            }
        }
    }

    void step1c() {
        if (ends("y") && vowel_in_stem()) buf_[static_cast<std::size_t>(end_)] = 'i';
    }

    void step2() {
        if (end_ < 1) return;
        switch (buf_[static_cast<std::size_t>(end_ - 1)]) {
            case 'a':
                if (ends("ational")) { replace_if_measure("ate"); break; }
                if (ends("tional")) { replace_if_measure("tion"); break; }
                break;
            case 'c':
                if (ends("enci")) { replace_if_measure("ence"); break; }
                if (ends("anci")) { replace_if_measure("ance"); break; }
                break;
            case 'e':
                if (ends("izer")) { replace_if_measure("ize"); break; }
                break;
            case 'l':
                if (ends("abli")) { replace_if_measure("able"); break; }
                if (ends("alli")) { replace_if_measure("al"); break; }
                if (ends("entli")) { replace_if_measure("ent"); break; }
                if (ends("eli")) { replace_if_measure("e"); break; }
                if (ends("ousli")) { replace_if_measure("ous"); break; }
                break;
            case 'o':
                if (ends("ization")) { replace_if_measure("ize"); break; }
                if (ends("ation")) { replace_if_measure("ate"); break; }
                if (ends("ator")) { replace_if_measure("ate"); break; }
                break;
            case 's':
                if (ends("alism")) { replace_if_measure("al"); break; }
                if (ends("iveness")) { replace_if_measure("ive"); break; }
                if (ends("fulness")) { replace_if_measure("ful"); break; }
                if (ends("ousness")) { replace_if_measure("ous"); break; }
                break;
            case 't':
                if (ends("aliti")) { replace_if_measure("al"); break; }
                if (ends("iviti")) { replace_if_measure("ive"); break; }
                if (ends("biliti")) { replace_if_measure("ble"); break; }
                break;
            case 'g':  // reference-implementation departure
                if (ends("logi")) { replace_if_measure("log"); break; }
                break;
            default:
                break;
        }
    }

    void step3() {
        switch (buf_[static_cast<std::size_t>(end_)]) {
            case 'e':
                if (ends("icate")) { replace_if_measure("ic"); break; }
                if (ends("ative")) { replace_if_measure(""); break; }
                if (ends("alize")) { replace_if_measure("al"); break; }
                break;
            case 'i':
                if (ends("iciti")) { replace_if_measure("ic"); break; }
                break;
            case 'l':
                if (ends("ical")) { replace_if_measure("ic"); break; }
                if (ends("ful")) { replace_if_measure(""); break; }
                break;
            case 's':
                if (ends("ness")) { replace_if_measure(""); break; }
                break;
            default:
                break;
        }
    }

    void step4() {
        if (end_ < 1) return;
        switch (buf_[static_cast<std::size_t>(end_ - 1)]) {
            case 'a':
                if (ends("al")) break;
                return;
            case 'c':
                if (ends("ance")) break;
                if (ends("ence")) break;
                return;
            case 'e':
                if (ends("er")) break;
                return;
            case 'i':
                if (ends("ic")) break;
                return;
            case 'l':
                if (ends("able")) break;
                if (ends("ible")) break;
                return;
            case 'n':
                if (ends("ant")) break;
                if (ends("ement")) break;
                if (ends("ment")) break;
                if (ends("ent")) break;
                return;
            case 'o':
                if (ends("ion") && stem_end_ >= 0 &&
                    (buf_[static_cast<std::size_t>(stem_end_)] == 's' ||
                     buf_[static_cast<std::size_t>(stem_end_)] == 't'))
                    break;
                if (ends("ou")) break;
                return;
            case 's':
                if (ends("ism")) break;
                return;
            case 't':
                if (ends("ate")) break;
                if (ends("iti")) break;
                return;
            case 'u':
                if (ends("ous")) break;
                return;
            case 'v':
                if (ends("ive")) break;
                return;
            case 'z':
                if (ends("ize")) break;
                return;
            default:
                return;
        }
        if (measure() > 1) end_ = stem_end_;
    }

    void step5() {
        stem_end_ = end_;
        if (buf_[static_cast<std::size_t>(end_)] == 'e') {
            int m = measure();
            if (m > 1 || (m == 1 && !cvc(end_ - 1))) --end_;
        }
        if (buf_[static_cast<std::size_t>(end_)] == 'l' && double_consonant(end_)) {
            stem_end_ = end_;
            if (measure() > 1) --end_;
        }
    }
};

bool is_ascii(std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

}  // namespace

std::string porter_stem(std::string word) {
    PorterStemmer stemmer;
    return stemmer.stem(std::move(word));
}

const std::unordered_set<std::string>& english_stopwords() {
    // Stock Lucene English stop set.
    static const std::unordered_set<std::string> kStopwords = {
        "a",    "an",   "and",   "are",  "as",    "at",    "be",   "but",  "by",
        "for",  "if",   "in",    "into", "is",    "it",    "no",   "not",  "of",
        "on",   "or",   "such",  "that", "the",   "their", "then", "there",
        "these", "they", "this", "to",   "was",   "will",  "with"};
    return kStopwords;
}

AnalyzerConfig AnalyzerConfig::english() {
    AnalyzerConfig config;
    config.stemming = true;
    config.stopwords = english_stopwords();
    return config;
}

AnalyzerConfig AnalyzerConfig::plain() {
    AnalyzerConfig config;
    config.stemming = false;
    return config;
}

char32_t decode_utf8(std::string_view s, std::size_t& i) {
    constexpr char32_t kReplacement = 0xFFFD;
    unsigned char c0 = static_cast<unsigned char>(s[i]);
    if (c0 < 0x80) {
        ++i;
        return c0;
    }
    int extra;
    char32_t cp;
    if ((c0 & 0xE0) == 0xC0) {
        extra = 1;
        cp = c0 & 0x1F;
    } else if ((c0 & 0xF0) == 0xE0) {
        extra = 2;
        cp = c0 & 0x0F;
    } else if ((c0 & 0xF8) == 0xF0) {
        extra = 3;
        cp = c0 & 0x07;
    } else {
        ++i;
        return kReplacement;
    }
    if (i + static_cast<std::size_t>(extra) >= s.size()) {
        ++i;
        return kReplacement;
    }
    for (int k = 1; k <= extra; ++k) {
        unsigned char c = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
        if ((c & 0xC0) != 0x80) {
            ++i;
            return kReplacement;
        }
        cp = (cp << 6) | (c & 0x3F);
    }
    i += static_cast<std::size_t>(extra) + 1;
    return cp;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_word_codepoint(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    }
    if (cp >= 0xC0 && cp <= 0xFF) return cp != 0xD7 && cp != 0xF7;  // Latin-1 letters
    if (cp >= 0x100 && cp <= 0x24F) return true;                    // Latin Extended-A/B
    if (cp >= 0x370 && cp <= 0x3FF) return cp != 0x37E && cp != 0x387;  // Greek
    if (cp >= 0x400 && cp <= 0x4FF) return true;                    // Cyrillic
    if (cp >= 0x5D0 && cp <= 0x5EA) return true;                    // Hebrew
    if (cp >= 0x620 && cp <= 0x64A) return true;                    // Arabic
    if (cp >= 0x3040 && cp <= 0x30FF) return cp != 0x30FB;          // Kana
    if (cp >= 0x4E00 && cp <= 0x9FFF) return true;                  // CJK
    if (cp >= 0xAC00 && cp <= 0xD7A3) return true;                  // Hangul
    return false;
}

bool is_digit_codepoint(char32_t cp) {
    if (cp >= '0' && cp <= '9') return true;
    if (cp >= 0x660 && cp <= 0x669) return true;       // Arabic-Indic
    if (cp >= 0x6F0 && cp <= 0x6F9) return true;       // Extended Arabic-Indic
    if (cp >= 0xFF10 && cp <= 0xFF19) return true;     // fullwidth
    return false;
}

bool is_punct_or_symbol_codepoint(char32_t cp) {
    if (cp < 0x80) {
        if ((cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z'))
            return false;
        return cp > 0x20 && cp < 0x7F;
    }
    if (cp >= 0xA1 && cp <= 0xBF) return true;
    if (cp == 0xD7 || cp == 0xF7) return true;
    if (cp == 0x37E || cp == 0x387) return true;
    if (cp >= 0x2000 && cp <= 0x206F) return true;   // general punctuation
    if (cp >= 0x20A0 && cp <= 0x20CF) return true;   // currency
    if (cp >= 0x2100 && cp <= 0x2BFF) return true;   // symbols, arrows, math
    if (cp >= 0x3000 && cp <= 0x303F) return true;   // CJK punctuation
    if (cp == 0x30FB) return true;
    if (cp >= 0xFE30 && cp <= 0xFE4F) return true;
    if (cp >= 0xFF01 && cp <= 0xFF0F) return true;
    if (cp >= 0xFF1A && cp <= 0xFF20) return true;
    if (cp >= 0xFF3B && cp <= 0xFF40) return true;
    if (cp >= 0xFF5B && cp <= 0xFF65) return true;
    return false;
}

char32_t fold_case_codepoint(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;  // Latin-1
    return cp;
}

AnalyzedText analyze(std::string_view text, const AnalyzerConfig& config) {
    AnalyzedText result;
    std::vector<std::string> raw;
    std::string current;
    std::size_t i = 0;
    while (i < text.size()) {
        char32_t cp = decode_utf8(text, i);
        if (is_word_codepoint(cp)) {
            append_utf8(current, fold_case_codepoint(cp));
        } else if (!current.empty()) {
            raw.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) raw.push_back(std::move(current));

    result.source_length_tokens = raw.size();
    result.tokens.reserve(raw.size());
    for (auto& token : raw) {
        if (config.stopwords.count(token)) continue;
        if (config.stemming && is_ascii(token)) token = porter_stem(std::move(token));
        result.tokens.push_back(std::move(token));
    }
    return result;
}

}  // namespace sparsekit

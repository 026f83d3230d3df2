#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace sparsekit {

/// Text analysis pipeline: lowercase -> split on non-alphanumeric codepoints
/// -> stopword removal -> Porter stemming. Matches the classic Lucene English
/// chain, which is what standard IR toolkits apply before indexing.
struct AnalyzerConfig {
    bool stemming = true;
    std::unordered_set<std::string> stopwords;

    /// Default English configuration: the stock 33-word Lucene stop set plus
    /// Porter stemming.
    static AnalyzerConfig english();

    /// Lowercasing/splitting only (no stopwords, no stemming).
    static AnalyzerConfig plain();
};

struct AnalyzedText {
    std::vector<std::string> tokens;
    // token count after splitting, before stopword removal
    std::size_t source_length_tokens = 0;
};

/// Pure and deterministic; safe to call concurrently.
AnalyzedText analyze(std::string_view text, const AnalyzerConfig& config);

/// Porter stemmer (reference implementation behavior, including its marked
/// departures: words of length <= 2 are returned unchanged and "logi" maps
/// to "log"). Input is expected lowercase; tokens containing non-ASCII bytes
/// are returned unchanged.
std::string porter_stem(std::string word);

const std::unordered_set<std::string>& english_stopwords();

// UTF-8 codepoint classification used by the analyzer and by the vocabulary
// noise filter. Covers the scripts exercised by the bundled corpora; unknown
// codepoints are treated as non-word characters.
bool is_word_codepoint(char32_t cp);
bool is_digit_codepoint(char32_t cp);
bool is_punct_or_symbol_codepoint(char32_t cp);
char32_t fold_case_codepoint(char32_t cp);

/// Decodes the codepoint at byte offset `i`, advancing `i`. Invalid bytes
/// decode as U+FFFD and advance by one.
char32_t decode_utf8(std::string_view s, std::size_t& i);
void append_utf8(std::string& out, char32_t cp);

}  // namespace sparsekit

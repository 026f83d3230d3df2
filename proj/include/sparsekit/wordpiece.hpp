#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace sparsekit {

/// Greedy longest-match subword tokenizer with "##" continuation units.
/// Tokenization is total: a word that cannot be segmented becomes [UNK].
class SubwordModel {
  public:
    static constexpr const char* kUnknown = "[UNK]";

    SubwordModel() = default;
    explicit SubwordModel(std::vector<std::string> units);

    const std::vector<std::string>& units() const { return units_; }
    std::size_t size() const { return units_.size(); }
    bool contains(const std::string& unit) const { return unit_set_.count(unit) > 0; }

    std::vector<std::string> tokenize_word(const std::string& word) const;
    /// whitespace pre-tokenization, then per-word segmentation
    std::vector<std::string> tokenize(std::string_view text) const;

  private:
    std::vector<std::string> units_;
    std::unordered_set<std::string> unit_set_;
};

/// Trains a WordPiece vocabulary by greedy pair merging with
/// score = freq(pair) / (freq(left) * freq(right)). Deterministic: ties break
/// on the lexicographically smaller pair. The final vocabulary holds the
/// observed single-character alphabet plus merges, at most `target_size`
/// units.
SubwordModel train_wordpiece(const std::vector<std::string>& corpus_lines,
                             std::size_t target_size);

/// Number of single-character units the corpus induces (the smallest
/// trainable vocabulary size).
std::size_t wordpiece_alphabet_size(const std::vector<std::string>& corpus_lines);

}  // namespace sparsekit

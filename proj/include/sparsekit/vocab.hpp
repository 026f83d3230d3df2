#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "sparsekit/embeddings.hpp"
#include "sparsekit/wordpiece.hpp"

namespace sparsekit {

/// Ordered term table; origin terms first, added terms after them.
class Vocabulary {
  public:
    struct Term {
        std::string text;
        bool is_added;
    };

    static Vocabulary from_terms(const std::vector<std::string>& origin_terms);

    void add(const std::string& term);  // marks the term as added
    bool contains(const std::string& term) const { return set_.count(term) > 0; }
    std::size_t size() const { return terms_.size(); }
    std::size_t origin_size() const { return origin_size_; }
    const std::vector<Term>& terms() const { return terms_; }
    std::vector<std::string> term_strings() const;
    std::vector<std::string> added_terms() const;

  private:
    std::vector<Term> terms_;
    std::unordered_set<std::string> set_;
    std::size_t origin_size_ = 0;
};

// One term per line; added terms follow a `# added` marker line. Other lines
// starting with "# " are ignored as comments.
Vocabulary load_vocabulary(const std::string& path);
void save_vocabulary(const std::string& path, const Vocabulary& vocab);

/// true when the term consists solely of digit, punctuation and symbol
/// codepoints (never admitted by expansion).
bool is_noise_token(std::string_view term);

struct ExpansionConfig {
    std::size_t delta_v = 3000;
    double eps1 = 0.01;
    double eps2 = 0.1;

    enum class StopRule { DeltaV, Entropy1, Entropy2 };
    StopRule stop = StopRule::DeltaV;
};

struct ExpansionIteration {
    std::size_t iteration = 0;    // 1-based
    std::size_t target_size = 0;  // |V0| + iteration * delta_v
    std::size_t admitted = 0;
    std::size_t vocab_size = 0;   // |V_i| after admission
    double entropy = 0.0;         // unigram log-likelihood of this iteration's tokenizer
};

struct ExpansionResult {
    Vocabulary vocab;
    std::vector<ExpansionIteration> report;
};

/// Iterative expansion: per iteration i, train a subword tokenizer at size
/// |V0| + i*delta_v, count its units over the corpus, and admit
/// non-duplicate, non-noise units by descending frequency until the merged
/// vocabulary reaches the target. Each iteration restarts from V0; the
/// default rule stops once an iteration adds fewer than delta_v terms.
ExpansionResult expand_vocabulary(const Vocabulary& v0,
                                  const std::vector<std::string>& corpus_lines,
                                  const ExpansionConfig& config);

/// Mean-of-subwords initialization: each added word's row is the arithmetic
/// mean of its base-tokenizer subword rows.
std::map<std::string, std::vector<double>> init_added_embeddings(
    const Vocabulary& vocab, const EmbeddingTable& base_embeddings,
    const SubwordModel& base_tokenizer);

/// Sum over corpus token occurrences of ln p(token), with p estimated by
/// counting on the same corpus; always <= 0. Conventionally labeled
/// "entropy" although the quantity is a unigram log-likelihood.
double unigram_entropy(const std::vector<std::string>& corpus_lines, const SubwordModel& model);

struct EntropyTriggers {
    std::optional<std::size_t> eps1_iteration;
    std::optional<std::size_t> eps2_iteration;
};

/// Evaluates the two stopping criteria on an entropy curve I_0..I_n.
/// Criteria are evaluated from iteration 2 on (criterion 2 needs the first
/// increment as its reference):
///   criterion 1: |I_i - I_{i-1}| / |I_{i-1}| <= eps1
///   criterion 2: I_i - I_{i-1} <= eps2 * (I_1 - I_0)
EntropyTriggers entropy_triggers(const std::vector<double>& entropies, double eps1, double eps2);

struct EntropyCurvePoint {
    std::size_t iteration = 0;    // 0 = base tokenizer at |V0|
    std::size_t target_size = 0;
    std::size_t actual_size = 0;  // trained tokenizer size (may fall short)
    double entropy = 0.0;
};

struct EntropyStopReport {
    std::vector<EntropyCurvePoint> curve;
    EntropyTriggers triggers;
    std::optional<std::size_t> eps1_size;  // target size at the trigger iteration
    std::optional<std::size_t> eps2_size;
};

/// Runs the tokenizer-size ladder |V0| + i*delta_v, computing the entropy
/// curve and the first iteration (and size) triggering each criterion.
EntropyStopReport entropy_stop_sizes(std::size_t v0_size,
                                     const std::vector<std::string>& corpus_lines,
                                     const ExpansionConfig& config);

}  // namespace sparsekit

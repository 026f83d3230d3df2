#include "sparsekit/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "sparsekit/analyzer.hpp"
#include "sparsekit/util.hpp"

namespace sparsekit {

Vocabulary Vocabulary::from_terms(const std::vector<std::string>& origin_terms) {
    Vocabulary vocab;
    for (const auto& term : origin_terms) {
        if (term.empty()) throw std::invalid_argument("empty vocabulary term");
        if (!vocab.set_.insert(term).second)
            throw std::invalid_argument("duplicate vocabulary term: " + term);
        vocab.terms_.push_back({term, false});
    }
    vocab.origin_size_ = vocab.terms_.size();
    return vocab;
}

void Vocabulary::add(const std::string& term) {
    if (term.empty()) throw std::invalid_argument("empty vocabulary term");
    if (!set_.insert(term).second)
        throw std::invalid_argument("duplicate vocabulary term: " + term);
    terms_.push_back({term, true});
}

std::vector<std::string> Vocabulary::term_strings() const {
    std::vector<std::string> out;
    out.reserve(terms_.size());
    for (const auto& term : terms_) out.push_back(term.text);
    return out;
}

std::vector<std::string> Vocabulary::added_terms() const {
    std::vector<std::string> out;
    for (const auto& term : terms_)
        if (term.is_added) out.push_back(term.text);
    return out;
}

Vocabulary load_vocabulary(const std::string& path) {
    auto lines = read_lines(path);
    Vocabulary vocab;
    std::vector<std::string> origin;
    std::vector<std::string> added;
    bool in_added = false;
    for (const auto& line : lines) {
        if (line.empty()) continue;
        if (line == "# added") {
            in_added = true;
            continue;
        }
        if (line.rfind("# ", 0) == 0) continue;  // comment
        (in_added ? added : origin).push_back(line);
    }
    vocab = Vocabulary::from_terms(origin);
    for (const auto& term : added) vocab.add(term);
    return vocab;
}

void save_vocabulary(const std::string& path, const Vocabulary& vocab) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    bool marker_written = false;
    for (const auto& term : vocab.terms()) {
        if (term.is_added && !marker_written) {
            out << "# added\n";
            marker_written = true;
        }
        out << term.text << '\n';
    }
}

bool is_noise_token(std::string_view term) {
    if (term.empty()) return true;
    std::size_t i = 0;
    while (i < term.size()) {
        char32_t cp = decode_utf8(term, i);
        if (!is_digit_codepoint(cp) && !is_punct_or_symbol_codepoint(cp)) return false;
    }
    return true;
}

namespace {

std::map<std::string, std::size_t> count_tokens(const std::vector<std::string>& corpus_lines,
                                                const SubwordModel& model,
                                                std::size_t* total = nullptr) {
    std::map<std::string, std::size_t> counts;
    std::size_t n = 0;
    for (const auto& line : corpus_lines) {
        for (auto& token : model.tokenize(line)) {
            ++counts[token];
            ++n;
        }
    }
    if (total) *total = n;
    return counts;
}

struct IterationOutcome {
    SubwordModel tokenizer;
    std::vector<std::string> admitted;
    double entropy = 0.0;
};

IterationOutcome run_iteration(const Vocabulary& v0, const std::vector<std::string>& corpus_lines,
                               std::size_t target_size, std::size_t alphabet_size) {
    IterationOutcome outcome;
    // desk-scale base vocabularies can sit below the corpus alphabet; the
    // tokenizer trains at its smallest viable size in that case while the
    // admission target keeps the nominal value
    outcome.tokenizer = train_wordpiece(corpus_lines, std::max(target_size, alphabet_size));
    outcome.entropy = unigram_entropy(corpus_lines, outcome.tokenizer);

    auto counts = count_tokens(corpus_lines, outcome.tokenizer);
    // candidates: every tokenizer unit, by descending corpus frequency, ties
    // by ascending term
    std::vector<std::pair<std::string, std::size_t>> candidates;
    candidates.reserve(outcome.tokenizer.size());
    for (const auto& unit : outcome.tokenizer.units()) {
        auto it = counts.find(unit);
        candidates.push_back({unit, it == counts.end() ? 0 : it->second});
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::size_t size = v0.size();
    std::unordered_set<std::string> admitted_set;
    for (const auto& [unit, freq] : candidates) {
        if (size >= target_size) break;
        if (v0.contains(unit) || admitted_set.count(unit)) continue;
        if (is_noise_token(unit)) continue;
        outcome.admitted.push_back(unit);
        admitted_set.insert(unit);
        ++size;
    }
    return outcome;
}

}  // namespace

ExpansionResult expand_vocabulary(const Vocabulary& v0,
                                  const std::vector<std::string>& corpus_lines,
                                  const ExpansionConfig& config) {
    if (v0.size() == 0) throw std::invalid_argument("expand_vocabulary: empty base vocabulary");
    if (corpus_lines.empty()) throw std::invalid_argument("expand_vocabulary: empty corpus");
    if (config.delta_v == 0) throw std::invalid_argument("expand_vocabulary: delta_v must be > 0");
    if (config.eps1 <= 0.0 || config.eps1 >= 1.0 || config.eps2 <= 0.0 || config.eps2 >= 1.0)
        throw std::invalid_argument("expand_vocabulary: eps values must lie in (0, 1)");

    const std::size_t alphabet = wordpiece_alphabet_size(corpus_lines);
    const bool entropy_rule = config.stop != ExpansionConfig::StopRule::DeltaV;
    std::vector<double> entropies;
    if (entropy_rule)
        entropies.push_back(unigram_entropy(
            corpus_lines, train_wordpiece(corpus_lines, std::max(v0.size(), alphabet))));

    ExpansionResult result;
    std::vector<std::string> last_admitted;
    std::size_t prev_size = v0.size();
    std::size_t prev_tokenizer_size = 0;
    for (std::size_t i = 1;; ++i) {
        std::size_t target = v0.size() + i * config.delta_v;
        IterationOutcome outcome = run_iteration(v0, corpus_lines, target, alphabet);
        std::size_t vocab_size = v0.size() + outcome.admitted.size();
        result.report.push_back({i, target, outcome.admitted.size(), vocab_size, outcome.entropy});
        last_admitted = outcome.admitted;

        if (entropy_rule) {
            entropies.push_back(outcome.entropy);
            EntropyTriggers triggers = entropy_triggers(entropies, config.eps1, config.eps2);
            bool triggered = config.stop == ExpansionConfig::StopRule::Entropy1
                                 ? triggers.eps1_iteration == i
                                 : triggers.eps2_iteration == i;
            if (triggered) break;
            // degenerate corpora can saturate the tokenizer before a
            // criterion fires; a second identical iteration cannot change
            // anything, so stop
            if (i >= 2 && outcome.tokenizer.size() == prev_tokenizer_size &&
                vocab_size == prev_size)
                break;
        } else {
            if (vocab_size - prev_size < config.delta_v) break;
        }
        prev_size = vocab_size;
        prev_tokenizer_size = outcome.tokenizer.size();
    }

    // final vocabulary = v0 (flags preserved) plus the last iteration's
    // admissions in admission order
    std::vector<std::string> origin;
    for (const auto& term : v0.terms())
        if (!term.is_added) origin.push_back(term.text);
    result.vocab = Vocabulary::from_terms(origin);
    for (const auto& term : v0.terms())
        if (term.is_added) result.vocab.add(term.text);
    for (const auto& term : last_admitted) result.vocab.add(term);
    return result;
}

std::map<std::string, std::vector<double>> init_added_embeddings(
    const Vocabulary& vocab, const EmbeddingTable& base_embeddings,
    const SubwordModel& base_tokenizer) {
    std::map<std::string, std::vector<double>> rows;
    for (const auto& word : vocab.added_terms()) {
        auto pieces = base_tokenizer.tokenize_word(word);
        if (pieces.empty())
            throw std::runtime_error("word \"" + word + "\" tokenizes to an empty sequence");
        std::vector<double> mean(base_embeddings.dim(), 0.0);
        for (const auto& piece : pieces) {
            const auto* row = base_embeddings.row(piece);
            if (!row)
                throw std::runtime_error("no base embedding for subword \"" + piece +
                                         "\" of word \"" + word + "\"");
            for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += (*row)[c];
        }
        for (auto& v : mean) v /= static_cast<double>(pieces.size());
        rows[word] = std::move(mean);
    }
    return rows;
}

double unigram_entropy(const std::vector<std::string>& corpus_lines, const SubwordModel& model) {
    std::size_t total = 0;
    auto counts = count_tokens(corpus_lines, model, &total);
    if (total == 0) return 0.0;
    double sum = 0.0;
    for (const auto& [token, count] : counts) {
        double p = static_cast<double>(count) / static_cast<double>(total);
        sum += static_cast<double>(count) * std::log(p);
    }
    return sum;
}

EntropyTriggers entropy_triggers(const std::vector<double>& entropies, double eps1, double eps2) {
    EntropyTriggers triggers;
    if (entropies.size() < 3) return triggers;  // needs I_0, I_1 and at least I_2
    const double first_increment = entropies[1] - entropies[0];
    for (std::size_t i = 2; i < entropies.size(); ++i) {
        double increment = entropies[i] - entropies[i - 1];
        if (!triggers.eps1_iteration) {
            double denom = std::abs(entropies[i - 1]);
            double ratio = denom > 0.0 ? std::abs(increment) / denom : 0.0;
            if (ratio <= eps1) triggers.eps1_iteration = i;
        }
        if (!triggers.eps2_iteration) {
            if (increment <= eps2 * first_increment) triggers.eps2_iteration = i;
        }
        if (triggers.eps1_iteration && triggers.eps2_iteration) break;
    }
    return triggers;
}

EntropyStopReport entropy_stop_sizes(std::size_t v0_size,
                                     const std::vector<std::string>& corpus_lines,
                                     const ExpansionConfig& config) {
    if (v0_size == 0) throw std::invalid_argument("entropy_stop_sizes: empty base vocabulary");
    if (corpus_lines.empty()) throw std::invalid_argument("entropy_stop_sizes: empty corpus");

    EntropyStopReport report;
    const std::size_t alphabet = wordpiece_alphabet_size(corpus_lines);
    std::vector<double> entropies;
    std::size_t prev_actual = 0;
    for (std::size_t i = 0;; ++i) {
        std::size_t target = v0_size + i * config.delta_v;
        SubwordModel model = train_wordpiece(corpus_lines, std::max(target, alphabet));
        double entropy = unigram_entropy(corpus_lines, model);
        report.curve.push_back({i, target, model.size(), entropy});
        entropies.push_back(entropy);

        report.triggers = entropy_triggers(entropies, config.eps1, config.eps2);
        if (report.triggers.eps1_iteration && report.triggers.eps2_iteration) break;
        // saturated tokenizer: the curve is flat from here on, so criteria
        // that have not fired by now never will
        if (i >= 2 && model.size() == prev_actual) break;
        prev_actual = model.size();
    }
    if (report.triggers.eps1_iteration)
        report.eps1_size = v0_size + *report.triggers.eps1_iteration * config.delta_v;
    if (report.triggers.eps2_iteration)
        report.eps2_size = v0_size + *report.triggers.eps2_iteration * config.delta_v;
    return report;
}

}  // namespace sparsekit

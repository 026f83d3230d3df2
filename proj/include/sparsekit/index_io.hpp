#pragma once

#include <memory>
#include <optional>
#include <string>

#include "sparsekit/lexical.hpp"
#include "sparsekit/sparse.hpp"

namespace sparsekit {

/// Build-time settings persisted with an index directory so that search and
/// diagnostics replay the same analysis.
struct IndexMeta {
    bool stemming = true;
    double log_base = std::numbers::e;
    bool idf_weighting = false;

    AnalyzerConfig analyzer() const {
        AnalyzerConfig config = AnalyzerConfig::english();
        config.stemming = stemming;
        return config;
    }
};

struct IndexBundle {
    std::shared_ptr<TermDictionary> dict;
    std::optional<InvertedIndex> lexical;
    std::optional<ImpactIndex> impact;
    IndexMeta meta;
};

/// Directory layout (all files carry a magic header and format version):
///   meta.json    build settings
///   terms.txt    shared term dictionary, one term per line
///   docs.tsv     lexical doc table: doc_id<TAB>token_count
///   lexical.post binary postings, delta-encoded doc ids + varint tf
///   impact.post  binary postings, delta-encoded doc ids + raw doubles
///   impact_docs.tsv  impact doc table (present with impact.post)
///   idf.bin      IDF snapshot baked into impact weights (optional)
void save_index_dir(const std::string& dir, const IndexBundle& bundle);
IndexBundle load_index_dir(const std::string& dir);

}  // namespace sparsekit

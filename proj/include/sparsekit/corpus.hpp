#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sparsekit {

struct Document {
    std::string doc_id;
    std::string title;  // may be empty
    std::string text;

    /// Text used for indexing and analysis: title + " " + text (title-less
    /// documents analyze as plain text).
    std::string indexed_text() const {
        return title.empty() ? text : title + " " + text;
    }
};

struct Query {
    std::string query_id;
    std::string text;
};

/// Graded relevance judgments; duplicate (query_id, doc_id) pairs rejected.
class QrelSet {
  public:
    void add(const std::string& query_id, const std::string& doc_id, int grade);
    std::size_t size() const { return size_; }

    /// grade of (query, doc), or nullopt when unjudged
    std::optional<int> grade(const std::string& query_id, const std::string& doc_id) const;

    /// doc ids with grade >= min_grade, sorted; empty when the query is unknown
    std::vector<std::string> relevant_docs(const std::string& query_id, int min_grade = 1) const;

    bool has_query(const std::string& query_id) const { return by_query_.count(query_id) > 0; }

    const std::map<std::string, std::map<std::string, int>>& by_query() const { return by_query_; }

  private:
    std::map<std::string, std::map<std::string, int>> by_query_;
    std::size_t size_ = 0;
};

/// Interchange form of an encoded sparse vector: weights keyed by term string.
struct ExternalSparseVector {
    std::string id;
    std::map<std::string, double> weights;  // all >= 0
};

// Line-delimited corpus records with string fields `_id`, `title`, `text`.
std::vector<Document> load_corpus(const std::string& path);
void save_corpus(const std::string& path, const std::vector<Document>& docs);

// Tab-separated `query_id<TAB>text` lines.
std::vector<Query> load_queries(const std::string& path);
void save_queries(const std::string& path, const std::vector<Query>& queries);

// TREC qrels: whitespace-separated `query_id 0 doc_id grade` lines.
QrelSet load_qrels(const std::string& path);
void save_qrels(const std::string& path, const QrelSet& qrels);

// Line-delimited `{"id": string, "weights": {term: number}}` records.
std::vector<ExternalSparseVector> load_sparse_vectors(const std::string& path);
void save_sparse_vectors(const std::string& path, const std::vector<ExternalSparseVector>& vectors);

}  // namespace sparsekit

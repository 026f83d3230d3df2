#include "sparsekit/corpus.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

#include "sparsekit/util.hpp"

namespace sparsekit {

namespace {

using nlohmann::json;

[[noreturn]] void fail_line(const std::string& path, std::size_t line_no, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t") == std::string::npos;
}

}  // namespace

void QrelSet::add(const std::string& query_id, const std::string& doc_id, int grade) {
    if (grade < 0) throw std::invalid_argument("qrel grade must be >= 0");
    auto [it, inserted] = by_query_[query_id].emplace(doc_id, grade);
    if (!inserted)
        throw std::runtime_error("duplicate qrel pair (" + query_id + ", " + doc_id + ")");
    ++size_;
}

std::optional<int> QrelSet::grade(const std::string& query_id, const std::string& doc_id) const {
    auto q = by_query_.find(query_id);
    if (q == by_query_.end()) return std::nullopt;
    auto d = q->second.find(doc_id);
    if (d == q->second.end()) return std::nullopt;
    return d->second;
}

std::vector<std::string> QrelSet::relevant_docs(const std::string& query_id, int min_grade) const {
    std::vector<std::string> docs;
    auto q = by_query_.find(query_id);
    if (q == by_query_.end()) return docs;
    for (const auto& [doc_id, grade] : q->second)
        if (grade >= min_grade) docs.push_back(doc_id);
    return docs;
}

std::vector<Document> load_corpus(const std::string& path) {
    auto lines = read_lines(path);
    std::vector<Document> docs;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        json record;
        try {
            record = json::parse(lines[i]);
        } catch (const json::exception& e) {
            fail_line(path, i + 1, std::string("malformed record: ") + e.what());
        }
        if (!record.is_object() || !record.contains("_id") || !record["_id"].is_string())
            fail_line(path, i + 1, "record missing string field \"_id\"");
        if (!record.contains("text") || !record["text"].is_string())
            fail_line(path, i + 1, "record missing string field \"text\"");
        Document doc;
        doc.doc_id = record["_id"].get<std::string>();
        doc.text = record["text"].get<std::string>();
        if (record.contains("title") && record["title"].is_string())
            doc.title = record["title"].get<std::string>();
        if (doc.doc_id.empty()) fail_line(path, i + 1, "empty \"_id\"");
        if (!seen.insert(doc.doc_id).second)
            fail_line(path, i + 1, "duplicate document id \"" + doc.doc_id + "\"");
        docs.push_back(std::move(doc));
    }
    return docs;
}

void save_corpus(const std::string& path, const std::vector<Document>& docs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    for (const auto& doc : docs) {
        nlohmann::ordered_json record;
        record["_id"] = doc.doc_id;
        record["title"] = doc.title;
        record["text"] = doc.text;
        out << record.dump() << '\n';
    }
}

std::vector<Query> load_queries(const std::string& path) {
    auto lines = read_lines(path);
    std::vector<Query> queries;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        auto tab = lines[i].find('\t');
        if (tab == std::string::npos) fail_line(path, i + 1, "expected query_id<TAB>text");
        Query query{lines[i].substr(0, tab), lines[i].substr(tab + 1)};
        if (query.query_id.empty()) fail_line(path, i + 1, "empty query id");
        if (!seen.insert(query.query_id).second)
            fail_line(path, i + 1, "duplicate query id \"" + query.query_id + "\"");
        queries.push_back(std::move(query));
    }
    return queries;
}

void save_queries(const std::string& path, const std::vector<Query>& queries) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    for (const auto& query : queries) out << query.query_id << '\t' << query.text << '\n';
}

QrelSet load_qrels(const std::string& path) {
    auto lines = read_lines(path);
    QrelSet qrels;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        std::istringstream fields(lines[i]);
        std::string query_id, unused, doc_id, grade_text;
        if (!(fields >> query_id >> unused >> doc_id >> grade_text))
            fail_line(path, i + 1, "expected `query_id 0 doc_id grade`");
        std::size_t consumed = 0;
        int grade = 0;
        try {
            grade = std::stoi(grade_text, &consumed);
        } catch (const std::exception&) {
            fail_line(path, i + 1, "grade is not an integer: \"" + grade_text + "\"");
        }
        if (consumed != grade_text.size())
            fail_line(path, i + 1, "grade is not an integer: \"" + grade_text + "\"");
        if (grade < 0) fail_line(path, i + 1, "grade must be >= 0");
        try {
            qrels.add(query_id, doc_id, grade);
        } catch (const std::runtime_error& e) {
            fail_line(path, i + 1, e.what());
        }
    }
    return qrels;
}

void save_qrels(const std::string& path, const QrelSet& qrels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    for (const auto& [query_id, docs] : qrels.by_query())
        for (const auto& [doc_id, grade] : docs)
            out << query_id << " 0 " << doc_id << ' ' << grade << '\n';
}

std::vector<ExternalSparseVector> load_sparse_vectors(const std::string& path) {
    auto lines = read_lines(path);
    std::vector<ExternalSparseVector> vectors;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        json record;
        try {
            record = json::parse(lines[i]);
        } catch (const json::exception& e) {
            fail_line(path, i + 1, std::string("malformed record: ") + e.what());
        }
        if (!record.is_object() || !record.contains("id") || !record["id"].is_string())
            fail_line(path, i + 1, "record missing string field \"id\"");
        if (!record.contains("weights") || !record["weights"].is_object())
            fail_line(path, i + 1, "record missing object field \"weights\"");
        ExternalSparseVector vec;
        vec.id = record["id"].get<std::string>();
        for (const auto& [term, value] : record["weights"].items()) {
            if (!value.is_number())
                fail_line(path, i + 1, "weight of term \"" + term + "\" is not a number");
            double w = value.get<double>();
            if (!std::isfinite(w))
                fail_line(path, i + 1,
                          "non-finite weight for id \"" + vec.id + "\", term \"" + term + "\"");
            if (w < 0.0)
                fail_line(path, i + 1,
                          "negative weight for id \"" + vec.id + "\", term \"" + term + "\"");
            vec.weights[term] = w;
        }
        vectors.push_back(std::move(vec));
    }
    return vectors;
}

void save_sparse_vectors(const std::string& path, const std::vector<ExternalSparseVector>& vectors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    for (const auto& vec : vectors) {
        nlohmann::ordered_json record;
        record["id"] = vec.id;
        record["weights"] = json::object();
        for (const auto& [term, weight] : vec.weights) record["weights"][term] = weight;
        out << record.dump() << '\n';
    }
}

}  // namespace sparsekit

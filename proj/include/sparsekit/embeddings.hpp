#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace sparsekit {

/// Term -> dense row table, loadable from a text file of
/// `term value1 ... valueD` lines.
class EmbeddingTable {
  public:
    EmbeddingTable() = default;
    EmbeddingTable(std::vector<std::string> terms, std::vector<std::vector<double>> rows);

    static EmbeddingTable load(const std::string& path);
    void save(const std::string& path) const;

    std::size_t size() const { return terms_.size(); }
    std::size_t dim() const { return rows_.empty() ? 0 : rows_[0].size(); }
    const std::vector<std::string>& terms() const { return terms_; }
    const std::vector<double>* row(const std::string& term) const;
    const std::vector<double>& row_at(std::size_t i) const { return rows_.at(i); }

  private:
    std::vector<std::string> terms_;
    std::vector<std::vector<double>> rows_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace sparsekit

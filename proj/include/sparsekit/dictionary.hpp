#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sparsekit {

/// Term string <-> term id registry. Ids are assigned in insertion order, so
/// a lexical index and an impact index built over the same dictionary share
/// one id space (the IDF weights of one apply directly to the other).
class TermDictionary {
  public:
    std::uint32_t add(std::string_view term) {
        auto it = index_.find(std::string(term));
        if (it != index_.end()) return it->second;
        auto id = static_cast<std::uint32_t>(terms_.size());
        terms_.emplace_back(term);
        index_.emplace(terms_.back(), id);
        return id;
    }

    std::optional<std::uint32_t> find(std::string_view term) const {
        auto it = index_.find(std::string(term));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& term(std::uint32_t id) const { return terms_.at(id); }
    std::size_t size() const { return terms_.size(); }
    const std::vector<std::string>& terms() const { return terms_; }

  private:
    std::vector<std::string> terms_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

/// External doc id <-> internal id map; internal ids follow insertion order.
class DocTable {
  public:
    std::uint32_t add(const std::string& doc_id) {
        auto [it, inserted] = index_.emplace(doc_id, static_cast<std::uint32_t>(ids_.size()));
        if (!inserted) throw std::runtime_error("duplicate document id \"" + doc_id + "\"");
        ids_.push_back(doc_id);
        return it->second;
    }

    std::optional<std::uint32_t> find(const std::string& doc_id) const {
        auto it = index_.find(doc_id);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& id(std::uint32_t internal) const { return ids_.at(internal); }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }

    bool same_id_set(const DocTable& other) const {
        if (size() != other.size()) return false;
        auto a = ids_;
        auto b = other.ids_;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        return a == b;
    }

  private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

}  // namespace sparsekit

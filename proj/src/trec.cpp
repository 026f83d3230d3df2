#include "sparsekit/trec.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "sparsekit/util.hpp"

namespace sparsekit {

TrecRun load_run(const std::string& path) {
    auto lines = read_lines(path);
    TrecRun run;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
        std::istringstream fields(lines[i]);
        RunEntry entry;
        std::string q0, rank_text, score_text;
        if (!(fields >> entry.query_id >> q0 >> entry.doc_id >> rank_text >> score_text >>
              entry.tag))
            throw std::runtime_error(path + ":" + std::to_string(i + 1) +
                                     ": expected `query_id Q0 doc_id rank score tag`");
        try {
            entry.rank = std::stoi(rank_text);
            entry.score = std::stod(score_text);
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(i + 1) +
                                     ": bad rank or score field");
        }
        run[entry.query_id].push_back(std::move(entry));
    }
    for (auto& [query_id, entries] : run) {
        std::sort(entries.begin(), entries.end(), [](const RunEntry& a, const RunEntry& b) {
            if (a.rank != b.rank) return a.rank < b.rank;
            return a.doc_id < b.doc_id;
        });
    }
    return run;
}

void write_run_lines(std::ostream& out, const std::string& query_id,
                     const std::vector<SearchHit>& hits, const std::string& tag) {
    for (std::size_t i = 0; i < hits.size(); ++i) {
        out << query_id << " Q0 " << hits[i].doc_id << ' ' << (i + 1) << ' '
            << format_double(hits[i].score) << ' ' << tag << '\n';
    }
}

}  // namespace sparsekit

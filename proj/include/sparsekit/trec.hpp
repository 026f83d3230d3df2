#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "sparsekit/lexical.hpp"

namespace sparsekit {

struct RunEntry {
    std::string query_id;
    std::string doc_id;
    int rank = 0;
    double score = 0.0;
    std::string tag;
};

/// Run entries grouped by query, sorted by rank within each query.
using TrecRun = std::map<std::string, std::vector<RunEntry>>;

TrecRun load_run(const std::string& path);

/// Writes one query's hits as `query_id Q0 doc_id rank score run_tag` lines,
/// ranks starting at 1.
void write_run_lines(std::ostream& out, const std::string& query_id,
                     const std::vector<SearchHit>& hits, const std::string& tag);

}  // namespace sparsekit

#include "sparsekit/index_io.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "sparsekit/util.hpp"

namespace sparsekit {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint32_t kPostingsMagic = 0x534B5031;  // "SKP1"
constexpr std::uint32_t kIdfMagic = 0x534B4931;       // "SKI1"
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(buf, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(buf, 8);
}

void put_double(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64(out, bits);
}

void put_varint(std::ostream& out, std::uint64_t v) {
    while (v >= 0x80) {
        out.put(static_cast<char>((v & 0x7F) | 0x80));
        v >>= 7;
    }
    out.put(static_cast<char>(v));
}

std::uint32_t get_u32(std::istream& in) {
    char buf[4];
    in.read(buf, 4);
    if (!in) throw std::runtime_error("truncated index file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    char buf[8];
    in.read(buf, 8);
    if (!in) throw std::runtime_error("truncated index file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    return v;
}

double get_double(std::istream& in) {
    std::uint64_t bits = get_u64(in);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

std::uint64_t get_varint(std::istream& in) {
    std::uint64_t v = 0;
    int shift = 0;
    while (true) {
        int c = in.get();
        if (c == EOF) throw std::runtime_error("truncated index file");
        v |= static_cast<std::uint64_t>(c & 0x7F) << shift;
        if (!(c & 0x80)) return v;
        shift += 7;
        if (shift > 63) throw std::runtime_error("corrupt varint in index file");
    }
}

enum class ValueKind { Varint, Double };

void save_postings(const fs::path& path, const std::vector<std::vector<Posting>>& postings,
                   ValueKind kind) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path.string());
    put_u32(out, kPostingsMagic);
    put_u32(out, kFormatVersion);
    put_u64(out, postings.size());
    for (const auto& list : postings) {
        put_varint(out, list.size());
        std::uint32_t prev = 0;
        bool first = true;
        for (const auto& posting : list) {
            std::uint32_t delta = first ? posting.doc : posting.doc - prev;
            first = false;
            prev = posting.doc;
            put_varint(out, delta);
            if (kind == ValueKind::Varint)
                put_varint(out, static_cast<std::uint64_t>(posting.value));
            else
                put_double(out, posting.value);
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::vector<Posting>> load_postings(const fs::path& path, ValueKind kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    if (get_u32(in) != kPostingsMagic)
        throw std::runtime_error("bad magic in postings file: " + path.string());
    if (get_u32(in) != kFormatVersion)
        throw std::runtime_error("unsupported postings format version: " + path.string());
    std::vector<std::vector<Posting>> postings(get_u64(in));
    for (auto& list : postings) {
        list.resize(get_varint(in));
        std::uint32_t doc = 0;
        bool first = true;
        for (auto& posting : list) {
            std::uint32_t delta = static_cast<std::uint32_t>(get_varint(in));
            doc = first ? delta : doc + delta;
            first = false;
            posting.doc = doc;
            posting.value = kind == ValueKind::Varint
                                ? static_cast<double>(get_varint(in))
                                : get_double(in);
        }
    }
    return postings;
}

void save_doc_table(const fs::path& path, const DocTable& docs,
                    const std::vector<std::uint32_t>* lengths) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path.string());
    out << "sparsekit-docs\t" << kFormatVersion << '\n';
    for (std::uint32_t i = 0; i < docs.size(); ++i) {
        out << docs.id(i);
        if (lengths) out << '\t' << (*lengths)[i];
        out << '\n';
    }
}

std::pair<DocTable, std::vector<std::uint32_t>> load_doc_table(const fs::path& path,
                                                               bool with_lengths) {
    auto lines = read_lines(path.string());
    if (lines.empty() || lines[0].rfind("sparsekit-docs\t", 0) != 0)
        throw std::runtime_error("bad magic in doc table: " + path.string());
    DocTable docs;
    std::vector<std::uint32_t> lengths;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        if (with_lengths) {
            auto tab = lines[i].find('\t');
            if (tab == std::string::npos)
                throw std::runtime_error(path.string() + ": expected doc_id<TAB>length");
            docs.add(lines[i].substr(0, tab));
            lengths.push_back(static_cast<std::uint32_t>(std::stoul(lines[i].substr(tab + 1))));
        } else {
            docs.add(lines[i]);
        }
    }
    return {std::move(docs), std::move(lengths)};
}

}  // namespace

void save_index_dir(const std::string& dir, const IndexBundle& bundle) {
    fs::create_directories(dir);
    const fs::path root(dir);

    json meta;
    meta["format"] = "sparsekit-index";
    meta["version"] = kFormatVersion;
    meta["stemming"] = bundle.meta.stemming;
    meta["log_base"] = bundle.meta.log_base;
    meta["idf_weighting"] = bundle.meta.idf_weighting;
    meta["has_lexical"] = bundle.lexical.has_value();
    meta["has_impact"] = bundle.impact.has_value();
    write_text_file((root / "meta.json").string(), meta.dump(2) + "\n");

    {
        std::ofstream out(root / "terms.txt", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write terms.txt");
        out << "sparsekit-terms\t" << kFormatVersion << '\n';
        for (const auto& term : bundle.dict->terms()) out << term << '\n';
    }

    if (bundle.lexical) {
        save_doc_table(root / "docs.tsv", bundle.lexical->docs(),
                       &bundle.lexical->raw_doc_lengths());
        save_postings(root / "lexical.post", bundle.lexical->raw_postings(), ValueKind::Varint);
    }
    if (bundle.impact) {
        save_doc_table(root / "impact_docs.tsv", bundle.impact->docs(), nullptr);
        save_postings(root / "impact.post", bundle.impact->raw_postings(), ValueKind::Double);
        if (bundle.impact->stored_idf()) {
            std::ofstream out(root / "idf.bin", std::ios::binary);
            if (!out) throw std::runtime_error("cannot write idf.bin");
            put_u32(out, kIdfMagic);
            put_u32(out, kFormatVersion);
            const auto& idf = *bundle.impact->stored_idf();
            put_double(out, idf.default_weight());
            put_u64(out, idf.raw().size());
            for (double w : idf.raw()) put_double(out, w);
        }
    }
}

IndexBundle load_index_dir(const std::string& dir) {
    const fs::path root(dir);
    if (!fs::exists(root / "meta.json"))
        throw std::runtime_error("not an index directory (missing meta.json): " + dir);
    json meta = json::parse(read_file((root / "meta.json").string()));
    if (meta.value("format", "") != "sparsekit-index")
        throw std::runtime_error("not a sparsekit index: " + dir);
    if (meta.value("version", 0) != static_cast<int>(kFormatVersion))
        throw std::runtime_error("unsupported index version in " + dir);

    IndexBundle bundle;
    bundle.meta.stemming = meta.value("stemming", true);
    bundle.meta.log_base = meta.value("log_base", std::numbers::e);
    bundle.meta.idf_weighting = meta.value("idf_weighting", false);

    bundle.dict = std::make_shared<TermDictionary>();
    {
        auto lines = read_lines((root / "terms.txt").string());
        if (lines.empty() || lines[0].rfind("sparsekit-terms\t", 0) != 0)
            throw std::runtime_error("bad magic in terms.txt");
        for (std::size_t i = 1; i < lines.size(); ++i)
            if (!lines[i].empty()) bundle.dict->add(lines[i]);
    }

    if (meta.value("has_lexical", false)) {
        auto [docs, lengths] = load_doc_table(root / "docs.tsv", /*with_lengths=*/true);
        auto postings = load_postings(root / "lexical.post", ValueKind::Varint);
        bundle.lexical = InvertedIndex::from_parts(bundle.dict, std::move(docs),
                                                   std::move(postings), std::move(lengths));
    }
    if (meta.value("has_impact", false)) {
        auto [docs, lengths] = load_doc_table(root / "impact_docs.tsv", /*with_lengths=*/false);
        auto postings = load_postings(root / "impact.post", ValueKind::Double);
        std::optional<IdfVector> idf;
        if (fs::exists(root / "idf.bin")) {
            std::ifstream in(root / "idf.bin", std::ios::binary);
            if (get_u32(in) != kIdfMagic) throw std::runtime_error("bad magic in idf.bin");
            if (get_u32(in) != kFormatVersion)
                throw std::runtime_error("unsupported idf.bin version");
            double default_weight = get_double(in);
            std::vector<double> weights(get_u64(in));
            for (auto& w : weights) w = get_double(in);
            idf = IdfVector(std::move(weights), default_weight);
        }
        bundle.impact = ImpactIndex::from_parts(bundle.dict, std::move(docs), std::move(postings),
                                                std::move(idf));
    }
    return bundle;
}

}  // namespace sparsekit

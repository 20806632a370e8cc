#include "hmrag/ingestion.hpp"

#include "hmrag/errors.hpp"
#include "hmrag/text.hpp"

#include <cstdio>

namespace hmrag {

namespace {

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto bar = line.find('|', start);
        out.push_back(trim(line.substr(start, bar == std::string_view::npos ? bar : bar - start)));
        if (bar == std::string_view::npos) break;
        start = bar + 1;
    }
    return out;
}

// Tolerates list bullets and numbering models like to prepend.
std::string_view strip_bullet(std::string_view s) {
    while (!s.empty() && (s.front() == '-' || s.front() == '*' || s.front() == ' ' ||
                          s.front() == '\t' || std::isdigit(static_cast<unsigned char>(s.front())) ||
                          s.front() == '.' || s.front() == ')'))
        s.remove_prefix(1);
    return s;
}

std::string chunk_id_for(const std::string& doc_id, std::size_t n) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04zu", n);
    return doc_id + "#" + buf;
}

}  // namespace

FusedDocument caption_and_refine(const CorpusRecord& record, const ModelGateway& gateway,
                                 const PromptLibrary& prompts) {
    record.validate();
    FusedDocument doc;
    doc.id = record.id;
    doc.image_ref = record.image_ref;
    const std::string text = trim(record.text);
    if (!record.image_ref) {
        doc.fused_text = text;
        return doc;
    }
    const std::string raw = trim(gateway.caption_image(*record.image_ref));
    std::string refined = trim(gateway.complete_prompt(
        prompts.caption_refine.render({{"caption", raw}, {"text", text}})));
    if (refined.empty()) refined = raw;
    doc.caption = refined;
    doc.fused_text = text.empty() ? refined : text + "\n\n" + refined;
    if (trim(doc.fused_text).empty())
        throw InvalidArgument("record " + record.id + " produced empty fused text");
    return doc;
}

std::vector<Chunk> chunk_document(const FusedDocument& doc, std::size_t chunk_size,
                                  std::size_t overlap) {
    if (chunk_size == 0) throw InvalidArgument("chunk_size must be positive");
    if (overlap >= chunk_size) throw InvalidArgument("overlap must be smaller than chunk_size");
    const auto tokens = split_whitespace(doc.fused_text);
    if (tokens.empty()) throw InvalidArgument("document " + doc.id + " has no tokens");

    const std::size_t stride = chunk_size - overlap;
    std::vector<Chunk> chunks;
    for (std::size_t start = 0;; start += stride) {
        const std::size_t end = std::min(start + chunk_size, tokens.size());
        std::vector<std::string> window(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                                        tokens.begin() + static_cast<std::ptrdiff_t>(end));
        chunks.push_back({chunk_id_for(doc.id, chunks.size()), doc.id, join(window, " "),
                          {start, end}});
        if (end == tokens.size()) break;
    }
    return chunks;
}

EmbeddingIndex build_index(std::span<const Chunk> chunks, const ModelGateway& gateway) {
    if (chunks.empty()) throw InvalidArgument("build_index: no chunks");
    std::vector<IndexRecord> records;
    records.reserve(chunks.size());
    std::size_t dim = 0;
    for (const auto& c : chunks) {
        Vector v = gateway.embed_text(c.text);
        if (dim == 0) dim = v.size();
        if (v.size() != dim)
            throw DimensionMismatch("embedding dimension drifted while indexing " + c.chunk_id);
        records.push_back({c, std::move(v)});
    }
    return EmbeddingIndex(dim, std::move(records));
}

std::size_t apply_extraction(std::string_view output, KnowledgeGraph& graph,
                             const std::optional<std::string>& visual_location,
                             ExtractionStats& stats) {
    std::vector<Entity> entities;
    std::vector<Triplet> triplets;
    std::size_t pos = 0;
    while (pos <= output.size()) {
        auto nl = output.find('\n', pos);
        std::string_view raw = output.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? output.size() + 1 : nl + 1;

        std::string line = trim(strip_bullet(trim(raw)));
        if (line.empty()) continue;
        const bool is_entity = starts_with_icase(line, "ENTITY|");
        const bool is_rel = starts_with_icase(line, "REL|");
        if (!is_entity && !is_rel) continue;  // chatter around the records

        auto fields = split_fields(line);
        if (is_entity) {
            if (fields.size() < 2 || fields.size() > 3 || fields[1].empty()) {
                ++stats.malformed_lines;
                continue;
            }
            entities.push_back({fields[1], fields.size() == 3 ? fields[2] : "", visual_location});
        } else {
            if (fields.size() != 4 || fields[1].empty() || fields[2].empty() || fields[3].empty()) {
                ++stats.malformed_lines;
                continue;
            }
            triplets.push_back({fields[1], fields[2], fields[3]});
        }
    }

    for (auto& e : entities) graph.add_entity(std::move(e));
    for (const auto& t : triplets) {
        for (const auto* name : {&t.head, &t.tail}) {
            if (!graph.contains(KnowledgeGraph::canonical_name(*name))) {
                graph.add_entity({*name, "", visual_location});
                ++stats.auto_created_entities;
            }
        }
        graph.add_triplet(t);
    }
    return entities.size() + triplets.size();
}

GraphExtraction extract_graph(std::span<const FusedDocument> docs, const ModelGateway& gateway,
                              const PromptLibrary& prompts) {
    if (docs.empty()) throw InvalidArgument("extract_graph: no documents");
    GraphExtraction result;
    for (const auto& doc : docs) {
        ++result.stats.documents;
        const std::string output =
            gateway.complete_prompt(prompts.extraction.render({{"text", doc.fused_text}}));
        if (apply_extraction(output, result.graph, doc.image_ref, result.stats) == 0)
            ++result.stats.skipped_documents;
    }
    return result;
}

}  // namespace hmrag

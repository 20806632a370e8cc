#pragma once

#include "hmrag/knowledge.hpp"
#include "hmrag/model_gateway.hpp"
#include "hmrag/prompts.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hmrag {

inline constexpr std::size_t kDefaultChunkSize = 512;
inline constexpr std::size_t kDefaultChunkOverlap = 64;

/// Captions the record's image (if any), refines the caption against the
/// record text with one chat call, and concatenates text and caption with a
/// blank line between them.
FusedDocument caption_and_refine(const CorpusRecord& record, const ModelGateway& gateway,
                                 const PromptLibrary& prompts);

/// Whitespace-token windows of `chunk_size` tokens advancing by
/// `chunk_size - overlap`; the last window may be shorter.
std::vector<Chunk> chunk_document(const FusedDocument& doc, std::size_t chunk_size,
                                  std::size_t overlap);

EmbeddingIndex build_index(std::span<const Chunk> chunks, const ModelGateway& gateway);

struct ExtractionStats {
    std::size_t documents = 0;
    std::size_t skipped_documents = 0;
    std::size_t malformed_lines = 0;
    std::size_t auto_created_entities = 0;
};

/// Parses `ENTITY|name|description` and `REL|head|relation|tail` lines into
/// `graph`. Unknown triplet endpoints are created with an empty description.
/// Returns the number of records applied.
std::size_t apply_extraction(std::string_view output, KnowledgeGraph& graph,
                             const std::optional<std::string>& visual_location,
                             ExtractionStats& stats);

struct GraphExtraction {
    KnowledgeGraph graph;
    ExtractionStats stats;
};

/// One extraction call per document. Documents whose output yields no
/// record are skipped and counted rather than failing the build.
GraphExtraction extract_graph(std::span<const FusedDocument> docs, const ModelGateway& gateway,
                              const PromptLibrary& prompts);

}  // namespace hmrag

#include "hmrag/knowledge.hpp"

#include "hmrag/errors.hpp"
#include "hmrag/text.hpp"

#include <json.hpp>

#include <fstream>
#include <unordered_set>

namespace hmrag {

using nlohmann::json;

namespace {

const std::set<std::string> kNoNeighbors;
const std::vector<Triplet> kNoTriplets;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write file: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open file: " + path);
    return in;
}

json parse_line(const std::string& path, std::size_t lineno, const std::string& line) {
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what(), line);
    }
}

std::optional<std::string> optional_string(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    auto s = j[key].get<std::string>();
    if (s.empty()) return std::nullopt;
    return s;
}

}  // namespace

void CorpusRecord::validate() const {
    if (id.empty()) throw InvalidArgument("corpus record has no id");
    if (trim(text).empty() && !image_ref)
        throw InvalidArgument("corpus record " + id + " has neither text nor image");
}

EmbeddingIndex::EmbeddingIndex(std::size_t dim, std::vector<IndexRecord> records)
    : dim_(dim), records_(std::move(records)) {
    if (dim_ == 0) throw InvalidArgument("index dimension must be positive");
    std::unordered_set<std::string> ids;
    for (const auto& r : records_) {
        if (r.vector.size() != dim_)
            throw DimensionMismatch("record " + r.chunk.chunk_id + " has dimension " +
                                    std::to_string(r.vector.size()) + ", index has " +
                                    std::to_string(dim_));
        if (!ids.insert(r.chunk.chunk_id).second)
            throw InvalidArgument("duplicate chunk_id: " + r.chunk.chunk_id);
    }
}

std::string KnowledgeGraph::canonical_name(std::string_view name) {
    return join(split_whitespace(to_lower(name)), " ");
}

const Entity& KnowledgeGraph::add_entity(Entity entity) {
    entity.name = canonical_name(entity.name);
    if (entity.name.empty()) throw InvalidArgument("entity name is empty");
    entity.description = trim(entity.description);
    auto [it, inserted] = entities_.try_emplace(entity.name, entity);
    if (!inserted) {
        Entity& existing = it->second;
        if (existing.description.empty()) existing.description = entity.description;
        if (!existing.visual_location) existing.visual_location = entity.visual_location;
    }
    return it->second;
}

bool KnowledgeGraph::add_triplet(const Triplet& triplet) {
    Triplet t{canonical_name(triplet.head), canonical_name(triplet.relation),
              canonical_name(triplet.tail)};
    if (t.relation.empty()) throw InvalidArgument("triplet relation is empty");
    if (!contains(t.head) || !contains(t.tail))
        throw InvalidArgument("triplet endpoint missing from graph: " + t.head + " / " + t.tail);
    if (!triplets_.insert(t).second) return false;
    if (t.head != t.tail) {
        adjacency_[t.head].insert(t.tail);
        adjacency_[t.tail].insert(t.head);
    }
    incident_[t.head].push_back(t);
    if (t.tail != t.head) incident_[t.tail].push_back(t);
    return true;
}

bool KnowledgeGraph::contains(std::string_view name) const {
    return entities_.find(name) != entities_.end();
}

const Entity* KnowledgeGraph::find(std::string_view name) const {
    auto it = entities_.find(name);
    return it == entities_.end() ? nullptr : &it->second;
}

const std::set<std::string>& KnowledgeGraph::neighbors(std::string_view name) const {
    auto it = adjacency_.find(name);
    return it == adjacency_.end() ? kNoNeighbors : it->second;
}

const std::vector<Triplet>& KnowledgeGraph::incident(std::string_view name) const {
    auto it = incident_.find(name);
    return it == incident_.end() ? kNoTriplets : it->second;
}

std::set<std::string> KnowledgeGraph::relations() const {
    std::set<std::string> out;
    for (const auto& t : triplets_) out.insert(t.relation);
    return out;
}

std::vector<CorpusRecord> load_corpus(const std::string& path) {
    auto in = open_in(path);
    std::vector<CorpusRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j = parse_line(path, lineno, line);
        CorpusRecord r;
        try {
            r.id = j.at("id").is_string() ? j["id"].get<std::string>() : j["id"].dump();
            r.text = j.value("text", std::string{});
            r.image_ref = optional_string(j, "image_ref");
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what(), line);
        }
        r.validate();
        records.push_back(std::move(r));
    }
    return records;
}

void save_index(const EmbeddingIndex& index, const std::string& path) {
    auto out = open_out(path);
    out << json{{"dim", index.dim()}, {"count", index.size()}}.dump() << '\n';
    for (const auto& r : index.records()) {
        json j = {{"chunk_id", r.chunk.chunk_id},
                  {"vector", r.vector},
                  {"text", r.chunk.text},
                  {"doc_id", r.chunk.doc_id},
                  {"span", {r.chunk.span.start, r.chunk.span.end}}};
        out << j.dump() << '\n';
    }
    if (!out) throw Error("failed writing index: " + path);
}

EmbeddingIndex load_index(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    std::size_t lineno = 0;
    std::size_t dim = 0;
    std::size_t count = 0;
    bool have_header = false;
    std::vector<IndexRecord> records;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j = parse_line(path, lineno, line);
        try {
            if (!have_header) {
                dim = j.at("dim").get<std::size_t>();
                count = j.at("count").get<std::size_t>();
                have_header = true;
                continue;
            }
            IndexRecord r;
            r.chunk.chunk_id = j.at("chunk_id").get<std::string>();
            r.chunk.text = j.at("text").get<std::string>();
            r.vector = j.at("vector").get<Vector>();
            r.chunk.doc_id = j.value("doc_id", std::string{});
            if (j.contains("span")) {
                r.chunk.span.start = j["span"].at(0).get<std::size_t>();
                r.chunk.span.end = j["span"].at(1).get<std::size_t>();
            }
            records.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what(), line);
        }
    }
    if (!have_header) throw ParseError(path + ": missing index header");
    if (records.size() != count)
        throw ParseError(path + ": header announces " + std::to_string(count) + " records, found " +
                         std::to_string(records.size()));
    return EmbeddingIndex(dim, std::move(records));
}

void save_graph(const KnowledgeGraph& graph, const std::string& path) {
    auto out = open_out(path);
    for (const auto& [name, e] : graph.entities()) {
        json j = {{"kind", "entity"}, {"name", e.name}, {"description", e.description}};
        j["visual_location"] = e.visual_location ? json(*e.visual_location) : json(nullptr);
        out << j.dump() << '\n';
    }
    for (const auto& t : graph.triplets()) {
        out << json{{"kind", "triplet"}, {"head", t.head}, {"relation", t.relation},
                    {"tail", t.tail}}
                   .dump()
            << '\n';
    }
    if (!out) throw Error("failed writing graph: " + path);
}

KnowledgeGraph load_graph(const std::string& path) {
    auto in = open_in(path);
    KnowledgeGraph g;
    std::vector<Triplet> triplets;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j = parse_line(path, lineno, line);
        try {
            const auto kind = j.at("kind").get<std::string>();
            if (kind == "entity") {
                g.add_entity({j.at("name").get<std::string>(), j.value("description", ""),
                              optional_string(j, "visual_location")});
            } else if (kind == "triplet") {
                triplets.push_back({j.at("head").get<std::string>(),
                                    j.at("relation").get<std::string>(),
                                    j.at("tail").get<std::string>()});
            } else {
                throw ParseError(path + ":" + std::to_string(lineno) + ": unknown kind " + kind,
                                 line);
            }
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what(), line);
        }
    }
    for (const auto& t : triplets) g.add_triplet(t);
    return g;
}

}  // namespace hmrag

#include "topicshift/knowledge_graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "topicshift/errors.hpp"
#include "topicshift/strings.hpp"

namespace topicshift {

EntityGraph EntityGraph::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open knowledge graph", path.string());

  EntityGraph g;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view trimmed = trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;

    const auto fields = split(line, '\t');
    if (fields.size() != 3) {
      throw LoadError("expected 3 tab-separated fields, found " + std::to_string(fields.size()),
                      path.string(), line_no);
    }
    const std::string head(trim(fields[0]));
    const std::string tail(trim(fields[1]));
    if (head.empty() || tail.empty()) throw LoadError("empty entity name", path.string(), line_no);

    const std::string_view w = trim(fields[2]);
    double weight = 0.0;
    const auto [end, ec] = std::from_chars(w.data(), w.data() + w.size(), weight);
    if (ec != std::errc{} || end != w.data() + w.size() || !std::isfinite(weight)) {
      throw LoadError("weight '" + std::string(w) + "' is not a number", path.string(), line_no);
    }
    if (!(weight > 0.0)) {
      throw LoadError("weight must be positive, got " + std::string(w), path.string(), line_no);
    }
    g.add({head, tail, weight});
  }
  return g;
}

EntityGraph EntityGraph::from_tuples(std::span<const KnowledgeTuple> tuples) {
  EntityGraph g;
  for (const auto& t : tuples) g.add(t);
  return g;
}

void EntityGraph::add(KnowledgeTuple tuple) {
  if (tuple.head.empty() || tuple.tail.empty() || !(tuple.weight > 0.0)) {
    throw InvalidInput("knowledge tuples need two entities and a positive weight");
  }
  auto& out = adjacency_[tuple.head];
  auto [it, inserted] = out.emplace(tuple.tail, tuple.weight);
  if (!inserted) it->second = std::max(it->second, tuple.weight);
  max_entity_bytes_ = std::max({max_entity_bytes_, tuple.head.size(), tuple.tail.size()});
  vocabulary_.insert(std::move(tuple.head));
  vocabulary_.insert(std::move(tuple.tail));
}

std::vector<WeightedEntity> EntityGraph::related(std::string_view entity, std::size_t k) const {
  std::vector<WeightedEntity> out;
  const auto it = adjacency_.find(entity);
  if (it == adjacency_.end() || k == 0) return out;
  for (const auto& [name, w] : it->second) out.push_back({name, w});
  // adjacency is name-ordered, so a stable sort by weight leaves ties lexicographic
  std::stable_sort(out.begin(), out.end(),
                   [](const WeightedEntity& a, const WeightedEntity& b) { return a.weight > b.weight; });
  if (out.size() > k) out.resize(k);
  return out;
}

std::size_t EntityGraph::edge_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [_, out] : adjacency_) n += out.size();
  return n;
}

std::vector<WeightedEntity> related_entities(const EntityGraph& g, std::string_view entity,
                                             std::size_t k) {
  if (k == 0) throw InvalidInput("related_entities: k must be at least 1");
  return g.related(entity, k);
}

std::vector<std::string> extract_entities(const EntityGraph& g,
                                          std::span<const std::string> texts) {
  std::vector<std::string> found;
  std::unordered_set<std::string> seen;
  const std::size_t longest = g.max_entity_bytes();

  for (const auto& text : texts) {
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t match = 0;
      const std::size_t limit = std::min(longest, text.size() - pos);
      for (std::size_t len = limit; len > 0; --len) {
        // only try lengths that end on a character boundary
        if (pos + len < text.size() && is_utf8_continuation(text[pos + len])) continue;
        if (g.contains(std::string_view(text).substr(pos, len))) {
          match = len;
          break;
        }
      }
      if (match > 0) {
        std::string entity = text.substr(pos, match);
        if (seen.insert(entity).second) found.push_back(std::move(entity));
        pos += match;
      } else {
        pos += utf8_char_length(text, pos);
      }
    }
  }
  return found;
}

}  // namespace topicshift

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace topicshift {

/// Directed relatedness edge: `head` is related to `tail` with `weight`.
struct KnowledgeTuple {
  std::string head;
  std::string tail;
  double weight = 0.0;
};

struct WeightedEntity {
  std::string name;
  double weight = 0.0;

  bool operator==(const WeightedEntity&) const = default;
};

/// One-hop entity graph. Immutable once loaded.
class EntityGraph {
 public:
  EntityGraph() = default;

  /// Tab-separated `head<TAB>tail<TAB>weight`, UTF-8. Blank lines and lines
  /// starting with '#' are skipped. Throws LoadError naming the line.
  static EntityGraph load(const std::filesystem::path& path);
  static EntityGraph from_tuples(std::span<const KnowledgeTuple> tuples);

  /// Duplicate ordered pairs keep the larger weight.
  void add(KnowledgeTuple tuple);

  /// Heaviest outgoing neighbors first, ties lexicographic, at most k.
  std::vector<WeightedEntity> related(std::string_view entity, std::size_t k = 5) const;

  const std::set<std::string, std::less<>>& vocabulary() const noexcept { return vocabulary_; }
  bool contains(std::string_view entity) const { return vocabulary_.contains(entity); }
  std::size_t edge_count() const noexcept;
  std::size_t max_entity_bytes() const noexcept { return max_entity_bytes_; }

 private:
  std::map<std::string, std::map<std::string, double>, std::less<>> adjacency_;
  std::set<std::string, std::less<>> vocabulary_;
  std::size_t max_entity_bytes_ = 0;
};

std::vector<WeightedEntity> related_entities(const EntityGraph& g, std::string_view entity,
                                             std::size_t k = 5);

/// Dictionary NER: at each character position takes the longest vocabulary
/// entry starting there, skips past it, and otherwise advances one
/// character. Unique entities in order of first appearance across `texts`.
std::vector<std::string> extract_entities(const EntityGraph& g,
                                          std::span<const std::string> texts);

/// Entity detection seam used by the dialogue pipeline.
class EntityRecognizer {
 public:
  virtual ~EntityRecognizer() = default;
  virtual std::vector<std::string> recognize(std::span<const std::string> texts) const = 0;
};

class DictionaryRecognizer : public EntityRecognizer {
 public:
  explicit DictionaryRecognizer(const EntityGraph& graph) : graph_(graph) {}
  std::vector<std::string> recognize(std::span<const std::string> texts) const override {
    return extract_entities(graph_, texts);
  }

 private:
  const EntityGraph& graph_;
};

}  // namespace topicshift

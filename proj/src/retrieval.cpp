#include "topicshift/retrieval.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"

#include "topicshift/errors.hpp"
#include "topicshift/strings.hpp"

namespace topicshift {

std::vector<QueryReplyPair> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open corpus", path.string());
  std::vector<QueryReplyPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 2) {
      throw LoadError("expected query<TAB>reply, found " + std::to_string(fields.size()) + " fields",
                      path.string(), line_no);
    }
    pairs.push_back({pairs.size(), std::string(trim(fields[0])), std::string(trim(fields[1]))});
  }
  if (pairs.empty()) throw LoadError("corpus is empty", path.string());
  return pairs;
}

CorpusIndex CorpusIndex::build(std::vector<QueryReplyPair> pairs) {
  if (pairs.empty()) throw InvalidInput("cannot index an empty corpus");
  std::vector<bool> seen(pairs.size(), false);
  for (const auto& p : pairs) {
    if (p.id >= pairs.size() || seen[p.id]) {
      throw InvalidInput("pair ids must be unique and dense from 0 (offending id " +
                         std::to_string(p.id) + ")");
    }
    seen[p.id] = true;
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const QueryReplyPair& a, const QueryReplyPair& b) { return a.id < b.id; });

  CorpusIndex index;
  auto stats = std::make_shared<CorpusStats>();
  for (const auto& p : pairs) {
    const TokenSequence q = tokenize(p.query);
    const TokenSequence r = tokenize(p.reply);
    std::set<std::string> tokens(q.begin(), q.end());
    tokens.insert(r.begin(), r.end());
    for (const auto& t : tokens) index.postings_[t].push_back(p.id);
    stats->add_document(p.query);
    stats->add_document(p.reply);
    index.reply_lengths_.push_back(r.size());
  }
  index.stats_ = stats;
  for (const auto& p : pairs) index.reply_vectors_.push_back(stats->vectorize(p.reply));
  index.pairs_ = std::move(pairs);
  return index;
}

const std::vector<std::size_t>& CorpusIndex::postings(const std::string& token) const {
  static const std::vector<std::size_t> kNone;
  const auto it = postings_.find(token);
  return it == postings_.end() ? kNone : it->second;
}

void CorpusIndex::save(const std::filesystem::path& path) const {
  nlohmann::ordered_json doc;
  doc["format"] = "topicshift-index";
  doc["version"] = 1;
  doc["documents"] = stats_->documents();
  auto& pairs = doc["pairs"] = nlohmann::ordered_json::array();
  for (const auto& p : pairs_) pairs.push_back({{"id", p.id}, {"query", p.query}, {"reply", p.reply}});
  // sorted for byte-stable output
  const std::map<std::string, std::size_t> df(stats_->document_frequencies().begin(),
                                              stats_->document_frequencies().end());
  doc["df"] = df;
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write index", path.string());
  out << doc.dump(1) << '\n';
}

CorpusIndex CorpusIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open index", path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed index: ") + e.what(), path.string());
  }
  if (doc.value("format", "") != "topicshift-index") {
    throw LoadError("not an index file", path.string());
  }
  std::vector<QueryReplyPair> pairs;
  try {
    for (const auto& p : doc.at("pairs")) {
      pairs.push_back({p.at("id").get<std::size_t>(), p.at("query").get<std::string>(),
                       p.at("reply").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed index pairs: ") + e.what(), path.string());
  }
  CorpusIndex index = build(std::move(pairs));
  const auto df = doc.at("df").get<std::unordered_map<std::string, std::size_t>>();
  if (doc.at("documents").get<std::size_t>() != index.stats().documents() ||
      df != index.stats().document_frequencies()) {
    throw LoadError("index statistics do not match its pairs", path.string());
  }
  return index;
}

std::string_view to_string(RetrievalMode m) {
  return m == RetrievalMode::Introducing ? "introducing" : "general";
}

namespace {

void sort_candidates(std::vector<Candidate>& items) {
  std::sort(items.begin(), items.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.pair_id < b.pair_id;
  });
}

}  // namespace

CandidateSet retrieve_candidates(const CorpusIndex& index, std::span<const std::string> context,
                                 std::span<const WeightedEntity> entities, RetrievalMode mode,
                                 const RetrievalCaps& caps) {
  if (mode == RetrievalMode::Introducing && entities.empty()) {
    throw InvalidInput("introducing-mode retrieval needs at least one target entity");
  }
  const TfIdfVector context_vector = index.stats().vectorize(join(context, " "));
  auto score = [&](std::size_t id) { return cosine(index.reply_vector(id), context_vector); };
  auto long_enough = [&](std::size_t id) { return index.reply_length(id) >= caps.min_len; };

  CandidateSet out;
  out.mode = mode;

  if (mode == RetrievalMode::General) {
    for (std::size_t id = 0; id < index.size(); ++id) {
      if (long_enough(id)) out.items.push_back({id, score(id)});
    }
  } else {
    std::map<std::size_t, double> merged;
    for (const auto& entity : entities) {
      if (entity.name.empty()) continue;
      std::vector<Candidate> hits;
      for (std::size_t id = 0; id < index.size(); ++id) {
        if (!long_enough(id)) continue;
        if (index.pair(id).reply.find(entity.name) == std::string::npos) continue;
        hits.push_back({id, score(id)});
      }
      sort_candidates(hits);
      if (hits.size() > caps.per_entity) hits.resize(caps.per_entity);
      for (const auto& c : hits) {
        auto [it, inserted] = merged.emplace(c.pair_id, c.score);
        if (!inserted) it->second = std::max(it->second, c.score);
      }
    }
    for (const auto& [id, s] : merged) out.items.push_back({id, s});
  }

  sort_candidates(out.items);
  if (out.items.size() > caps.total) out.items.resize(caps.total);
  return out;
}

}  // namespace topicshift

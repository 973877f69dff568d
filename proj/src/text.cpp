#include "topicshift/text.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace topicshift {

namespace {

enum class CharClass { Space, Punct, Cjk, Word };

struct CodePoint {
  char32_t value;
  std::size_t length;  // bytes
};

CodePoint decode(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t k) -> int {
    if (pos + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[pos + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 & 0xE0) == 0xC0) {
    const int c1 = cont(1);
    if (c1 >= 0) return {static_cast<char32_t>(((b0 & 0x1F) << 6) | c1), 2};
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) return {static_cast<char32_t>(((b0 & 0x0F) << 12) | (c1 << 6) | c2), 3};
  } else if ((b0 & 0xF8) == 0xF0) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      return {static_cast<char32_t>(((b0 & 0x07) << 18) | (c1 << 12) | (c2 << 6) | c3), 4};
    }
  }
  // Stray byte: keep it as an opaque word character.
  return {0xFFFD, 1};
}

bool in(char32_t c, char32_t lo, char32_t hi) { return c >= lo && c <= hi; }

CharClass classify(char32_t c) {
  if (c < 0x80) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      return CharClass::Space;
    }
    const bool alnum = in(c, 'a', 'z') || in(c, 'A', 'Z') || in(c, '0', '9');
    return alnum ? CharClass::Word : CharClass::Punct;
  }
  if (c == 0x00A0 || c == 0x3000 || in(c, 0x2000, 0x200B)) return CharClass::Space;
  if (in(c, 0x00A1, 0x00BF) || c == 0x00D7 || c == 0x00F7 || in(c, 0x2010, 0x206F) ||
      in(c, 0x3001, 0x303F) || in(c, 0xFE30, 0xFE4F) || in(c, 0xFF00, 0xFF0F) ||
      in(c, 0xFF1A, 0xFF20) || in(c, 0xFF3B, 0xFF40) || in(c, 0xFF5B, 0xFF65)) {
    return CharClass::Punct;
  }
  if (in(c, 0x4E00, 0x9FFF) || in(c, 0x3400, 0x4DBF) || in(c, 0xF900, 0xFAFF) ||
      in(c, 0x20000, 0x2FFFF) || in(c, 0x3040, 0x30FF) || in(c, 0xAC00, 0xD7AF)) {
    return CharClass::Cjk;
  }
  return CharClass::Word;
}

void flush_cjk(std::vector<std::string_view>& run, TokenSequence& out) {
  if (run.size() == 1) {
    out.emplace_back(run.front());
  } else {
    for (std::size_t i = 0; i + 1 < run.size(); ++i) {
      std::string bigram(run[i]);
      bigram.append(run[i + 1]);
      out.push_back(std::move(bigram));
    }
  }
  run.clear();
}

}  // namespace

TokenSequence tokenize(std::string_view text) {
  TokenSequence out;
  std::string word;
  std::vector<std::string_view> cjk_run;

  auto flush_word = [&] {
    if (!word.empty()) out.push_back(std::move(word));
    word.clear();
  };

  for (std::size_t pos = 0; pos < text.size();) {
    const CodePoint cp = decode(text, pos);
    const std::string_view raw = text.substr(pos, cp.length);
    pos += cp.length;

    switch (classify(cp.value)) {
      case CharClass::Space:
      case CharClass::Punct:
        flush_word();
        if (!cjk_run.empty()) flush_cjk(cjk_run, out);
        break;
      case CharClass::Cjk:
        flush_word();
        cjk_run.push_back(raw);
        break;
      case CharClass::Word:
        if (!cjk_run.empty()) flush_cjk(cjk_run, out);
        if (cp.length == 1 && in(cp.value, 'A', 'Z')) {
          word.push_back(static_cast<char>(cp.value - 'A' + 'a'));
        } else {
          word.append(raw);
        }
        break;
    }
  }
  flush_word();
  if (!cjk_run.empty()) flush_cjk(cjk_run, out);
  return out;
}

CorpusStats::CorpusStats(const std::vector<std::string>& documents) {
  for (const auto& d : documents) add_document(d);
}

CorpusStats::CorpusStats(std::size_t documents, std::unordered_map<std::string, std::size_t> df)
    : documents_(documents), df_(std::move(df)) {}

void CorpusStats::add_document(std::string_view text) {
  ++documents_;
  const TokenSequence tokens = tokenize(text);
  const std::set<std::string> unique(tokens.begin(), tokens.end());
  for (const auto& t : unique) ++df_[t];
}

std::size_t CorpusStats::document_frequency(const std::string& token) const {
  const auto it = df_.find(token);
  return it == df_.end() ? 0 : it->second;
}

double CorpusStats::idf(const std::string& token) const {
  const double n = static_cast<double>(documents_);
  const double df = static_cast<double>(document_frequency(token));
  return std::log((n + 1.0) / (df + 1.0)) + 1.0;
}

TfIdfVector CorpusStats::vectorize(std::string_view text) const { return vectorize(tokenize(text)); }

TfIdfVector CorpusStats::vectorize(const TokenSequence& tokens) const {
  TfIdfVector v;
  for (const auto& t : tokens) v[t] += 1.0;
  for (auto& [token, weight] : v) weight *= idf(token);
  return v;
}

double cosine(const TfIdfVector& a, const TfIdfVector& b) {
  if (a.empty() || b.empty()) return 0.0;
  double dot = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  auto norm = [](const TfIdfVector& v) {
    double s = 0.0;
    for (const auto& [_, w] : v) s += w * w;
    return std::sqrt(s);
  };
  const double denom = norm(a) * norm(b);
  if (!(denom > 0.0)) return 0.0;
  return std::clamp(dot / denom, 0.0, 1.0);
}

double token_jaccard(const TokenSequence& a, const TokenSequence& b) {
  const std::set<std::string> sa(a.begin(), a.end());
  const std::set<std::string> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t shared = 0;
  for (const auto& t : sa) shared += sb.count(t);
  return static_cast<double>(shared) / static_cast<double>(sa.size() + sb.size() - shared);
}

double similarity(std::string_view a, std::string_view b, const CorpusStats& stats) {
  return cosine(stats.vectorize(a), stats.vectorize(b));
}

double relevance_phi(std::string_view q, std::string_view r, const CorpusStats& stats) {
  const TokenSequence tq = tokenize(q);
  const TokenSequence tr = tokenize(r);
  const double blend = 0.5 * cosine(stats.vectorize(tq), stats.vectorize(tr)) +
                       0.5 * token_jaccard(tq, tr);
  return kRelevanceEpsilon + (1.0 - 2.0 * kRelevanceEpsilon) * blend;
}

TfIdfScorer::TfIdfScorer(std::shared_ptr<const CorpusStats> stats) : stats_(std::move(stats)) {
  if (!stats_) throw InvalidInput("TfIdfScorer needs corpus statistics");
}

double TfIdfScorer::similarity(std::string_view a, std::string_view b) const {
  return topicshift::similarity(a, b, *stats_);
}

double TfIdfScorer::relevance(std::string_view query, std::string_view reply) const {
  return relevance_phi(query, reply, *stats_);
}

RerankState build_rerank_state(std::vector<std::string> queries,
                               std::vector<std::string> candidates, const TextScorer& scorer) {
  if (queries.empty() || candidates.empty()) {
    throw InvalidInput("reranking needs at least one query and one candidate");
  }
  const std::size_t nq = queries.size();
  const std::size_t nr = candidates.size();
  RerankState s;
  s.query_similarity = Matrix(nq, nq);
  s.reply_similarity = Matrix(nr, nr);
  s.relevance = Matrix(nq, nr);
  s.textual = Matrix(nq, nr);

  for (std::size_t i = 0; i < nq; ++i) {
    for (std::size_t j = i + 1; j < nq; ++j) {
      const double v = scorer.similarity(queries[i], queries[j]);
      s.query_similarity(i, j) = v;
      s.query_similarity(j, i) = v;
    }
  }
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = i + 1; j < nr; ++j) {
      const double v = scorer.similarity(candidates[i], candidates[j]);
      s.reply_similarity(i, j) = v;
      s.reply_similarity(j, i) = v;
    }
  }
  for (std::size_t i = 0; i < nq; ++i) {
    for (std::size_t j = 0; j < nr; ++j) {
      s.relevance(i, j) = scorer.relevance(queries[i], candidates[j]);
      s.textual(i, j) = scorer.similarity(queries[i], candidates[j]);
    }
  }
  s.query_texts = std::move(queries);
  s.candidate_texts = std::move(candidates);
  return s;
}

}  // namespace topicshift

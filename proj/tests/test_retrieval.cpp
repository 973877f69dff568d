#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "topicshift/errors.hpp"
#include "topicshift/retrieval.hpp"

namespace ts = topicshift;
namespace fs = std::filesystem;

namespace {

std::vector<ts::QueryReplyPair> pairs(const std::vector<std::pair<std::string, std::string>>& qr) {
  std::vector<ts::QueryReplyPair> out;
  for (std::size_t i = 0; i < qr.size(); ++i) out.push_back({i, qr[i].first, qr[i].second});
  return out;
}

ts::CorpusIndex movie_index() {
  return ts::CorpusIndex::build(pairs({{"what movie tonight", "a good movie with friends"},
                                       {"any plans", "watching a movie at home"},
                                       {"weather today", "rain all day long"},
                                       {"best film", "that movie about robots"}}));
}

// `n` replies mentioning `entity`, with decreasing overlap against "robot story".
std::vector<std::pair<std::string, std::string>> full_of(const std::string& entity, std::size_t n) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string reply = entity + " is here again number " + std::to_string(i);
    if (i % 3 == 0) reply += " robot story";
    out.emplace_back("q" + std::to_string(i), reply);
  }
  return out;
}

}  // namespace

TEST(CorpusIndex, Postings) {
  const auto index = movie_index();
  EXPECT_EQ(index.postings("movie"), (std::vector<std::size_t>{0, 1, 3}));
  EXPECT_TRUE(index.postings("zebra").empty());
  EXPECT_EQ(index.stats().documents(), 8u);
}

TEST(CorpusIndex, RejectsBadIds) {
  auto p = pairs({{"a", "b"}, {"c", "d"}});
  p[1].id = 0;
  EXPECT_THROW(ts::CorpusIndex::build(p), ts::InvalidInput);
  EXPECT_THROW(ts::CorpusIndex::build({}), ts::InvalidInput);
}

TEST(CorpusIndex, SaveLoadRoundTrip) {
  const auto index = movie_index();
  const fs::path p = fs::temp_directory_path() / "topicshift_index.json";
  index.save(p);
  const auto loaded = ts::CorpusIndex::load(p);
  ASSERT_EQ(loaded.size(), index.size());
  for (std::size_t i = 0; i < index.size(); ++i) EXPECT_EQ(loaded.pair(i).reply, index.pair(i).reply);
  EXPECT_EQ(loaded.postings("movie"), index.postings("movie"));
  EXPECT_EQ(loaded.stats().document_frequencies(), index.stats().document_frequencies());
}

TEST(Retrieve, SinglePairGeneral) {
  const auto index = ts::CorpusIndex::build(pairs({{"hi", "hello there friend"}}));
  const auto set = ts::retrieve_candidates(index, std::vector<std::string>{"hi"}, {}, ts::RetrievalMode::General);
  ASSERT_EQ(set.items.size(), 1u);
  EXPECT_EQ(set.items[0].pair_id, 0u);
}

TEST(Retrieve, IntroducingReturnsRepliesWithEntity) {
  const auto index = ts::CorpusIndex::build(pairs({{"x", "I love WALL-E so much"},
                                                   {"y", "nothing to see here"},
                                                   {"z", "WALL-E and EVE forever"}}));
  const std::vector<ts::WeightedEntity> e{{"WALL-E", 1.0}};
  const auto set = ts::retrieve_candidates(index, std::vector<std::string>{"robots"}, e,
                                           ts::RetrievalMode::Introducing);
  EXPECT_EQ(set.mode, ts::RetrievalMode::Introducing);
  ASSERT_EQ(set.items.size(), 2u);
  for (const auto& c : set.items) EXPECT_NE(index.pair(c.pair_id).reply.find("WALL-E"), std::string::npos);
}

TEST(Retrieve, CapsOnOverfullEntity) {
  const auto index = ts::CorpusIndex::build(pairs(full_of("瓦力", 60)));
  const std::vector<ts::WeightedEntity> one{{"瓦力", 1.0}};
  const auto set = ts::retrieve_candidates(index, std::vector<std::string>{"robot story"}, one,
                                           ts::RetrievalMode::Introducing);
  EXPECT_EQ(set.items.size(), 10u);
}

TEST(Retrieve, TotalCapAcrossEntities) {
  std::vector<std::pair<std::string, std::string>> qr;
  std::vector<ts::WeightedEntity> entities;
  for (int e = 0; e < 8; ++e) {
    const std::string name = "entity" + std::to_string(e) + "x";
    entities.push_back({name, 0.5});
    for (auto& p : full_of(name, 12)) qr.push_back(p);
  }
  const auto index = ts::CorpusIndex::build(pairs(qr));
  const auto set = ts::retrieve_candidates(index, std::vector<std::string>{"robot story"}, entities,
                                           ts::RetrievalMode::Introducing);
  EXPECT_EQ(set.items.size(), 50u);
  std::set<std::size_t> ids;
  for (const auto& c : set.items) ids.insert(c.pair_id);
  EXPECT_EQ(ids.size(), set.items.size());
  for (std::size_t i = 1; i < set.items.size(); ++i) {
    const auto& a = set.items[i - 1];
    const auto& b = set.items[i];
    EXPECT_TRUE(a.score > b.score || (a.score == b.score && a.pair_id < b.pair_id));
  }
}

TEST(Retrieve, ShortRepliesDropped) {
  const auto index = ts::CorpusIndex::build(pairs({{"a", "瓦力 好"}, {"b", "I met 瓦力 yesterday"}}));
  const std::vector<ts::WeightedEntity> e{{"瓦力", 1.0}};
  const auto set = ts::retrieve_candidates(index, std::vector<std::string>{"hello"}, e,
                                           ts::RetrievalMode::Introducing);
  ASSERT_EQ(set.items.size(), 1u);
  EXPECT_EQ(set.items[0].pair_id, 1u);
}

TEST(Retrieve, IntroducingWithoutEntitiesThrows) {
  const auto index = movie_index();
  EXPECT_THROW(ts::retrieve_candidates(index, std::vector<std::string>{"movie"}, {},
                                       ts::RetrievalMode::Introducing),
               ts::InvalidInput);
}

TEST(Retrieve, GeneralNeverThrows) {
  const auto index = movie_index();
  EXPECT_NO_THROW(ts::retrieve_candidates(index, {}, {}, ts::RetrievalMode::General));
  const auto set = ts::retrieve_candidates(index, std::vector<std::string>{"movie"}, {},
                                           ts::RetrievalMode::General);
  ASSERT_FALSE(set.items.empty());
  EXPECT_EQ(index.pair(set.items[0].pair_id).reply.find("movie") != std::string::npos, true);
}

TEST(Corpus, ShippedFixture) {
  const auto p = ts::load_corpus(fs::path(TOPICSHIFT_DATA_DIR) / "walle" / "corpus.tsv");
  EXPECT_GE(p.size(), 40u);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i].id, i);
}

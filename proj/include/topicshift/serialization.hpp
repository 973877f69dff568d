#pragma once

#include "json.hpp"

#include "topicshift/dialogue.hpp"
#include "topicshift/ranking.hpp"

namespace topicshift {

using Json = nlohmann::ordered_json;

Json to_json(const ResponseTrace& trace);
Json to_json(const ConversationSession& session);
Json to_json(const RankedList& ranked, bool include_trace = true);
Json to_json(const RankParams& params);

}  // namespace topicshift

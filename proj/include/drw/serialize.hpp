#pragma once

#include <json.hpp>

#include "drw/apps.hpp"
#include "drw/congest.hpp"
#include "drw/walk.hpp"

namespace drw {

nlohmann::json to_json(const congest::RoundStats& s);
/// Positions are included only when the walk has been regenerated.
nlohmann::json to_json(const walk::WalkOutcome& w);
nlohmann::json to_json(const apps::SpanningTree& t);
nlohmann::json to_json(const apps::MixingReport& r);
nlohmann::json to_json(const apps::SpectralBounds& b);

}  // namespace drw

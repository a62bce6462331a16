#include "drw/serialize.hpp"

namespace drw {

using nlohmann::json;

json to_json(const congest::RoundStats& s) {
  json j;
  j["rounds_total"] = s.rounds_total;
  j["messages_total"] = s.messages_total;
  j["max_edge_load"] = s.max_edge_load;
  j["per_phase"] = json::object();
  for (const auto& [phase, rounds] : s.per_phase) j["per_phase"][phase] = rounds;
  return j;
}

json to_json(const walk::WalkOutcome& w) {
  json j;
  j["walk"] = w.walk;
  j["source"] = w.source;
  j["destination"] = w.destination;
  j["ell"] = w.ell;
  j["lambda"] = w.lambda;
  j["mode"] = std::string(walk::to_string(w.mode));
  j["connectors"] = w.token.connectors;
  j["stitch_lengths"] = w.stitch_lengths;
  j["naive_steps"] = w.naive_steps;
  if (!w.positions.empty()) {
    json pos = json::object();
    for (std::size_t v = 0; v < w.positions.size(); ++v) {
      if (!w.positions[v].empty()) pos[std::to_string(v)] = w.positions[v];
    }
    j["positions"] = std::move(pos);
  }
  j["stats"] = to_json(w.stats);
  return j;
}

json to_json(const apps::SpanningTree& t) {
  json edges = json::array();
  for (const auto& [a, b] : t.edges()) edges.push_back({a, b});
  return {{"root", t.root},
          {"edges", std::move(edges)},
          {"walk_length", t.walk_length},
          {"phases", t.phases},
          {"stats", to_json(t.stats)}};
}

json to_json(const apps::MixingReport& r) {
  json trace = json::array();
  for (const auto& e : r.trace) {
    trace.push_back({{"ell", e.ell},
                     {"verdict", e.verdict == apps::Verdict::pass ? "PASS" : "FAIL"},
                     {"statistic", e.statistic}});
  }
  return {{"source", r.source},
          {"tau_estimate", r.tau_estimate},
          {"eps", r.eps},
          {"delta", r.delta},
          {"samples", r.samples},
          {"trace", std::move(trace)},
          {"bucket_counts", r.bucket_counts},
          {"bucket_masses", r.bucket_masses},
          {"stats", to_json(r.stats)}};
}

json to_json(const apps::SpectralBounds& b) {
  return {{"gap_low", b.gap_low}, {"gap_high", b.gap_high}, {"phi_low", b.phi_low}, {"phi_high", b.phi_high}};
}

}  // namespace drw

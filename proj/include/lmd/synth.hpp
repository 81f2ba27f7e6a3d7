#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lmd/ingest.hpp"

namespace lmd {

enum class Archetype { star_admin, chain_admin, random_sprawl };

std::string_view to_string(Archetype a);
Archetype parse_archetype(std::string_view text);

// Per-archetype daily behaviour. Ranges are inclusive.
struct ArchetypeShape {
  int pool_min = 8;     // known systems the user works with
  int pool_max = 14;
  int fanout_min = 3;   // destinations touched per day
  int fanout_max = 6;
  int weight_min = 1;   // logins per edge per day
  int weight_max = 6;
};

struct SynthConfig {
  int user_count = 20;
  int days = 28;
  DayIndex start_day = 19000;
  // Archetype mix; normalised internally, each entry in [0, 1].
  double star_share = 0.4;
  double chain_share = 0.4;
  double sprawl_share = 0.2;
  ArchetypeShape star{8, 14, 3, 6, 2, 6};
  ArchetypeShape chain{8, 14, 3, 6, 2, 6};
  ArchetypeShape sprawl{10, 18, 4, 9, 1, 3};
  // Probability that any one daily destination is a never-seen system.
  double novel_rate = 0.02;
  // Probability that the user logs in at all on a given day.
  double activity_rate = 1.0;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument.
  void validate() const;
};

struct SyntheticCorpus {
  std::vector<AuthEvent> events;  // sorted by (timestamp, user, source, destination)
  std::map<std::string, Archetype> archetypes;
};

// Deterministic for a given config; every emitted event is benign.
SyntheticCorpus generate_synthetic_corpus(const SynthConfig& config);

}  // namespace lmd

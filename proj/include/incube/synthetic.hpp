#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "incube/codebook.hpp"
#include "incube/ingest.hpp"

namespace incube {

// Knobs for the fixture generator. Rates are probabilities in [0, 1].
struct GeneratorProfile {
  int first_year = 1970;
  int last_year = 2008;
  double unknown_rate = 0.05;     // unknown date parts, counts, text members
  double multi_slot_rate = 0.15;  // chance of filling each further slot
  double hostage_rate = 0.08;
  double extended_rate = 0.05;
  double property_rate = 0.4;
  double claim_rate = 0.3;
  int group_count = 30;  // distinct perpetrator group names
  int provinces_per_country = 5;
  int cities_per_province = 4;

  // Throws Error when a field is out of range.
  void validate() const;

  // "default", "dense" (no unknowns) or "sparse" (many unknowns).
  static GeneratorProfile named(std::string_view name);
  // JSON object with any subset of the fields above.
  static GeneratorProfile from_json(std::string_view json_text);
};

// Deterministic for a given (seed, profile). Every incident passes
// validate_incident without Error-severity violations. Output is sorted by
// event id.
std::vector<Incident> generate_synthetic(std::uint64_t seed, std::size_t n, const GeneratorProfile& profile,
                                         const CodebookTables& tables);

}  // namespace incube

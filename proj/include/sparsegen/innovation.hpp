#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sparsegen/levy_laws.hpp"

namespace sparsegen {

// Grid-free record of a compound-Poisson innovation w_n on [0, T]: impulses at
// `locations` (sorted ascending) with the matching `amplitudes`. The law, the
// approximation level n (impulse rate) and the root seed are kept as provenance,
// so the realization can be regenerated from its metadata alone.
struct InnovationRealization {
    double T = 1.0;
    std::int64_t n = 1;
    LevyLaw law = LevyLaw::gaussian(0.0, 1.0);
    std::uint64_t seed = 0;
    std::vector<double> locations;
    std::vector<double> amplitudes;

    std::size_t size() const noexcept { return locations.size(); }

    // Throws ConfigError if the invariants (sorted, inside [0, T], equal lengths) fail.
    void validate() const;
};

// K ~ Poisson(n T), K uniform locations on [0, T] (sorted), K i.i.d. amplitudes
// from nth_root(law, n). The count, locations and amplitudes come from three
// sub-streams of `seed`, see rng.hpp.
InnovationRealization simulate_innovation(const LevyLaw& law, std::int64_t n, double T,
                                          std::uint64_t seed);

// Document form (schema in docs/schema.md). Doubles are written in shortest
// round-trip form (at most 17 significant digits), so save/load is bit exact.
nlohmann::json realization_to_json(const InnovationRealization& r);
InnovationRealization realization_from_json(const nlohmann::json& doc);

std::string save_realization(const InnovationRealization& r);
// Throws ParseError (with byte position) on malformed text, ConfigError on schema violations.
InnovationRealization load_realization(std::string_view text);

void save_realization_file(const InnovationRealization& r, const std::filesystem::path& path);
InnovationRealization load_realization_file(const std::filesystem::path& path);

}  // namespace sparsegen

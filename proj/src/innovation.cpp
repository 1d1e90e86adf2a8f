#include "sparsegen/innovation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sparsegen/errors.hpp"

namespace sparsegen {

void InnovationRealization::validate() const {
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("realization: T must be > 0");
    if (n < 1) throw ConfigError("realization: n must be >= 1");
    if (locations.size() != amplitudes.size()) {
        throw ConfigError("realization: locations and amplitudes differ in length");
    }
    for (std::size_t k = 0; k < locations.size(); ++k) {
        const double tau = locations[k];
        if (!(tau >= 0.0 && tau <= T)) throw ConfigError("realization: location outside [0, T]");
        if (k > 0 && tau < locations[k - 1]) throw ConfigError("realization: locations not sorted");
        if (!std::isfinite(amplitudes[k])) throw ConfigError("realization: amplitude not finite");
    }
}

InnovationRealization simulate_innovation(const LevyLaw& law, std::int64_t n, double T,
                                          std::uint64_t seed) {
    if (n < 1) throw ConfigError("simulate_innovation: n must be >= 1");
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("simulate_innovation: T must be > 0");

    InnovationRealization r;
    r.T = T;
    r.n = n;
    r.law = law;
    r.seed = seed;

    auto count_engine = make_engine(seed, Stream::count);
    const double rate = static_cast<double>(n) * T;
    const auto k = std::poisson_distribution<std::int64_t>{rate}(count_engine);

    auto location_engine = make_engine(seed, Stream::locations);
    std::uniform_real_distribution<double> uniform{0.0, T};
    r.locations.resize(static_cast<std::size_t>(k));
    for (auto& tau : r.locations) tau = uniform(location_engine);
    std::sort(r.locations.begin(), r.locations.end());

    auto amplitude_engine = make_engine(seed, Stream::amplitudes);
    RootSampler draw{nth_root(law, n)};
    r.amplitudes.resize(static_cast<std::size_t>(k));
    for (auto& a : r.amplitudes) a = draw(amplitude_engine);
    return r;
}

// ---------------------------------------------------------------------------

nlohmann::json realization_to_json(const InnovationRealization& r) {
    nlohmann::json impulses = nlohmann::json::array();
    for (std::size_t k = 0; k < r.size(); ++k) {
        impulses.push_back(nlohmann::json::array({r.locations[k], r.amplitudes[k]}));
    }
    return nlohmann::json{{"format", "sparsegen.realization"},
                          {"version", 1},
                          {"T", r.T},
                          {"n", r.n},
                          {"seed", r.seed},
                          {"law", law_to_json(r.law)},
                          {"impulses", std::move(impulses)}};
}

InnovationRealization realization_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("realization: document must be an object");
    if (doc.value("format", std::string{}) != "sparsegen.realization") {
        throw ConfigError("realization: format must be 'sparsegen.realization'");
    }
    const auto require = [&doc](const char* key) -> const nlohmann::json& {
        const auto it = doc.find(key);
        if (it == doc.end()) throw ConfigError(std::string{"realization."} + key + " is required");
        return *it;
    };
    InnovationRealization r;
    try {
        r.T = require("T").get<double>();
        r.n = require("n").get<std::int64_t>();
        r.seed = require("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::type_error& e) {
        throw ConfigError(std::string{"realization: "} + e.what());
    }
    r.law = law_from_json(require("law"));
    const auto& impulses = require("impulses");
    if (!impulses.is_array()) throw ConfigError("realization.impulses must be an array");
    r.locations.reserve(impulses.size());
    r.amplitudes.reserve(impulses.size());
    for (const auto& pair : impulses) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
            throw ConfigError("realization.impulses entries must be [tau, amplitude]");
        }
        r.locations.push_back(pair[0].get<double>());
        r.amplitudes.push_back(pair[1].get<double>());
    }
    r.validate();
    return r;
}

std::string save_realization(const InnovationRealization& r) {
    return realization_to_json(r).dump() + "\n";
}

InnovationRealization load_realization(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string{"realization: "} + e.what(), e.byte);
    }
    return realization_from_json(doc);
}

void save_realization_file(const InnovationRealization& r, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
    out << save_realization(r);
    if (!out) throw ConfigError("failed writing " + path.string());
}

InnovationRealization load_realization_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_realization(buffer.str());
}

}  // namespace sparsegen

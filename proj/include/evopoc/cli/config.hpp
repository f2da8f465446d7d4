#pragma once

#include "evopoc/memory/working_memory.hpp"
#include "evopoc/oracle/backend.hpp"
#include "evopoc/profitability/asset.hpp"
#include "evopoc/reachability/path_check.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <set>
#include <string>

namespace evopoc::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Config {
    std::filesystem::path store;  // graph store file
    std::size_t embedding_dim = 256;
    double fusion_tau = 0.95;
    double fusion_variant_floor = 0.80;
    std::size_t fusion_k = 5;
    memory::MemoryOptions memory;
    reach::PathCheckOptions path;
    std::uint32_t gamma_ppm = profit::kDefaultGamma;  // for env pools that omit it
    int iteration_cap = 5;
    oracle::LiveConfig backend;
    std::string numeraire;  // overrides the env's when set
    std::set<std::string> given;  // keys present in the file
};

/// Key/value document with optional [section] headers:
///
///   store = "hkg.json"
///   iteration_cap = 5
///   [fusion]
///   tau = 0.95
///
/// Keys: store, numeraire, iteration_cap, gamma_ppm; embedding.dimension;
/// fusion.tau, fusion.variant_floor, fusion.k; memory.threshold,
/// memory.hop_budget, memory.seed_k, memory.dense_k; solver.node_budget,
/// solver.max_constraints, solver.nonlinear_max_symbols,
/// solver.nonlinear_max_domain, solver.depth_limit, solver.alternates;
/// backend.endpoint, backend.model, backend.temperature, backend.timeout_ms,
/// backend.retries, backend.max_in_flight. Unknown keys and out-of-range
/// values throw ConfigError. The backend credential is never read from the
/// file.
Config parse_config(const std::string& text);
Config load_config(const std::filesystem::path& p);

/// Environment overrides: EVOPOC_API_KEY always; EVOPOC_ENDPOINT,
/// EVOPOC_MODEL and EVOPOC_TEMPERATURE only where the file left them unset.
void apply_backend_env(Config& c);

}  // namespace evopoc::cli

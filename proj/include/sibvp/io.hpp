#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include "sibvp/ivp.hpp"
#include "sibvp/shooting.hpp"

namespace sibvp {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// 15 significant digits, lowercase scientific; keeps table diffs stable.
std::string format_sig15(double v);

/// FNV-1a over the canonical config string; stamped into CSV metadata.
std::uint64_t config_hash(const std::string& canonical);

/// Comment line carrying version and config hash, then the header row.
void write_csv_preamble(std::ostream& os, const std::string& config,
                        const std::string& header);

/// Columns: i, regime, x, u, u_prime, x_prime.
void write_trace_csv(std::ostream& os, const IvpTrace& trace,
                     const std::string& config);

/// Columns: i, x, u, u_prime, regime.
void write_mesh_csv(std::ostream& os, const MsMesh& mesh,
                    const std::string& config);

}  // namespace sibvp

#include "sibvp/io.hpp"

#include <cstdio>

namespace sibvp {

std::string format_sig15(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.14e", v);
  return buf;
}

std::uint64_t config_hash(const std::string& canonical) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void write_csv_preamble(std::ostream& os, const std::string& config,
                        const std::string& header) {
  char hex[24];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(config_hash(config)));
  os << "# sibvp " << kLibraryVersion << " config=" << hex << "\n"
     << header << "\n";
}

namespace {

const char* regime_name(Regime r) {
  return r == Regime::Straight ? "straight" : "inverse";
}

}  // namespace

void write_trace_csv(std::ostream& os, const IvpTrace& trace,
                     const std::string& config) {
  write_csv_preamble(os, config, "i,regime,x,u,u_prime,x_prime");
  for (std::size_t i = 0; i < trace.knots.size(); ++i) {
    const Knot& k = trace.knots[i];
    os << i << ',' << regime_name(k.regime) << ',' << format_sig15(k.x) << ','
       << format_sig15(k.u) << ',' << format_sig15(k.u_prime) << ','
       << format_sig15(k.x_prime) << '\n';
  }
}

void write_mesh_csv(std::ostream& os, const MsMesh& mesh,
                    const std::string& config) {
  write_csv_preamble(os, config, "i,x,u,u_prime,regime");
  for (std::size_t i = 0; i < mesh.points.size(); ++i) {
    const MsPoint& pt = mesh.points[i];
    os << i << ',' << format_sig15(pt.x) << ',' << format_sig15(pt.u) << ','
       << format_sig15(pt.u_prime) << ','
       << (std::abs(pt.u_prime) <= 1.0 ? "straight" : "inverse") << '\n';
  }
}

}  // namespace sibvp

#include "bess/market.hpp"

#include <bit>

#include "bess/errors.hpp"

namespace bess {

std::string_view market_code(Market m) {
  switch (m) {
    case Market::FcrN:
      return "FCRN";
    case Market::FcrD:
      return "FCRD";
    case Market::SpotDischarge:
      return "SDCH";
    case Market::SpotCharge:
      return "SCH";
  }
  return "?";
}

Market parse_market(std::string_view code) {
  if (code == "FCRN" || code == "N") return Market::FcrN;
  if (code == "FCRD" || code == "D") return Market::FcrD;
  if (code == "SDCH") return Market::SpotDischarge;
  if (code == "SCH") return Market::SpotCharge;
  throw ValidationError("unknown market '" + std::string(code) + "'");
}

MarketSet MarketSet::parse(std::string_view list) {
  MarketSet s;
  if (list == "idle") return s;
  // Compact case labels: N, D, S (both spot actions), ND, NDS, ...
  if (!list.empty() && list.find_first_not_of("NDS") == std::string_view::npos) {
    for (char c : list) {
      if (c == 'N') s.insert(Market::FcrN);
      if (c == 'D') s.insert(Market::FcrD);
      if (c == 'S') {
        s.insert(Market::SpotDischarge);
        s.insert(Market::SpotCharge);
      }
    }
    return s;
  }
  while (!list.empty()) {
    const auto comma = list.find(',');
    std::string_view item = list.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item.empty()) throw ValidationError("empty entry in market list");
    s.insert(parse_market(item));
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  if (s.empty()) throw ValidationError("market list is empty; pass 'idle' to disable bidding");
  return s;
}

std::size_t MarketSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::string MarketSet::to_string() const {
  if (empty()) return "idle";
  std::string out;
  for (Market m : kAllMarkets) {
    if (!contains(m)) continue;
    if (!out.empty()) out += ',';
    out += market_code(m);
  }
  return out;
}

}  // namespace bess

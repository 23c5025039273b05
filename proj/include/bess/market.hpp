#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace bess {

/// Markets the battery can bid into in a given hour. FCR-N and FCR-D are
/// pay-as-bid frequency reserves; the two spot actions are pay-as-clear.
enum class Market : std::uint8_t {
  FcrN = 0,
  FcrD = 1,
  SpotDischarge = 2,
  SpotCharge = 3,
};

inline constexpr std::size_t kMarketCount = 4;
inline constexpr std::array<Market, kMarketCount> kAllMarkets{
    Market::FcrN, Market::FcrD, Market::SpotDischarge, Market::SpotCharge};

constexpr std::size_t index(Market m) { return static_cast<std::size_t>(m); }
constexpr Market market_at(std::size_t i) { return kAllMarkets.at(i); }

constexpr bool is_frequency(Market m) {
  return m == Market::FcrN || m == Market::FcrD;
}
constexpr bool is_spot(Market m) { return !is_frequency(m); }

/// File/wire code: FCRN, FCRD, SDCH, SCH.
std::string_view market_code(Market m);

/// Accepts the wire codes and the short CLI aliases N and D.
Market parse_market(std::string_view code);

/// Subset of markets enabled for a run.
class MarketSet {
 public:
  constexpr MarketSet() = default;

  static constexpr MarketSet all() {
    MarketSet s;
    s.bits_ = 0xF;
    return s;
  }
  static constexpr MarketSet none() { return MarketSet{}; }
  static MarketSet of(std::initializer_list<Market> markets) {
    MarketSet s;
    for (Market m : markets) s.insert(m);
    return s;
  }

  /// Parses a comma separated list such as "N,D,SDCH,SCH", or a compact
  /// label such as "NDS" where S stands for both spot actions. The literal
  /// "idle" yields the empty set.
  static MarketSet parse(std::string_view list);

  constexpr bool contains(Market m) const { return (bits_ >> index(m)) & 1U; }
  constexpr void insert(Market m) { bits_ |= static_cast<std::uint8_t>(1U << index(m)); }
  constexpr bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  std::string to_string() const;

  constexpr bool operator==(const MarketSet&) const = default;

 private:
  std::uint8_t bits_ = 0;
};

}  // namespace bess

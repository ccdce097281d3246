#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace qlfit {

// Per-stock holdings with volume-weighted average purchase price, plus the
// cumulative squashed profit driving the win/loss state. Selling realizes
// volume * (price - average cost) and leaves the average cost of the
// remaining shares unchanged.
class Portfolio {
public:
  void buy(const std::string& stock, int64_t volume, double price) {
    Holding& h = holdings_[stock];
    h.avg_price = (h.avg_price * static_cast<double>(h.volume) +
                   price * static_cast<double>(volume)) /
                  static_cast<double>(h.volume + volume);
    h.volume += volume;
  }

  // Raw reward in GBP, or nullopt when the position cannot cover the sale.
  std::optional<double> sell(const std::string& stock, int64_t volume, double price) {
    const auto it = holdings_.find(stock);
    if (it == holdings_.end() || it->second.volume < volume) return std::nullopt;
    const double reward = static_cast<double>(volume) * (price - it->second.avg_price);
    it->second.volume -= volume;
    return reward;
  }

  int64_t holding(const std::string& stock) const {
    const auto it = holdings_.find(stock);
    return it == holdings_.end() ? 0 : it->second.volume;
  }

  double average_price(const std::string& stock) const {
    const auto it = holdings_.find(stock);
    return it == holdings_.end() ? 0.0 : it->second.avg_price;
  }

  double profit = 0.0;  // sum of squashed rewards, maintained by the replay

private:
  struct Holding {
    int64_t volume = 0;
    double avg_price = 0.0;
  };
  std::map<std::string, Holding, std::less<>> holdings_;
};

}  // namespace qlfit

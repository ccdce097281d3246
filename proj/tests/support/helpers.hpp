#pragma once

#include <map>
#include <string>
#include <vector>

#include "qlfit/ingest.hpp"
#include "qlfit/risk.hpp"

namespace testsupport {

inline qlfit::TransactionRecord record(const std::string& player, const std::string& date,
                                       qlfit::TxKind kind, const std::string& stock,
                                       int64_t volume, const std::string& price) {
  qlfit::TransactionRecord rec;
  rec.player = player;
  rec.tx.date = *qlfit::parse_date(date);
  rec.tx.kind = kind;
  rec.tx.stock = stock;
  rec.tx.volume = volume;
  rec.tx.price = *qlfit::Decimal::parse(price);
  rec.tx.total = qlfit::Decimal::from_micro(rec.tx.price.micro() * volume);
  return rec;
}

inline qlfit::RiskClassification classification_of(
    const std::map<std::string, int>& bins) {
  qlfit::RiskClassification cls;
  cls.bins = bins;
  return cls;
}

// One buy of 300 shares at 2.00, then three 100-share sells at 2.50, 2.00,
// and 1.50: raw rewards +50, 0, -50 GBP against a constant 2.00 cost basis.
inline qlfit::PlayerHistory three_sell_history() {
  std::vector<qlfit::TransactionRecord> records{
      record("p1", "2014-01-02", qlfit::TxKind::buy, "VOD", 300, "2.00"),
      record("p1", "2014-01-10", qlfit::TxKind::sell, "VOD", 100, "2.50"),
      record("p1", "2014-01-20", qlfit::TxKind::sell, "VOD", 100, "2.00"),
      record("p1", "2014-02-01", qlfit::TxKind::sell, "VOD", 100, "1.50"),
  };
  return qlfit::build_histories(records).front();
}

}  // namespace testsupport

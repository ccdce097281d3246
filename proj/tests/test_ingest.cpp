#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "qlfit/ingest.hpp"
#include "qlfit/rng.hpp"

using namespace qlfit;

namespace {

ParseResult parse(const std::string& text) {
  std::istringstream in(text);
  return parse_transactions(in);
}

const std::string kHeader = "player,date,type,stock,volume,price,total\n";

}  // namespace

TEST_CASE("a well-formed row maps straight onto a transaction") {
  const auto result = parse(kHeader + "p1,2014-01-15,Sell,VOD,100,2.30,230.00\n");
  REQUIRE(result.records.size() == 1);
  CHECK(result.diagnostics.empty());
  const auto& rec = result.records[0];
  CHECK(rec.player == "p1");
  CHECK(rec.tx.kind == TxKind::sell);
  CHECK(rec.tx.stock == "VOD");
  CHECK(rec.tx.volume == 100);
  CHECK(rec.tx.price.to_string() == "2.3");
  CHECK(rec.tx.total.to_string() == "230");
  CHECK(format_date(rec.tx.date) == "2014-01-15");
}

TEST_CASE("header-only input yields an empty list with no diagnostics") {
  const auto result = parse(kHeader);
  CHECK(result.records.empty());
  CHECK(result.diagnostics.empty());
}

TEST_CASE("zero volume is excluded with a row-level diagnostic") {
  const auto result = parse(kHeader + "p1,2014-01-15,Buy,VOD,0,2.30,0\n");
  CHECK(result.records.empty());
  REQUIRE(result.diagnostics.size() == 1);
  CHECK(result.diagnostics[0].line == 2);
  CHECK(result.diagnostics[0].player == "p1");
}

TEST_CASE("unknown type is a row-level error, case is not") {
  const auto result = parse(kHeader +
                            "p1,2014-01-15,buy,VOD,10,2,20\n"
                            "p1,2014-01-16,SELL,VOD,10,2,20\n"
                            "p1,2014-01-17,Short,VOD,10,2,20\n");
  CHECK(result.records.size() == 2);
  REQUIRE(result.diagnostics.size() == 1);
  CHECK(result.diagnostics[0].line == 4);
}

TEST_CASE("total mismatch warns but keeps the row") {
  const auto result = parse(kHeader + "p1,2014-01-15,Buy,VOD,100,2.30,999\n");
  CHECK(result.records.size() == 1);
  CHECK(result.diagnostics.size() == 1);
}

TEST_CASE("missing header is fatal") {
  std::istringstream in("p1,2014-01-15,Sell,VOD,100,2.30,230.00\n");
  CHECK_THROWS(parse_transactions(in));
}

TEST_CASE("parse -> serialize -> parse is the identity on normalized form") {
  const auto first = parse(kHeader +
                           "p2,2014-02-01,BUY,hsba,50,6.1000,305.000\n"
                           "p1,2014-01-15,Sell,VOD,100,2.30,230.00\n"
                           "p1,2014-01-10,Buy,VOD,150,2.10,315\n");
  const std::string serialized = serialize_transactions(first.records);
  const auto second = parse(serialized);
  CHECK(serialize_transactions(second.records) == serialized);
  REQUIRE(second.records.size() == first.records.size());
  for (size_t i = 0; i < first.records.size(); ++i) {
    CHECK(second.records[i].player == first.records[i].player);
    CHECK(second.records[i].tx.date == first.records[i].tx.date);
    CHECK(second.records[i].tx.volume == first.records[i].tx.volume);
    CHECK(second.records[i].tx.price == first.records[i].tx.price);
    CHECK(second.records[i].tx.total == first.records[i].tx.total);
  }
}

TEST_CASE("histories group players and sort by date stably") {
  const auto parsed = parse(kHeader +
                            "p1,2014-01-20,Buy,VOD,10,2,20\n"
                            "p2,2014-01-05,Buy,HSBA,5,6,30\n"
                            "p1,2014-01-10,Buy,BP,10,5,50\n"
                            "p2,2014-02-05,Sell,HSBA,5,7,35\n"
                            "p1,2014-01-10,Buy,GSK,10,15,150\n");
  const auto histories = build_histories(parsed.records);
  REQUIRE(histories.size() == 2);
  CHECK(histories[0].player_id == "p1");
  CHECK(histories[1].player_id == "p2");
  const auto& txs = histories[0].transactions;
  REQUIRE(txs.size() == 3);
  CHECK(txs[0].stock == "BP");   // same date as GSK, input order preserved
  CHECK(txs[1].stock == "GSK");
  CHECK(txs[2].stock == "VOD");
  CHECK(histories[1].sells.size() == 1);
  CHECK(histories[1].sells[0].raw_reward == doctest::Approx(5.0));
}

TEST_CASE("build_histories is invariant under input permutation") {
  const auto parsed = parse(kHeader +
                            "p1,2014-01-01,Buy,VOD,100,2.00,200\n"
                            "p1,2014-01-08,Sell,VOD,40,2.50,100\n"
                            "p1,2014-01-15,Buy,BP,30,5.00,150\n"
                            "p1,2014-02-01,Sell,VOD,60,1.75,105\n"
                            "p2,2014-01-03,Buy,GSK,10,15.00,150\n");
  auto records = parsed.records;
  const auto baseline = build_histories(records);
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    // Shuffle rows within equal dates too; the stable sort must undo only
    // cross-date disorder, so shuffle whole-date blocks around.
    std::stable_sort(records.begin(), records.end(),
                     [&](const TransactionRecord& a, const TransactionRecord& b) {
                       return a.tx.date < b.tx.date;
                     });
    std::vector<TransactionRecord> rotated;
    for (size_t i = 0; i < records.size(); ++i)
      rotated.push_back(records[(i + 1 + trial) % records.size()]);
    auto histories = build_histories(rotated);
    std::sort(histories.begin(), histories.end(),
              [](const PlayerHistory& a, const PlayerHistory& b) {
                return a.player_id < b.player_id;
              });
    REQUIRE(histories.size() == baseline.size());
    for (size_t h = 0; h < histories.size(); ++h) {
      REQUIRE(histories[h].transactions.size() == baseline[h].transactions.size());
      for (size_t i = 0; i < histories[h].transactions.size(); ++i)
        CHECK(histories[h].transactions[i].date == baseline[h].transactions[i].date);
    }
  }
}

TEST_CASE("oversold positions are flagged and excluded, player kept") {
  std::vector<Diagnostic> diagnostics;
  const auto parsed = parse(kHeader +
                            "p1,2014-01-01,Buy,VOD,50,2.00,100\n"
                            "p1,2014-01-05,Sell,VOD,100,2.50,250\n"
                            "p1,2014-01-10,Sell,VOD,30,3.00,90\n");
  const auto histories = build_histories(parsed.records, &diagnostics);
  REQUIRE(histories.size() == 1);
  CHECK(histories[0].transactions.size() == 3);
  REQUIRE(histories[0].sells.size() == 1);  // the 100-share sell is excluded
  CHECK(histories[0].sells[0].tx_index == 2);
  CHECK(histories[0].sells[0].raw_reward == doctest::Approx(30.0 * 1.0));
  REQUIRE(diagnostics.size() == 1);
  CHECK(diagnostics[0].line == 3);
}

TEST_CASE("buy-only history has an empty sell sequence") {
  const auto parsed = parse(kHeader + "p1,2014-01-01,Buy,VOD,50,2.00,100\n");
  const auto histories = build_histories(parsed.records);
  REQUIRE(histories.size() == 1);
  CHECK(histories[0].sells.empty());
}

TEST_CASE("filter_active applies both thresholds") {
  const auto parsed = parse(kHeader +
                            // one sell only
                            "p1,2014-01-01,Buy,VOD,10,2,20\n"
                            "p1,2014-03-01,Sell,VOD,10,2,20\n"
                            // two sells, 59-day span
                            "p2,2014-01-01,Buy,VOD,20,2,40\n"
                            "p2,2014-01-30,Sell,VOD,10,2,20\n"
                            "p2,2014-03-01,Sell,VOD,10,2,20\n"
                            // two sells, short span
                            "p3,2014-01-01,Buy,VOD,20,2,40\n"
                            "p3,2014-01-02,Sell,VOD,10,2,20\n"
                            "p3,2014-01-03,Sell,VOD,10,2,20\n");
  auto histories = build_histories(parsed.records);
  const auto kept = filter_active(histories, 2, 30);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].player_id == "p2");

  // With the weakest thresholds the filter keeps every player that has a sell.
  const auto all = filter_active(histories, 1, 0);
  CHECK(all.size() == 3);
}

TEST_CASE("cap_transactions truncates chronologically and re-derives sells") {
  const auto parsed = parse(kHeader +
                            "p1,2014-01-01,Buy,VOD,100,2.00,200\n"
                            "p1,2014-01-05,Sell,VOD,50,2.50,125\n"
                            "p1,2014-01-10,Sell,VOD,50,3.00,150\n");
  const auto histories = build_histories(parsed.records);
  const auto& full = histories[0];

  const auto capped = cap_transactions(full, 2);
  CHECK(capped.transactions.size() == 2);
  CHECK(capped.sells.size() == 1);

  // No-op below the cap: identical transactions and sells.
  const auto uncapped = cap_transactions(full, 25);
  CHECK(uncapped.transactions.size() == full.transactions.size());
  CHECK(uncapped.sells.size() == full.sells.size());

  // cap = 1 on a history starting with a buy leaves no sells.
  const auto one = cap_transactions(full, 1);
  CHECK(one.transactions.size() == 1);
  CHECK(one.sells.empty());
}

TEST_CASE("diagnostics serialize as JSON lines") {
  const std::vector<Diagnostic> diagnostics{{5, "p1", "bad row"}};
  CHECK(diagnostics_to_json_lines(diagnostics) ==
        "{\"line\":5,\"message\":\"bad row\",\"player\":\"p1\"}\n");
}

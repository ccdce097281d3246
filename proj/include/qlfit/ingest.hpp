#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qlfit/date.hpp"
#include "qlfit/decimal.hpp"

namespace qlfit {

enum class TxKind { buy, sell };

// One dated buy/sell record for one player. The `total` column is redundant
// (volume * price) and only checked, never used downstream.
struct Transaction {
  Date date;
  TxKind kind = TxKind::buy;
  std::string stock;
  int64_t volume = 0;
  Decimal price;
  Decimal total;
};

struct TransactionRecord {
  std::string player;
  size_t line = 0;  // 1-based source line, for diagnostics
  Transaction tx;
};

struct Diagnostic {
  size_t line = 0;
  std::string player;
  std::string message;
};

// A sell event that survived the no-shorting check, with its raw reward
// (GBP) computed from the volume-weighted average purchase price.
struct SellRecord {
  size_t tx_index = 0;  // into PlayerHistory::transactions
  double raw_reward = 0.0;
};

struct PlayerHistory {
  std::string player_id;
  std::vector<Transaction> transactions;  // nondecreasing by date, stable
  std::vector<SellRecord> sells;

  Date first_date() const { return transactions.front().date; }
  Date last_date() const { return transactions.back().date; }
  int span_days() const {
    return transactions.empty() ? 0 : last_date() - first_date();
  }
};

struct ParseOptions {
  double total_rel_tolerance = 1e-6;
};

struct ParseResult {
  std::vector<TransactionRecord> records;
  std::vector<Diagnostic> diagnostics;
};

// Header `player,date,type,stock,volume,price,total`. Malformed rows become
// diagnostics with their line number; an unreadable stream or a bad header
// throws.
ParseResult parse_transactions(std::istream& in, const ParseOptions& options = {});

// Normalized CSV form of the records (the round-trip fixed point).
std::string serialize_transactions(std::span<const TransactionRecord> records);

// Groups by player (first-appearance order), stable-sorts each player's
// transactions by date, and derives the sell sequence. Sells that exceed the
// volume bought so far are excluded with a diagnostic.
std::vector<PlayerHistory> build_histories(std::span<const TransactionRecord> records,
                                           std::vector<Diagnostic>* diagnostics = nullptr);

// The preprocessing filter: keep players with >= min_sells valid sells and a
// first-to-last span of >= min_span_days days.
std::vector<PlayerHistory> filter_active(std::vector<PlayerHistory> histories,
                                         size_t min_sells, int min_span_days);

// Chronological prefix of `cap` transactions; sells re-derived.
PlayerHistory cap_transactions(const PlayerHistory& history, size_t cap);

std::string diagnostics_to_json_lines(std::span<const Diagnostic> diagnostics);

}  // namespace qlfit

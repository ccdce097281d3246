#include "qlfit/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "qlfit/csv.hpp"
#include "qlfit/portfolio.hpp"

namespace qlfit {

namespace {

constexpr std::string_view kHeader = "player,date,type,stock,volume,price,total";

std::optional<int64_t> parse_volume(std::string_view text) {
  int64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

void derive_sells(PlayerHistory& history, std::vector<Diagnostic>* diagnostics,
                  std::span<const size_t> lines) {
  history.sells.clear();
  Portfolio portfolio;
  for (size_t i = 0; i < history.transactions.size(); ++i) {
    const Transaction& tx = history.transactions[i];
    const double price = tx.price.to_double();
    if (tx.kind == TxKind::buy) {
      portfolio.buy(tx.stock, tx.volume, price);
      continue;
    }
    const auto reward = portfolio.sell(tx.stock, tx.volume, price);
    if (reward) {
      history.sells.push_back({i, *reward});
    } else if (diagnostics) {
      diagnostics->push_back({i < lines.size() ? lines[i] : 0, history.player_id,
                              "sell of " + std::to_string(tx.volume) + " " + tx.stock +
                                  " exceeds holdings; excluded from sell sequence"});
    }
  }
}

}  // namespace

ParseResult parse_transactions(std::istream& in, const ParseOptions& options) {
  if (!in) throw std::runtime_error("transaction stream is not readable");

  std::string line;
  if (!std::getline(in, line)) {
    if (in.bad()) throw std::runtime_error("I/O error reading transaction stream");
    throw std::runtime_error("transaction stream is empty (missing header)");
  }
  {
    auto fields = split_csv_line(line);
    std::string normalized;
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i) normalized.push_back(',');
      normalized += std::string(trim(fields[i]));
    }
    if (!iequals(normalized, kHeader))
      throw std::runtime_error("unexpected transaction header: \"" + line + "\"");
  }

  ParseResult result;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    auto reject = [&](const std::string& msg) {
      const std::string player = fields.empty() ? "" : std::string(trim(fields[0]));
      result.diagnostics.push_back({line_no, player, msg});
    };
    if (fields.size() != 7) {
      reject("expected 7 fields, got " + std::to_string(fields.size()));
      continue;
    }
    TransactionRecord rec;
    rec.player = std::string(trim(fields[0]));
    rec.line = line_no;
    if (rec.player.empty()) {
      reject("empty player id");
      continue;
    }
    const auto date = parse_date(trim(fields[1]));
    if (!date) {
      reject("bad date \"" + std::string(fields[1]) + "\" (want YYYY-MM-DD)");
      continue;
    }
    rec.tx.date = *date;
    const auto kind = trim(fields[2]);
    if (iequals(kind, "buy")) {
      rec.tx.kind = TxKind::buy;
    } else if (iequals(kind, "sell")) {
      rec.tx.kind = TxKind::sell;
    } else {
      reject("unknown type \"" + std::string(kind) + "\"");
      continue;
    }
    rec.tx.stock = std::string(trim(fields[3]));
    if (rec.tx.stock.empty()) {
      reject("empty stock identifier");
      continue;
    }
    const auto volume = parse_volume(trim(fields[4]));
    if (!volume || *volume < 1) {
      reject("volume must be a positive integer, got \"" + std::string(fields[4]) + "\"");
      continue;
    }
    rec.tx.volume = *volume;
    const auto price = Decimal::parse(trim(fields[5]));
    if (!price || price->is_negative()) {
      reject("bad price \"" + std::string(fields[5]) + "\"");
      continue;
    }
    rec.tx.price = *price;
    const auto total = Decimal::parse(trim(fields[6]));
    if (!total) {
      reject("bad total \"" + std::string(fields[6]) + "\"");
      continue;
    }
    rec.tx.total = *total;

    // `total` is redundant; a mismatch is a warning, not a rejection.
    const double expected = static_cast<double>(rec.tx.volume) * rec.tx.price.to_double();
    const double got = rec.tx.total.to_double();
    if (std::abs(got - expected) > options.total_rel_tolerance * std::max(1.0, std::abs(expected))) {
      result.diagnostics.push_back(
          {line_no, rec.player,
           "total " + rec.tx.total.to_string() + " differs from volume*price; row kept"});
    }
    result.records.push_back(std::move(rec));
  }
  if (in.bad()) throw std::runtime_error("I/O error reading transaction stream");
  return result;
}

std::string serialize_transactions(std::span<const TransactionRecord> records) {
  std::string out{kHeader};
  out.push_back('\n');
  for (const auto& rec : records) {
    out += rec.player;
    out.push_back(',');
    out += format_date(rec.tx.date);
    out.push_back(',');
    out += rec.tx.kind == TxKind::buy ? "Buy" : "Sell";
    out.push_back(',');
    out += rec.tx.stock;
    out.push_back(',');
    out += std::to_string(rec.tx.volume);
    out.push_back(',');
    out += rec.tx.price.to_string();
    out.push_back(',');
    out += rec.tx.total.to_string();
    out.push_back('\n');
  }
  return out;
}

std::vector<PlayerHistory> build_histories(std::span<const TransactionRecord> records,
                                           std::vector<Diagnostic>* diagnostics) {
  std::vector<PlayerHistory> histories;
  std::unordered_map<std::string, size_t> index;
  std::vector<std::vector<size_t>> lines;

  for (const auto& rec : records) {
    auto [it, inserted] = index.try_emplace(rec.player, histories.size());
    if (inserted) {
      histories.push_back({rec.player, {}, {}});
      lines.emplace_back();
    }
    histories[it->second].transactions.push_back(rec.tx);
    lines[it->second].push_back(rec.line);
  }

  for (size_t h = 0; h < histories.size(); ++h) {
    PlayerHistory& history = histories[h];
    // Stable sort: date ties keep input order.
    std::vector<size_t> order(history.transactions.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return history.transactions[a].date < history.transactions[b].date;
    });
    std::vector<Transaction> sorted;
    std::vector<size_t> sorted_lines;
    sorted.reserve(order.size());
    sorted_lines.reserve(order.size());
    for (size_t i : order) {
      sorted.push_back(std::move(history.transactions[i]));
      sorted_lines.push_back(lines[h][i]);
    }
    history.transactions = std::move(sorted);
    derive_sells(history, diagnostics, sorted_lines);
  }
  return histories;
}

std::vector<PlayerHistory> filter_active(std::vector<PlayerHistory> histories,
                                         size_t min_sells, int min_span_days) {
  std::erase_if(histories, [&](const PlayerHistory& h) {
    return h.sells.size() < min_sells || h.transactions.empty() ||
           h.span_days() < min_span_days;
  });
  return histories;
}

PlayerHistory cap_transactions(const PlayerHistory& history, size_t cap) {
  PlayerHistory capped;
  capped.player_id = history.player_id;
  const size_t n = std::min(cap, history.transactions.size());
  capped.transactions.assign(history.transactions.begin(),
                             history.transactions.begin() + n);
  derive_sells(capped, nullptr, {});
  return capped;
}

std::string diagnostics_to_json_lines(std::span<const Diagnostic> diagnostics) {
  std::string out;
  for (const auto& d : diagnostics) {
    nlohmann::json j{{"line", d.line}, {"player", d.player}, {"message", d.message}};
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace qlfit

#include "heston_deepcal/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "heston_deepcal/error.hpp"
#include "heston_deepcal/io.hpp"
#include "heston_deepcal/random.hpp"

namespace hdc {

namespace {

bool quote_less(const OptionQuote& a, const OptionQuote& b) {
  if (a.maturity_days != b.maturity_days) return a.maturity_days < b.maturity_days;
  return a.strike < b.strike;
}

std::string describe(const OptionQuote& q) {
  std::ostringstream out;
  out << "(maturity_days=" << q.maturity_days << ", strike=" << q.strike << ")";
  return out.str();
}

}  // namespace

bool is_iso_date(const std::string& text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (text[i] < '0' || text[i] > '9') return false;
  const int month = std::stoi(text.substr(5, 2));
  const int day = std::stoi(text.substr(8, 2));
  const int year = std::stoi(text.substr(0, 4));
  if (month < 1 || month > 12 || day < 1) return false;
  static constexpr int kDays[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (day > kDays[month - 1]) return false;
  const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  return !(month == 2 && day == 29 && !leap);
}

void MarketState::validate() const {
  if (!(spot > 0.0) || !std::isfinite(spot))
    fail(ErrorCode::InvalidMarketState, "spot must be positive and finite");
  if (!std::isfinite(rate)) fail(ErrorCode::InvalidMarketState, "rate must be finite");
  if (!is_iso_date(as_of))
    fail(ErrorCode::InvalidMarketState, "as_of '" + as_of + "' is not an ISO date (YYYY-MM-DD)");
}

OptionChain::OptionChain(MarketState state, std::vector<OptionQuote> quotes)
    : state_(std::move(state)), quotes_(std::move(quotes)) {
  state_.validate();
  if (quotes_.empty()) fail(ErrorCode::EmptyChain, "option chain has no quotes");
  for (const auto& q : quotes_) {
    if (!(q.strike > 0.0) || !std::isfinite(q.strike))
      fail(ErrorCode::NonPositiveStrike, "strike must be positive in quote " + describe(q));
    if (!(q.maturity_days > 0.0) || !std::isfinite(q.maturity_days))
      fail(ErrorCode::InvalidQuote, "maturity must be positive in quote " + describe(q));
    if (!(q.last_price >= 0.0) || !std::isfinite(q.last_price))
      fail(ErrorCode::NegativePrice, "last_price must be >= 0 in quote " + describe(q));
  }
  std::stable_sort(quotes_.begin(), quotes_.end(), quote_less);
  for (std::size_t i = 1; i < quotes_.size(); ++i) {
    if (quotes_[i].maturity_days == quotes_[i - 1].maturity_days &&
        quotes_[i].strike == quotes_[i - 1].strike)
      fail(ErrorCode::DuplicateQuote, "duplicate quote " + describe(quotes_[i]));
  }
}

std::vector<double> OptionChain::maturities_days() const {
  std::vector<double> out;
  for (const auto& q : quotes_)
    if (out.empty() || out.back() != q.maturity_days) out.push_back(q.maturity_days);
  return out;
}

std::vector<double> OptionChain::strikes() const {
  std::vector<double> out;
  out.reserve(quotes_.size());
  for (const auto& q : quotes_) out.push_back(q.strike);
  return out;
}

std::vector<double> OptionChain::last_prices() const {
  std::vector<double> out;
  out.reserve(quotes_.size());
  for (const auto& q : quotes_) out.push_back(q.last_price);
  return out;
}

OptionChain OptionChain::slice(double maturity_days) const {
  std::vector<OptionQuote> subset;
  for (const auto& q : quotes_)
    if (q.maturity_days == maturity_days) subset.push_back(q);
  if (subset.empty()) {
    std::ostringstream msg;
    msg << "no quotes with maturity_days=" << maturity_days;
    fail(ErrorCode::EmptyChain, msg.str());
  }
  return OptionChain(state_, std::move(subset));
}

OptionChain OptionChain::with_quotes(std::vector<OptionQuote> quotes) const {
  return OptionChain(state_, std::move(quotes));
}

bool operator==(const OptionChain& a, const OptionChain& b) {
  const auto qa = a.quotes();
  const auto qb = b.quotes();
  return a.state().spot == b.state().spot && a.state().rate == b.state().rate &&
         a.state().as_of == b.state().as_of && std::equal(qa.begin(), qa.end(), qb.begin(), qb.end());
}

double log_moneyness(double spot, double strike) {
  if (!(spot > 0.0) || !(strike > 0.0))
    fail(ErrorCode::DomainError, "log_moneyness needs positive spot and strike");
  return std::log(spot / strike);
}

OptionChain parse_chain_csv(const std::string& csv_text, const MarketState& state) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::EmptyChain, "chain CSV is empty");

  const auto header = io::split_csv_line(line);
  auto column = [&](const char* name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorCode::MissingColumn, std::string("missing column '") + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t strike_col = column("strike");
  const std::size_t days_col = column("maturity_days");
  const std::size_t price_col = column("last_price");

  std::vector<OptionQuote> quotes;
  std::map<std::pair<double, double>, std::size_t> seen;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    ++row;
    const auto fields = io::split_csv_line(line);
    const std::string where = "row " + std::to_string(row);
    auto field = [&](std::size_t col, const char* name) {
      if (col >= fields.size())
        fail(ErrorCode::MissingColumn, where + ": missing value for '" + name + "'");
      double value = 0.0;
      if (!io::parse_double(fields[col], value) || !std::isfinite(value))
        fail(ErrorCode::ParseError, where + ": cannot parse " + name + " '" + fields[col] + "'");
      return value;
    };
    OptionQuote q{field(strike_col, "strike"), field(days_col, "maturity_days"),
                  field(price_col, "last_price")};
    if (!(q.strike > 0.0))
      fail(ErrorCode::NonPositiveStrike, where + ": strike " + fields[strike_col] + " is not positive");
    if (!(q.maturity_days > 0.0))
      fail(ErrorCode::InvalidQuote, where + ": maturity_days " + fields[days_col] + " is not positive");
    if (q.last_price < 0.0)
      fail(ErrorCode::NegativePrice, where + ": last_price " + fields[price_col] + " is negative");
    const auto [it, inserted] = seen.emplace(std::make_pair(q.maturity_days, q.strike), row);
    if (!inserted)
      fail(ErrorCode::DuplicateQuote,
           where + ": duplicates row " + std::to_string(it->second) + " " + describe(q));
    quotes.push_back(q);
  }
  if (quotes.empty()) fail(ErrorCode::EmptyChain, "chain CSV has a header but no quotes");
  return OptionChain(state, std::move(quotes));
}

std::filesystem::path default_meta_path(const std::filesystem::path& csv_path) {
  auto meta = csv_path;
  meta.replace_extension(".meta.json");
  return meta;
}

MarketState parse_market_state_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("meta JSON: ") + e.what());
  }
  MarketState state;
  try {
    state.spot = doc.at("spot").get<double>();
    state.rate = doc.at("rate").get<double>();
    state.as_of = doc.at("as_of").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::MissingColumn, std::string("meta JSON needs spot, rate, as_of: ") + e.what());
  }
  state.validate();
  return state;
}

std::string market_state_to_json(const MarketState& state) {
  nlohmann::ordered_json doc;
  doc["spot"] = state.spot;
  doc["rate"] = state.rate;
  doc["as_of"] = state.as_of;
  return doc.dump(2) + "\n";
}

OptionChain load_chain(const std::filesystem::path& csv_path, const std::filesystem::path& meta_path) {
  const auto meta = meta_path.empty() ? default_meta_path(csv_path) : meta_path;
  const MarketState state = parse_market_state_json(io::read_text(meta));
  return parse_chain_csv(io::read_text(csv_path), state);
}

std::string chain_to_csv(const OptionChain& chain) {
  std::string out = "strike,maturity_days,last_price\n";
  for (const auto& q : chain.quotes()) {
    out += io::format_double(q.strike) + "," + io::format_double(q.maturity_days) + "," +
           io::format_double(q.last_price) + "\n";
  }
  return out;
}

void save_chain(const OptionChain& chain, const std::filesystem::path& csv_path,
                const std::filesystem::path& meta_path) {
  io::write_atomic(meta_path.empty() ? default_meta_path(csv_path) : meta_path,
                   market_state_to_json(chain.state()));
  io::write_atomic(csv_path, chain_to_csv(chain));
}

SplitStrategy parse_split_strategy(const std::string& name) {
  if (name == "interleaved") return SplitStrategy::Interleaved;
  if (name == "random") return SplitStrategy::Random;
  fail(ErrorCode::InvalidConfig, "unknown split strategy '" + name + "' (interleaved|random)");
}

std::string to_string(SplitStrategy strategy) {
  return strategy == SplitStrategy::Interleaved ? "interleaved" : "random";
}

ChainSplit split_train_test(const OptionChain& chain, double test_fraction, SplitStrategy strategy,
                            std::uint64_t seed) {
  const std::size_t n = chain.size();
  if (n < 5) fail(ErrorCode::TooFewQuotes, "split needs at least 5 quotes, got " + std::to_string(n));
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    fail(ErrorCode::InvalidConfig, "test_fraction must lie in (0, 1)");

  std::vector<bool> is_test(n, false);
  if (strategy == SplitStrategy::Interleaved) {
    const auto k = static_cast<std::size_t>(std::llround(1.0 / test_fraction));
    if (k < 2) fail(ErrorCode::InvalidConfig, "test_fraction too large for an interleaved split");
    for (std::size_t i = k - 1; i < n; i += k) is_test[i] = true;
  } else {
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    CounterRng rng(seed, 0x5EED5);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = true;
  }

  std::vector<OptionQuote> train, test;
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_test[i]) {
      test.push_back(chain[i]);
      positions.push_back(i);
    } else {
      train.push_back(chain[i]);
    }
  }
  if (test.empty() || train.empty())
    fail(ErrorCode::InvalidConfig, "split produced an empty train or test set");

  std::ostringstream spec;
  spec << to_string(strategy) << " test_fraction=" << test_fraction << " seed=" << seed;
  return ChainSplit{chain.with_quotes(std::move(train)), chain.with_quotes(std::move(test)), spec.str(),
                    std::move(positions)};
}

}  // namespace hdc

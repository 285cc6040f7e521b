#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hdc {

inline constexpr double kDaysPerYear = 365.0;  // ACT/365

struct MarketState {
  double spot = 0.0;  // S_t
  double rate = 0.0;  // continuously compounded, per year
  std::string as_of;  // ISO-8601 date, YYYY-MM-DD

  void validate() const;
};

// European call quote. The maturity is kept in calendar days as read from the
// chain file and converted to years on demand.
struct OptionQuote {
  double strike = 0.0;
  double maturity_days = 0.0;
  double last_price = 0.0;

  double maturity() const noexcept { return maturity_days / kDaysPerYear; }
  // Zero-premium quotes are kept but excluded from relative-error metrics.
  bool zero_price() const noexcept { return last_price <= 1e-12; }

  friend bool operator==(const OptionQuote&, const OptionQuote&) = default;
};

// Non-empty, sorted by (maturity, strike), free of duplicate (maturity, strike) pairs.
class OptionChain {
 public:
  OptionChain(MarketState state, std::vector<OptionQuote> quotes);

  const MarketState& state() const noexcept { return state_; }
  std::span<const OptionQuote> quotes() const noexcept { return quotes_; }
  std::size_t size() const noexcept { return quotes_.size(); }
  const OptionQuote& operator[](std::size_t i) const { return quotes_[i]; }

  std::vector<double> maturities_days() const;  // distinct, ascending
  std::vector<double> strikes() const;
  std::vector<double> last_prices() const;

  // Quotes with the given maturity. Throws EmptyChain when none match.
  OptionChain slice(double maturity_days) const;
  // Builds a chain over the same market state from a subset of quotes.
  OptionChain with_quotes(std::vector<OptionQuote> quotes) const;

 private:
  MarketState state_;
  std::vector<OptionQuote> quotes_;
};

bool operator==(const OptionChain& a, const OptionChain& b);

bool is_iso_date(const std::string& text);

double log_moneyness(double spot, double strike);

// Reads `strike,maturity_days,last_price` CSV plus the side-car meta JSON
// {"spot", "rate", "as_of"}. When meta_path is empty, "<stem>.meta.json"
// next to the CSV is used.
OptionChain load_chain(const std::filesystem::path& csv_path,
                       const std::filesystem::path& meta_path = {});

// Parses chain CSV text; rows are numbered from 1 after the header.
OptionChain parse_chain_csv(const std::string& csv_text, const MarketState& state);

std::string chain_to_csv(const OptionChain& chain);
std::string market_state_to_json(const MarketState& state);
MarketState parse_market_state_json(const std::string& text);

// Writes both files atomically.
void save_chain(const OptionChain& chain, const std::filesystem::path& csv_path,
                const std::filesystem::path& meta_path = {});

std::filesystem::path default_meta_path(const std::filesystem::path& csv_path);

enum class SplitStrategy { Interleaved, Random };

SplitStrategy parse_split_strategy(const std::string& name);
std::string to_string(SplitStrategy strategy);

struct ChainSplit {
  OptionChain train;
  OptionChain test;
  std::string split_spec;
  std::vector<std::size_t> test_positions;  // indices into the source chain
};

// Interleaved: every k-th quote (k = round(1/test_fraction)) goes to test, at
// positions k-1, 2k-1, ... so test strikes sit inside the train range.
// Random: round(test_fraction * n) positions drawn without replacement.
ChainSplit split_train_test(const OptionChain& chain, double test_fraction,
                            SplitStrategy strategy, std::uint64_t seed);

}  // namespace hdc

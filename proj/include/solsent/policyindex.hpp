#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "solsent/error.hpp"
#include "solsent/geolocate.hpp"
#include "solsent/util.hpp"

namespace solsent::policy {

using geo::Region;
using geo::StateCode;

/// Base year of the RPS progress measure.
inline constexpr int kBaseYear = 2019;

/// Renewable portfolio standard inputs, all in percentage points.
struct RpsInput {
  std::optional<double> target_percent;
  std::optional<int> target_year;
  double generation_2019 = 0;
};

/// Required annual progress toward the RPS target, in percentage points
/// per year. No target, or a target already met, scores 0.
inline double rps_score(const RpsInput& in) {
  if (!in.target_percent) return 0.0;
  if (in.generation_2019 >= *in.target_percent) return 0.0;
  if (!in.target_year) throw InputError("RPS target not yet met but no target year given");
  if (*in.target_year <= kBaseYear) {
    throw InputError("RPS target not yet met but target year " + std::to_string(*in.target_year) +
                     " is not after " + std::to_string(kBaseYear));
  }
  return (*in.target_percent - in.generation_2019) / static_cast<double>(*in.target_year - kBaseYear);
}

/// Net-metering design features. Ranges: mechanism 0..4, cap/subscriber/
/// compensation 0..1, rollover 0..2. Construct through make().
class NemComponents {
 public:
  static constexpr int kMechanismMax = 4;
  static constexpr int kRolloverMax = 2;

  static NemComponents make(int mechanism, int cap, int subscriber, int compensation, int rollover) {
    auto check = [](int v, int hi, const char* name) {
      if (v < 0 || v > hi) {
        throw InputError(std::string(name) + " = " + std::to_string(v) + " outside 0.." + std::to_string(hi));
      }
    };
    check(mechanism, kMechanismMax, "nem_mechanism");
    check(cap, 1, "nem_cap");
    check(subscriber, 1, "nem_subscriber");
    check(compensation, 1, "nem_compensation");
    check(rollover, kRolloverMax, "nem_rollover");
    return NemComponents(mechanism, cap, subscriber, compensation, rollover);
  }

  int mechanism() const { return mechanism_; }
  int cap() const { return cap_; }
  int subscriber() const { return subscriber_; }
  int compensation() const { return compensation_; }
  int rollover() const { return rollover_; }

 private:
  NemComponents(int m, int c, int s, int comp, int r)
      : mechanism_(m), cap_(c), subscriber_(s), compensation_(comp), rollover_(r) {}
  int mechanism_, cap_, subscriber_, compensation_, rollover_;
};

/// Additive net-metering index, 0..9.
inline int nem_score(const NemComponents& c) {
  return c.mechanism() + c.cap() + c.subscriber() + c.compensation() + c.rollover();
}

/// Every covariate used by the state-level regressions, plus raw inputs.
struct PolicyProfile {
  StateCode state;
  double renewable_generation = 0;
  RpsInput rps_input;
  double rps_score = 0;
  NemComponents nem = NemComponents::make(0, 0, 0, 0, 0);
  int nem_score = 0;
  long long incentives_count = 0;
  double solar_jobs_per_million = 0;
  double electricity_price = 0;
  double solar_radiation = 0;
  Region region = Region::northeast;
};

/// Regression predictors, in table order.
inline const std::vector<std::string>& predictor_names() {
  static const std::vector<std::string> n = {"renewable_generation", "rps",          "net_metering",
                                             "renewable_incentives", "solar_market_maturity",
                                             "electricity_price",    "solar_radiation"};
  return n;
}

inline const std::vector<std::string>& predictor_labels() {
  static const std::vector<std::string> n = {"Renewable generation", "RPS",          "Net metering",
                                             "Renewable incentives", "Solar market maturity",
                                             "Electricity price",    "Solar radiation"};
  return n;
}

inline std::array<double, 7> predictors(const PolicyProfile& p) {
  return {p.renewable_generation,
          p.rps_score,
          static_cast<double>(p.nem_score),
          static_cast<double>(p.incentives_count),
          p.solar_jobs_per_million,
          p.electricity_price,
          p.solar_radiation};
}

/// Validates one table row and derives both scores. Any stored score
/// columns are ignored.
inline std::vector<PolicyProfile> profiles_from_table(const CsvTable& t) {
  static constexpr const char* kColumns[] = {
      "state",           "renewable_generation", "rps_target_percent", "rps_target_year",
      "nem_mechanism",   "nem_cap",              "nem_subscriber",     "nem_compensation",
      "nem_rollover",    "incentives_count",     "solar_jobs_per_million",
      "electricity_price", "solar_radiation",    "region"};
  std::array<std::size_t, std::size(kColumns)> col{};
  for (std::size_t i = 0; i < std::size(kColumns); ++i) col[i] = t.column(kColumns[i]);
  enum : std::size_t {
    kState, kGen, kTarget, kYear, kMech, kCap, kSub, kComp, kRoll, kInc, kJobs, kPrice, kRad, kRegion
  };

  std::array<std::optional<PolicyProfile>, StateCode::count> rows;
  for (const auto& r : t.rows()) {
    const auto& cell = [&](std::size_t k) -> const std::string& { return r.cells[col[k]]; };
    auto fail = [&](std::size_t k, const std::string& msg) -> InputError {
      return InputError(t.where(r) + ": field '" + kColumns[k] + "': " + msg);
    };
    auto real = [&](std::size_t k) {
      auto v = parse_double(cell(k));
      if (!v) throw fail(k, "expected a number, got '" + cell(k) + "'");
      return *v;
    };
    auto integer = [&](std::size_t k) {
      auto v = parse_int(cell(k));
      if (!v) throw fail(k, "expected an integer, got '" + cell(k) + "'");
      return *v;
    };

    auto code = StateCode::parse(cell(kState));
    if (!code) throw fail(kState, "unknown state '" + cell(kState) + "'");
    if (rows[code->index()]) throw fail(kState, "duplicate row for " + std::string(code->code()));

    PolicyProfile p;
    p.state = *code;
    p.renewable_generation = real(kGen);
    if (p.renewable_generation < 0 || p.renewable_generation > 100) throw fail(kGen, "outside 0..100");
    p.rps_input.generation_2019 = p.renewable_generation;
    if (!trim(cell(kTarget)).empty()) {
      double v = real(kTarget);
      if (v < 0 || v > 100) throw fail(kTarget, "outside 0..100");
      p.rps_input.target_percent = v;
    }
    if (!trim(cell(kYear)).empty()) {
      if (!p.rps_input.target_percent) throw fail(kYear, "target year given without target percent");
      p.rps_input.target_year = static_cast<int>(integer(kYear));
    }
    try {
      p.rps_score = rps_score(p.rps_input);
    } catch (const InputError& e) {
      throw fail(kYear, e.what());
    }
    auto small = [&](std::size_t k) { return static_cast<int>(integer(k)); };
    try {
      p.nem = NemComponents::make(small(kMech), small(kCap), small(kSub), small(kComp), small(kRoll));
    } catch (const InputError& e) {
      throw InputError(t.where(r) + ": " + e.what());
    }
    p.nem_score = nem_score(p.nem);
    p.incentives_count = integer(kInc);
    if (p.incentives_count < 0) throw fail(kInc, "must be >= 0");
    p.solar_jobs_per_million = real(kJobs);
    if (p.solar_jobs_per_million < 0) throw fail(kJobs, "must be >= 0");
    p.electricity_price = real(kPrice);
    if (p.electricity_price <= 0) throw fail(kPrice, "must be > 0");
    p.solar_radiation = real(kRad);
    if (p.solar_radiation <= 0) throw fail(kRad, "must be > 0");
    auto region = geo::parse_region(cell(kRegion));
    if (!region) throw fail(kRegion, "unknown region '" + cell(kRegion) + "'");
    if (*region != code->region()) {
      throw fail(kRegion, std::string(code->code()) + " belongs to " + std::string(geo::region_name(code->region())));
    }
    p.region = *region;
    rows[code->index()] = p;
  }
  std::vector<PolicyProfile> out;
  for (std::size_t i = 0; i < StateCode::count; ++i) {
    if (!rows[i]) throw InputError(t.source() + ": missing state " + std::string(StateCode::from_index(i).code()));
    out.push_back(*rows[i]);
  }
  return out;
}

inline std::vector<PolicyProfile> load_profiles(const std::string& path) {
  return profiles_from_table(CsvTable::load(path));
}

/// `state,rps_score,nem_score` for every profile.
inline void write_index_csv(std::ostream& os, const std::vector<PolicyProfile>& profiles) {
  os << "state,rps_score,nem_score\n";
  for (const auto& p : profiles) os << p.state.code() << ',' << format_fixed(p.rps_score, 6) << ',' << p.nem_score << '\n';
}

}  // namespace solsent::policy

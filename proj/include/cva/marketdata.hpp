#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cva {

using Date = std::chrono::sys_days;

Date parse_iso_date(std::string_view text);
std::string format_iso_date(Date d);

// Year fraction between two dates, actual days over 360.
double act360(Date from, Date to);

// Zero-coupon curve with continuously-compounded ACT/360 zero rates.
//
// Interpolation is linear in R(t)*t (log-discount) between pillars, with the
// segment before the first pillar anchored at (0, 0). Queries past the last
// pillar throw OutOfRange.
class YieldCurve {
public:
    struct Pillar {
        Date date;
        double rate;
    };

    YieldCurve(Date anchor, std::vector<Pillar> pillars);

    // Pillars placed at `anchor + round(t * 360)` days; handy for synthetic curves.
    static YieldCurve from_times(Date anchor, std::span<const double> times,
                                 std::span<const double> rates);
    static YieldCurve flat(Date anchor, double rate, double horizon_years);

    Date anchor() const { return anchor_; }
    const std::vector<Pillar>& pillars() const { return pillars_; }
    std::span<const double> times() const { return times_; }
    double horizon() const { return times_.back(); }

    double zero_rate(double t) const;
    double discount(double t) const;
    // Instantaneous forward f(0,t); right-continuous at pillars.
    double forward_rate(double t) const;

private:
    std::size_t segment(double t) const;

    Date anchor_;
    std::vector<Pillar> pillars_;
    std::vector<double> times_;
    std::vector<double> log_df_;  // -R(t_i) * t_i
};

YieldCurve load_yield_curve(const std::filesystem::path& path,
                            std::optional<Date> anchor = std::nullopt);
void save_yield_curve(const YieldCurve& curve, const std::filesystem::path& path);

enum class CurveShape { MarketIncreasing, Flat, Decreasing };

struct CurveScenario {
    CurveShape shape = CurveShape::MarketIncreasing;
    double level = 0.03;
};

CurveShape parse_curve_shape(std::string_view name);
std::string curve_shape_name(CurveShape shape);

// flat: every pillar at `level`; decreasing: pillars reflected about `level`.
YieldCurve make_scenario_curve(const YieldCurve& base, const CurveScenario& scenario);

struct SwaptionQuote {
    double expiry;
    double tenor;
    double vol;
};

// Rectangular ATM lognormal-vol grid, expiries x tenors (years).
class SwaptionVolSurface {
public:
    SwaptionVolSurface(std::vector<double> expiries, std::vector<double> tenors,
                       std::vector<double> vols);

    const std::vector<double>& expiries() const { return expiries_; }
    const std::vector<double>& tenors() const { return tenors_; }
    double vol(std::size_t expiry_index, std::size_t tenor_index) const;
    std::vector<SwaptionQuote> quotes() const;

private:
    std::vector<double> expiries_;
    std::vector<double> tenors_;
    std::vector<double> vols_;  // row-major by expiry
};

SwaptionVolSurface load_swaption_vols(const std::filesystem::path& path);

struct CdsCurve {
    std::vector<double> maturities;   // years
    std::vector<double> spreads_bps;  // running spread per maturity
    double recovery = 0.40;
};

CdsCurve load_cds_curve(const std::filesystem::path& path, double recovery = 0.40);

}  // namespace cva

#include "cva/marketdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "csv.hpp"
#include "cva/errors.hpp"

namespace cva {

namespace {

constexpr double kTimeTolerance = 1e-12;

}  // namespace

Date parse_iso_date(std::string_view text) {
    text = detail::trim(text);
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
        std::sscanf(std::string(text).c_str(), "%4d-%2u-%2u", &y, &m, &d) != 3) {
        throw MalformedInput("bad ISO-8601 date '" + std::string(text) + "'");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    if (!ymd.ok()) {
        throw MalformedInput("invalid calendar date '" + std::string(text) + "'");
    }
    return Date{ymd};
}

std::string format_iso_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

double act360(Date from, Date to) {
    return static_cast<double>((to - from).count()) / 360.0;
}

YieldCurve::YieldCurve(Date anchor, std::vector<Pillar> pillars)
    : anchor_(anchor), pillars_(std::move(pillars)) {
    if (pillars_.empty()) {
        throw MalformedCurve("yield curve needs at least one pillar");
    }
    times_.reserve(pillars_.size());
    log_df_.reserve(pillars_.size());
    Date prev = anchor_;
    for (const auto& p : pillars_) {
        if (p.date <= prev) {
            throw MalformedCurve("pillar dates must be strictly increasing and after the anchor (" +
                                 format_iso_date(p.date) + ")");
        }
        if (!std::isfinite(p.rate)) {
            throw MalformedCurve("non-finite zero rate at " + format_iso_date(p.date));
        }
        const double t = act360(anchor_, p.date);
        if (!(std::exp(-p.rate * t) > 0.0) || p.rate < -kTimeTolerance) {
            throw MalformedCurve("discount factor outside (0,1] at " + format_iso_date(p.date));
        }
        times_.push_back(t);
        log_df_.push_back(-p.rate * t);
        prev = p.date;
    }
}

YieldCurve YieldCurve::from_times(Date anchor, std::span<const double> times,
                                  std::span<const double> rates) {
    if (times.size() != rates.size()) {
        throw MalformedCurve("times/rates size mismatch");
    }
    std::vector<Pillar> pillars;
    pillars.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto days = static_cast<int>(std::lround(times[i] * 360.0));
        pillars.push_back({anchor + std::chrono::days{days}, rates[i]});
    }
    return YieldCurve(anchor, std::move(pillars));
}

YieldCurve YieldCurve::flat(Date anchor, double rate, double horizon_years) {
    std::vector<double> times;
    for (double t = 1.0; t < horizon_years + 1.0 - 1e-9; t += 1.0) {
        times.push_back(t);
    }
    std::vector<double> rates(times.size(), rate);
    return from_times(anchor, times, rates);
}

std::size_t YieldCurve::segment(double t) const {
    if (!(t >= 0.0) || t > times_.back() + kTimeTolerance) {
        throw OutOfRange("curve queried at t=" + std::to_string(t) + " outside [0, " +
                         std::to_string(times_.back()) + "]");
    }
    // index of the first pillar with time >= t
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - times_.begin(),
                                                             std::ssize(times_) - 1));
}

double YieldCurve::discount(double t) const {
    if (t == 0.0) {
        return 1.0;
    }
    const std::size_t i = segment(t);
    if (t == times_[i]) {
        return std::exp(log_df_[i]);
    }
    const double t0 = i == 0 ? 0.0 : times_[i - 1];
    const double l0 = i == 0 ? 0.0 : log_df_[i - 1];
    const double w = (t - t0) / (times_[i] - t0);
    return std::exp(l0 + w * (log_df_[i] - l0));
}

double YieldCurve::zero_rate(double t) const {
    if (t == 0.0) {
        return pillars_.front().rate;
    }
    const std::size_t i = segment(t);
    if (t == times_[i]) {
        return pillars_[i].rate;
    }
    return -std::log(discount(t)) / t;
}

double YieldCurve::forward_rate(double t) const {
    std::size_t i = segment(t);
    if (t == times_[i] && i + 1 < times_.size()) {
        ++i;
    }
    const double t0 = i == 0 ? 0.0 : times_[i - 1];
    const double l0 = i == 0 ? 0.0 : log_df_[i - 1];
    return -(log_df_[i] - l0) / (times_[i] - t0);
}

YieldCurve load_yield_curve(const std::filesystem::path& path, std::optional<Date> anchor) {
    const auto table = detail::read_csv(path);
    detail::expect_header(table, {"date", "rate"}, path);
    if (!anchor) {
        for (const auto& c : table.comments) {
            if (c.rfind("anchor=", 0) == 0) {
                anchor = parse_iso_date(c.substr(7));
            }
        }
    }
    if (!anchor) {
        throw MalformedCurve(path.string() + ": no anchor date (add '# anchor=YYYY-MM-DD')");
    }
    std::vector<YieldCurve::Pillar> pillars;
    pillars.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        pillars.push_back({parse_iso_date(row[0]), detail::to_double(row[1])});
    }
    return YieldCurve(*anchor, std::move(pillars));
}

void save_yield_curve(const YieldCurve& curve, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw MalformedInput("cannot write " + path.string());
    }
    out << "# anchor=" << format_iso_date(curve.anchor()) << "\n";
    out << "date,rate\n";
    char buf[64];
    for (const auto& p : curve.pillars()) {
        std::snprintf(buf, sizeof buf, "%.17g", p.rate);
        out << format_iso_date(p.date) << ',' << buf << '\n';
    }
}

CurveShape parse_curve_shape(std::string_view name) {
    if (name == "market" || name == "market-increasing" || name == "increasing") {
        return CurveShape::MarketIncreasing;
    }
    if (name == "flat") {
        return CurveShape::Flat;
    }
    if (name == "decreasing") {
        return CurveShape::Decreasing;
    }
    throw MalformedInput("unknown curve scenario '" + std::string(name) + "'");
}

std::string curve_shape_name(CurveShape shape) {
    switch (shape) {
        case CurveShape::MarketIncreasing:
            return "market";
        case CurveShape::Flat:
            return "flat";
        case CurveShape::Decreasing:
            return "decreasing";
    }
    return "?";
}

YieldCurve make_scenario_curve(const YieldCurve& base, const CurveScenario& scenario) {
    if (scenario.shape == CurveShape::MarketIncreasing) {
        return base;
    }
    std::vector<YieldCurve::Pillar> pillars = base.pillars();
    for (auto& p : pillars) {
        p.rate = scenario.shape == CurveShape::Flat ? scenario.level
                                                    : 2.0 * scenario.level - p.rate;
        if (p.rate < -kTimeTolerance) {
            throw MalformedCurve("scenario curve has negative zero rate at " +
                                 format_iso_date(p.date));
        }
    }
    return YieldCurve(base.anchor(), std::move(pillars));
}

SwaptionVolSurface::SwaptionVolSurface(std::vector<double> expiries, std::vector<double> tenors,
                                       std::vector<double> vols)
    : expiries_(std::move(expiries)), tenors_(std::move(tenors)), vols_(std::move(vols)) {
    if (vols_.size() != expiries_.size() * tenors_.size() || vols_.empty()) {
        throw MalformedInput("swaption surface is not a rectangular grid");
    }
    for (double v : vols_) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw MalformedInput("swaption vols must be positive");
        }
    }
}

double SwaptionVolSurface::vol(std::size_t expiry_index, std::size_t tenor_index) const {
    return vols_.at(expiry_index * tenors_.size() + tenor_index);
}

std::vector<SwaptionQuote> SwaptionVolSurface::quotes() const {
    std::vector<SwaptionQuote> out;
    out.reserve(vols_.size());
    for (std::size_t i = 0; i < expiries_.size(); ++i) {
        for (std::size_t j = 0; j < tenors_.size(); ++j) {
            out.push_back({expiries_[i], tenors_[j], vol(i, j)});
        }
    }
    return out;
}

SwaptionVolSurface load_swaption_vols(const std::filesystem::path& path) {
    const auto table = detail::read_csv(path);
    detail::expect_header(table, {"expiry_years", "tenor_years", "vol"}, path);
    std::vector<double> expiries;
    std::vector<double> tenors;
    for (const auto& row : table.rows) {
        const double e = detail::to_double(row[0]);
        const double t = detail::to_double(row[1]);
        if (std::find(expiries.begin(), expiries.end(), e) == expiries.end()) {
            expiries.push_back(e);
        }
        if (std::find(tenors.begin(), tenors.end(), t) == tenors.end()) {
            tenors.push_back(t);
        }
    }
    std::sort(expiries.begin(), expiries.end());
    std::sort(tenors.begin(), tenors.end());
    std::vector<double> vols(expiries.size() * tenors.size(), -1.0);
    for (const auto& row : table.rows) {
        const auto ei = std::find(expiries.begin(), expiries.end(), detail::to_double(row[0])) -
                        expiries.begin();
        const auto ti = std::find(tenors.begin(), tenors.end(), detail::to_double(row[1])) -
                        tenors.begin();
        vols[static_cast<std::size_t>(ei) * tenors.size() + static_cast<std::size_t>(ti)] =
            detail::to_double(row[2]);
    }
    if (std::any_of(vols.begin(), vols.end(), [](double v) { return v < 0.0; })) {
        throw MalformedInput(path.string() + ": swaption grid has holes");
    }
    return SwaptionVolSurface(std::move(expiries), std::move(tenors), std::move(vols));
}

CdsCurve load_cds_curve(const std::filesystem::path& path, double recovery) {
    const auto table = detail::read_csv(path);
    detail::expect_header(table, {"maturity_years", "spread_bps"}, path);
    if (!(recovery >= 0.0 && recovery < 1.0)) {
        throw MalformedInput("recovery must lie in [0,1)");
    }
    CdsCurve cds;
    cds.recovery = recovery;
    double prev = 0.0;
    for (const auto& row : table.rows) {
        const double m = detail::to_double(row[0]);
        const double s = detail::to_double(row[1]);
        if (m <= prev) {
            throw MalformedInput(path.string() + ": CDS maturities must increase");
        }
        if (s < 0.0) {
            throw MalformedInput(path.string() + ": negative CDS spread");
        }
        cds.maturities.push_back(m);
        cds.spreads_bps.push_back(s);
        prev = m;
    }
    if (cds.maturities.empty()) {
        throw MalformedInput(path.string() + ": empty CDS curve");
    }
    return cds;
}

}  // namespace cva

#include "sagopt/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "sagopt/random.hpp"

namespace sagopt {

namespace {

// Column positions in mill_schema().
enum Col : std::size_t {
    weight = 0,
    power,
    speed,
    water,
    feeder1,
    feeder2,
    feeder3,
    crusher1,
    crusher2,
    pl13,
    pl13_19,
    pl19_26,
    pl26_37,
    pl37_53,
    pl53_75,
    pl75_106,
    pl106_150,
    pl150_212,
    pl212_300,
    p80,
    n_cols
};

double sat(double u, double k) { return (1.0 - std::exp(-k * u)) / (1.0 - std::exp(-k)); }

double bump(double u, double c, double w)
{
    const double z = (u - c) / w;
    return std::exp(-z * z);
}

struct Inert {
    Col col;
    double mean;
    double spread;
};

// Typical values and (deliberately narrow) spread of the inert size fractions.
constexpr Inert inert_columns[] = {
    {pl13_19, 5.19, 0.36},
    {pl53_75, 12.91, 0.31},
    {pl150_212, 1.60, 0.22},
    {pl212_300, 0.67, 0.12},
};

} // namespace

Schema mill_schema()
{
    Schema s;
    s.features = {
        {"Mill weight", "t", 440.14, 744.59},
        {"Mill power draw", "kW", 0.01, 14424.22},
        {"Mill turning speed", "rpm", 0.00, 10.31},
        {"Inlet water", "m3/h", 7.40, 482.86},
        {"Feeder 1 ratio", "-", 0.10, 1.00},
        {"Feeder 2 ratio", "-", 0.50, 1.70},
        {"Feeder 3 ratio", "-", 0.05, 1.00},
        {"Pebble crusher 1 working status", "-", 0.0, 2.0},
        {"Pebble crusher 2 working status", "-", 0.0, 2.0},
        {"%PL 13.2mm", "%", 5.30, 99.30},
        {"%PL 13.2-19mm", "%", 0.00, 82.70},
        {"%PL 19-26.5mm", "%", 0.00, 25.00},
        {"%PL 26.5-37.5mm", "%", 0.00, 34.00},
        {"%PL 37.5-53mm", "%", 0.00, 16.00},
        {"%PL 53-75mm", "%", 0.00, 24.00},
        {"%PL 75-106mm", "%", 0.00, 71.00},
        {"%PL 106-150mm", "%", 0.00, 35.00},
        {"%PL 150-212mm", "%", 0.00, 5.00},
        {"%PL 212-300mm", "%", 0.00, 1.00},
        {"P80", "mm", 4.00, 100.00},
    };
    s.target = {"Mill throughput", "t/h", 0.00, 1616.99};
    return s;
}

MillGroundTruth::MillGroundTruth() : schema_(mill_schema()) {}

double MillGroundTruth::operator()(std::span<const double> row) const
{
    if (row.size() != n_cols) {
        throw DimensionError("ground truth expects a full 20-feature mill row");
    }
    auto u = [&](Col c) {
        const auto& f = schema_.features[c];
        return (row[c] - f.lower) / (f.upper - f.lower);
    };
    return base_level
        + 160.0 * bump(u(power), 0.55, 0.25) * bump(u(weight), 0.50, 0.30)
        + 100.0 * bump(u(weight), 0.50, 0.22)
        + 85.0 * sat(u(speed), 4.0) * bump(u(water), 0.50, 0.25)
        + 70.0 * bump(u(feeder1), 0.45, 0.25)
        + 75.0 * bump(u(feeder2), 0.55, 0.25) * bump(u(feeder3), 0.50, 0.30)
        + 45.0 * u(crusher1) * bump(u(pl13), 0.40, 0.35)
        + 55.0 * bump(u(pl13), 0.40, 0.30)
        + 45.0 * bump(u(pl19_26), 0.50, 0.25)
        + 55.0 * bump(u(pl26_37), 0.45, 0.30) * bump(u(pl37_53), 0.50, 0.35)
        + 40.0 * bump(u(pl37_53), 0.50, 0.25)
        + 65.0 * sat(u(pl75_106), 3.0) * bump(u(pl106_150), 0.40, 0.35)
        + 75.0 * bump(u(p80), 0.60, 0.25);
}

std::vector<double> MillGroundTruth::maximizer() const
{
    std::vector<double> peak_u(n_cols, 0.5);
    peak_u[weight] = 0.50;
    peak_u[power] = 0.55;
    peak_u[speed] = 1.0;
    peak_u[water] = 0.50;
    peak_u[feeder1] = 0.45;
    peak_u[feeder2] = 0.55;
    peak_u[feeder3] = 0.50;
    peak_u[crusher1] = 1.0;
    peak_u[pl13] = 0.40;
    peak_u[pl19_26] = 0.50;
    peak_u[pl26_37] = 0.45;
    peak_u[pl37_53] = 0.50;
    peak_u[pl75_106] = 1.0;
    peak_u[pl106_150] = 0.40;
    peak_u[p80] = 0.60;
    std::vector<double> x(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c) {
        const auto& f = schema_.features[c];
        x[c] = f.lower + peak_u[c] * (f.upper - f.lower);
    }
    x[crusher2] = 1.0;
    for (const auto& in : inert_columns) {
        x[in.col] = in.mean;
    }
    return x;
}

std::vector<std::string> MillGroundTruth::signal_features()
{
    const auto names = mill_schema().feature_names();
    const auto inert = inert_features();
    std::vector<std::string> out;
    for (const auto& n : names) {
        if (std::find(inert.begin(), inert.end(), n) == inert.end()) {
            out.push_back(n);
        }
    }
    return out;
}

std::vector<std::string> MillGroundTruth::inert_features()
{
    return {"Pebble crusher 2 working status", "%PL 13.2-19mm", "%PL 53-75mm", "%PL 150-212mm", "%PL 212-300mm"};
}

Dataset generate_synthetic_mill(std::size_t n, std::uint64_t seed, double noise_std)
{
    if (n == 0) {
        throw InvalidArgument("synthetic dataset needs at least one row");
    }
    if (!(noise_std >= 0.0)) {
        throw InvalidArgument("noise_std must be non-negative");
    }
    const Schema schema = mill_schema();
    const MillGroundTruth truth;
    Rng rng = make_rng(seed, {0x73796e7468ULL});
    std::normal_distribution<double> gauss(0.0, 1.0);

    Matrix x(n, n_cols);
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
        auto row = x.row(r);
        for (std::size_t c = 0; c < n_cols; ++c) {
            const auto& f = schema.features[c];
            row[c] = f.lower + uniform01(rng) * (f.upper - f.lower);
        }
        row[crusher1] = static_cast<double>(uniform_index(rng, 3));
        const double u = uniform01(rng);
        row[crusher2] = u < 0.9 ? 1.0 : (u < 0.95 ? 0.0 : 2.0);
        for (const auto& in : inert_columns) {
            const auto& f = schema.features[in.col];
            double v = 0.0;
            do {
                v = in.mean + in.spread * gauss(rng);
            } while (v < f.lower || v > f.upper);
            row[in.col] = v;
        }
        const double noise = noise_std > 0.0 ? noise_std * gauss(rng) : 0.0;
        y[r] = truth(row) + noise;
    }
    return {schema, std::move(x), std::move(y)};
}

} // namespace sagopt

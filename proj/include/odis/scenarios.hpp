#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "odis/problem.hpp"

namespace odis {

// ---------------------------------------------------------------------------
// Synthetic microgrid family: f_{i,t}(x) = a_{i,t} x'x + b_{i,t}'x subject to
// the aggregate of g_{i,t}(x) = c_{i,t} x'x + q_{i,t}'x + e_{i,t} (n = 1).
// Coefficients follow clamped random walks; see build_synthetic.
// ---------------------------------------------------------------------------

struct SyntheticSpec {
    int nodes = 5;
    std::vector<int> dims;  // d_i per node; uniform_dims() fills it
    int horizon = 200;
    std::uint64_t seed = 0;

    // Initial draw ranges.
    double a_init_lo = 1.0, a_init_hi = 15.0;
    double b_init_lo = 0.0, b_init_hi = 10.0;
    double c_init_lo = 1.0, c_init_hi = 5.0;
    double q_init_lo = 0.0, q_init_hi = 5.0;
    double e_init_lo = -30.0, e_init_hi = 0.0;

    // Walk increments: one shared vector draw eps1 ~ U[-increment, increment]^d
    // feeds both b and q, one shared scalar draw eps2 feeds a, c, and (scaled
    // by e_increment_scale) e.
    double increment = 0.05;
    double e_increment_scale = 10.0;

    double radius = 300.0;           // feasible ball
    double positivity_floor = 0.01;  // convexity clamp for a and c

    SyntheticSpec& uniform_dims(int d) {
        dims.assign(static_cast<std::size_t>(nodes), d);
        return *this;
    }
};

/// Materialized coefficient streams, one row per t = 1..T.
struct SyntheticCoefficients {
    std::vector<std::vector<double>> a, c, e;                // [t][i]
    std::vector<std::vector<VectorXd>> b, q;                 // [t][i]
};

SyntheticCoefficients generate_synthetic_coefficients(const SyntheticSpec& spec);

/// Deterministic per (spec, seed); convex at every t (positivity clamps).
Scenario build_synthetic(const SyntheticSpec& spec);

// ---------------------------------------------------------------------------
// Electricity market series and the dispatch family: for generator i,
// f_{i,t}(x) = a_i x^2 + b_i x + c_i - P_t x and g_{i,t}(x) = s_i D_t - x,
// so the aggregate constraint is D_t - sum_i x_i <= 0.
// ---------------------------------------------------------------------------

struct MarketSeries {
    std::vector<std::int64_t> timestamps;  // epoch seconds, strictly increasing
    std::vector<double> price;             // $/MWh
    std::vector<double> demand;            // MW
    std::string region;
    int interval_minutes = 5;
    std::vector<std::string> warnings;     // e.g. non-positive demand rows

    std::size_t size() const { return timestamps.size(); }
};

/// Reads `timestamp,price,demand` CSV (header required, ISO-8601 local
/// timestamps). Throws ParseError with the offending line number on a
/// malformed row and IngestError (listing timestamps) on gaps or
/// non-uniform spacing. Non-positive demand is kept and recorded as a
/// warning.
MarketSeries ingest_market_csv(const std::string& path, const std::string& region,
                               int expected_interval_minutes);

/// Inverse of ingest_market_csv; round-trips exactly.
void write_market_csv(const MarketSeries& series, const std::string& path);

/// Stand-in feed when no real market file is available: daily sinusoidal
/// price and demand profiles with seeded noise at 5-minute cadence.
MarketSeries synthesize_market_series(int steps, std::uint64_t seed,
                                      int interval_minutes = 5,
                                      double base_price = 40.0,
                                      double price_amplitude = 15.0,
                                      double base_demand = 7000.0,
                                      double demand_amplitude = 1500.0);

struct DispatchSpec {
    std::vector<QuadraticScalarCost> costs;  // one per generator
    std::vector<double> shares;              // empty means uniform
    double output_min = 0.0;
    double output_max = 0.0;  // <= 0 means 2 max_t D_t / N
};

/// Generator cost coefficients used throughout the dispatch experiments.
std::vector<QuadraticScalarCost> default_dispatch_costs();

Scenario build_dispatch(const MarketSeries& series, const DispatchSpec& spec);

// ---------------------------------------------------------------------------
// Vehicle-charging family with vector constraints: f_{i,t}(x) =
// (a_{i,t}/2)||x||^2 + beta_{i,t}'x, g_{i,t}(x) = A_{i,t} x - d_{i,t} (n >= 1).
// ---------------------------------------------------------------------------

struct PevSpec {
    int nodes = 5;
    int dims = 2;
    int constraint_dim = 3;
    int horizon = 100;
    std::uint64_t seed = 0;

    double a_lo = 1.0, a_hi = 5.0;
    double beta_amp = 5.0;       // beta ~ U[-amp, amp]^d
    double a_mat_hi = 1.0;       // A entries ~ U[0, hi]
    double rhs_hi = 5.0;         // d ~ U[0, hi]^n
    double increment = 0.05;     // walks for a, beta, d
    double a_mat_increment = 0.01;
    double radius = 10.0;
    double positivity_floor = 0.01;
};

Scenario build_pev(const PevSpec& spec);

}  // namespace odis

#include "odis/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "odis/rng.hpp"

namespace odis {

namespace {

// Stream kinds for the per-node splittable RNG.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kWalkStream = 1;

constexpr double kPi = 3.14159265358979323846;

}  // namespace

// ---------------------------------------------------------------------------
// Synthetic family
// ---------------------------------------------------------------------------

SyntheticCoefficients generate_synthetic_coefficients(const SyntheticSpec& spec) {
    if (spec.nodes < 1) throw ContractError("build_synthetic: need at least one node");
    if (static_cast<int>(spec.dims.size()) != spec.nodes)
        throw ContractError("build_synthetic: dims must list one entry per node");
    if (spec.horizon < 1) throw ContractError("build_synthetic: horizon must be >= 1");

    const int big_n = spec.nodes;
    const int horizon = spec.horizon;
    SyntheticCoefficients coef;
    coef.a.assign(horizon, std::vector<double>(big_n));
    coef.c.assign(horizon, std::vector<double>(big_n));
    coef.e.assign(horizon, std::vector<double>(big_n));
    coef.b.assign(horizon, std::vector<VectorXd>(big_n));
    coef.q.assign(horizon, std::vector<VectorXd>(big_n));

    for (int i = 0; i < big_n; ++i) {
        const int d = spec.dims[static_cast<std::size_t>(i)];
        auto init = Rng::stream(spec.seed, static_cast<std::uint64_t>(i), kInitStream);
        auto walk = Rng::stream(spec.seed, static_cast<std::uint64_t>(i), kWalkStream);

        // Fixed draw order: a, b components, c, q components, e.
        coef.a[0][i] = init.uniform(spec.a_init_lo, spec.a_init_hi);
        VectorXd b(d), q(d);
        for (int k = 0; k < d; ++k) b(k) = init.uniform(spec.b_init_lo, spec.b_init_hi);
        coef.c[0][i] = init.uniform(spec.c_init_lo, spec.c_init_hi);
        for (int k = 0; k < d; ++k) q(k) = init.uniform(spec.q_init_lo, spec.q_init_hi);
        coef.e[0][i] = init.uniform(spec.e_init_lo, spec.e_init_hi);
        coef.b[0][i] = b;
        coef.q[0][i] = q;

        for (int t = 1; t < horizon; ++t) {
            // One shared eps1 vector for b and q, one shared eps2 scalar for
            // a, c, and the (scaled) e walk.
            VectorXd eps1(d);
            for (int k = 0; k < d; ++k)
                eps1(k) = walk.uniform(-spec.increment, spec.increment);
            const double eps2 = walk.uniform(-spec.increment, spec.increment);
            coef.b[t][i] = coef.b[t - 1][i] + eps1;
            coef.q[t][i] = coef.q[t - 1][i] + eps1;
            coef.a[t][i] = std::max(spec.positivity_floor, coef.a[t - 1][i] + eps2);
            coef.c[t][i] = std::max(spec.positivity_floor, coef.c[t - 1][i] + eps2);
            coef.e[t][i] = coef.e[t - 1][i] + spec.e_increment_scale * eps2;
        }
    }
    return coef;
}

Scenario build_synthetic(const SyntheticSpec& spec) {
    auto coef = std::make_shared<const SyntheticCoefficients>(
        generate_synthetic_coefficients(spec));

    Scenario scenario;
    scenario.id = "synthetic(N=" + std::to_string(spec.nodes) +
                  ",T=" + std::to_string(spec.horizon) +
                  ",seed=" + std::to_string(spec.seed) + ")";
    scenario.horizon = spec.horizon;
    scenario.problems.reserve(static_cast<std::size_t>(spec.nodes));

    for (int i = 0; i < spec.nodes; ++i) {
        const int d = spec.dims[static_cast<std::size_t>(i)];
        NodeProblem p;
        p.id = i;
        p.decision_dim = d;
        p.constraint_dim = 1;
        p.horizon = spec.horizon;
        p.set = FeasibleSet::ball(d, spec.radius);
        p.objective = [coef, i](int t, const VectorXd& x) {
            return coef->a[t - 1][i] * x.squaredNorm() + coef->b[t - 1][i].dot(x);
        };
        p.objective_grad = [coef, i](int t, const VectorXd& x) -> VectorXd {
            return 2.0 * coef->a[t - 1][i] * x + coef->b[t - 1][i];
        };
        p.constraint = [coef, i](int t, const VectorXd& x) -> VectorXd {
            VectorXd g(1);
            g(0) = coef->c[t - 1][i] * x.squaredNorm() + coef->q[t - 1][i].dot(x) +
                   coef->e[t - 1][i];
            return g;
        };
        p.constraint_jac = [coef, i, d](int t, const VectorXd& x) -> MatrixXd {
            MatrixXd jac(1, d);
            jac.row(0) = (2.0 * coef->c[t - 1][i] * x + coef->q[t - 1][i]).transpose();
            return jac;
        };
        const FeasibleSet set = p.set;
        p.penalized_argmin = [coef, i, set](int t, const VectorXd& nu) -> VectorXd {
            // Isotropic quadratic: the constrained minimizer is the projected
            // unconstrained one.
            const double w = coef->a[t - 1][i] + nu(0) * coef->c[t - 1][i];
            const VectorXd v = coef->b[t - 1][i] + nu(0) * coef->q[t - 1][i];
            return set.project(-v / (2.0 * w));
        };
        scenario.problems.push_back(std::move(p));
    }
    return scenario;
}

// ---------------------------------------------------------------------------
// Market series I/O
// ---------------------------------------------------------------------------

namespace {

// Civil-time conversion (Howard Hinnant's days_from_civil); timestamps are
// treated as naive local time.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) -
           719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

// Accepts YYYY-MM-DD[T ]HH:MM[:SS].
bool parse_iso8601(const std::string& text, std::int64_t& out) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char sep = 0;
    const int got = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep,
                                &h, &mi, &s);
    if (got < 6) return false;
    if (sep != 'T' && sep != ' ') return false;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 ||
        s < 0 || s > 60)
        return false;
    out = days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
    return true;
}

std::string format_iso8601(std::int64_t ts) {
    std::int64_t days = ts / 86400;
    std::int64_t rem = ts % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02lld:%02lld:%02lld", y, m, d,
                  static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem % 3600) / 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

MarketSeries ingest_market_csv(const std::string& path, const std::string& region,
                               int expected_interval_minutes) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open market CSV '" + path + "'");

    MarketSeries series;
    series.region = region;
    series.interval_minutes = expected_interval_minutes;

    std::string line;
    long line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty market CSV '" + path + "'", 0);
    ++line_no;
    // Tolerate surrounding whitespace and an optional UTF-8 BOM in the header.
    std::string header = line;
    if (header.size() >= 3 && header.compare(0, 3, "\xEF\xBB\xBF") == 0)
        header = header.substr(3);
    header.erase(std::remove_if(header.begin(), header.end(),
                                [](char c) { return c == ' ' || c == '\r'; }),
                 header.end());
    if (header != "timestamp,price,demand")
        throw ParseError("expected header 'timestamp,price,demand', got '" + line + "'",
                         line_no);

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string ts_str, price_str, demand_str;
        if (!std::getline(ss, ts_str, ',') || !std::getline(ss, price_str, ',') ||
            !std::getline(ss, demand_str))
            throw ParseError("malformed row '" + line + "'", line_no);
        std::int64_t ts = 0;
        if (!parse_iso8601(ts_str, ts))
            throw ParseError("bad timestamp '" + ts_str + "'", line_no);
        double price = 0.0, demand = 0.0;
        try {
            std::size_t pos = 0;
            price = std::stod(price_str, &pos);
            if (pos != price_str.size()) throw std::invalid_argument(price_str);
            demand = std::stod(demand_str, &pos);
            if (pos != demand_str.size()) throw std::invalid_argument(demand_str);
        } catch (const std::exception&) {
            throw ParseError("bad numeric field in row '" + line + "'", line_no);
        }
        if (demand <= 0.0)
            series.warnings.push_back("non-positive demand at " + ts_str);
        series.timestamps.push_back(ts);
        series.price.push_back(price);
        series.demand.push_back(demand);
    }
    if (series.timestamps.empty())
        throw ParseError("market CSV '" + path + "' has no data rows", line_no);

    const std::int64_t step = static_cast<std::int64_t>(expected_interval_minutes) * 60;
    std::string gaps;
    for (std::size_t k = 1; k < series.timestamps.size(); ++k) {
        const std::int64_t delta = series.timestamps[k] - series.timestamps[k - 1];
        if (delta != step) {
            if (!gaps.empty()) gaps += ", ";
            gaps += format_iso8601(series.timestamps[k - 1]) + " -> " +
                    format_iso8601(series.timestamps[k]);
        }
    }
    if (!gaps.empty())
        throw IngestError("non-uniform spacing (expected " +
                          std::to_string(expected_interval_minutes) + " min) between: " +
                          gaps);
    return series;
}

void write_market_csv(const MarketSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out << "timestamp,price,demand\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        out << format_iso8601(series.timestamps[k]) << ',' << format_double(series.price[k])
            << ',' << format_double(series.demand[k]) << '\n';
    }
    if (!out) throw ParseError("failed writing '" + path + "'");
}

MarketSeries synthesize_market_series(int steps, std::uint64_t seed, int interval_minutes,
                                      double base_price, double price_amplitude,
                                      double base_demand, double demand_amplitude) {
    if (steps < 1) throw ContractError("synthesize_market_series: steps must be >= 1");
    MarketSeries series;
    series.region = "SYN";
    series.interval_minutes = interval_minutes;
    auto rng = Rng::stream(seed, 0, /*kind=*/7);

    const double steps_per_day = 1440.0 / interval_minutes;
    // Arbitrary fixed start: 2024-07-05T00:00:00, matching the cadence of the
    // real feeds this stands in for.
    const std::int64_t start = days_from_civil(2024, 7, 5) * 86400;
    for (int k = 0; k < steps; ++k) {
        const double phase = 2.0 * kPi * static_cast<double>(k) / steps_per_day;
        const double price = base_price + price_amplitude * std::sin(phase - kPi / 3.0) +
                             0.05 * base_price * rng.uniform(-1.0, 1.0);
        const double demand = base_demand +
                              demand_amplitude * std::sin(phase - kPi / 2.5) +
                              0.02 * base_demand * rng.uniform(-1.0, 1.0);
        series.timestamps.push_back(start + static_cast<std::int64_t>(k) *
                                                interval_minutes * 60);
        series.price.push_back(price);
        series.demand.push_back(std::max(demand, 1.0));
    }
    return series;
}

// ---------------------------------------------------------------------------
// Dispatch family
// ---------------------------------------------------------------------------

std::vector<QuadraticScalarCost> default_dispatch_costs() {
    return {{0.040, -0.1200, 100.0},
            {0.050, -0.1500, 110.0},
            {0.035, -0.1050, 95.0},
            {0.045, -0.1350, 105.0},
            {0.038, -0.1140, 98.0}};
}

Scenario build_dispatch(const MarketSeries& series, const DispatchSpec& spec) {
    const int big_n = static_cast<int>(spec.costs.size());
    if (big_n < 1) throw ContractError("build_dispatch: no generator costs");
    if (series.size() < 1) throw ContractError("build_dispatch: empty market series");
    for (const auto& c : spec.costs)
        if (!(c.a > 0.0))
            throw ContractError("build_dispatch: quadratic coefficients must be positive");

    std::vector<double> shares = spec.shares;
    if (shares.empty())
        shares.assign(static_cast<std::size_t>(big_n), 1.0 / static_cast<double>(big_n));
    if (static_cast<int>(shares.size()) != big_n)
        throw ContractError("build_dispatch: share count does not match generator count");
    double share_sum = 0.0;
    for (double s : shares) {
        if (s < 0.0) throw ContractError("build_dispatch: shares must be nonnegative");
        share_sum += s;
    }
    if (std::abs(share_sum - 1.0) > 1e-12)
        throw ContractError("build_dispatch: shares must sum to 1");

    double output_max = spec.output_max;
    if (output_max <= 0.0) {
        const double max_demand =
            *std::max_element(series.demand.begin(), series.demand.end());
        output_max = 2.0 * max_demand / static_cast<double>(big_n);
    }
    if (!(output_max > spec.output_min))
        throw ContractError("build_dispatch: output range is empty");

    auto data = std::make_shared<const MarketSeries>(series);
    const int horizon = static_cast<int>(series.size());

    Scenario scenario;
    scenario.id = "dispatch(" + series.region + ",N=" + std::to_string(big_n) +
                  ",T=" + std::to_string(horizon) + ")";
    scenario.horizon = horizon;
    for (int i = 0; i < big_n; ++i) {
        const QuadraticScalarCost cost = spec.costs[static_cast<std::size_t>(i)];
        const double share = shares[static_cast<std::size_t>(i)];
        NodeProblem p;
        p.id = i;
        p.decision_dim = 1;
        p.constraint_dim = 1;
        p.horizon = horizon;
        p.set = FeasibleSet::box(VectorXd::Constant(1, spec.output_min),
                                 VectorXd::Constant(1, output_max));
        p.objective = [data, cost](int t, const VectorXd& x) {
            return cost.value(x(0), data->price[static_cast<std::size_t>(t - 1)]);
        };
        p.objective_grad = [data, cost](int t, const VectorXd& x) -> VectorXd {
            VectorXd g(1);
            g(0) = cost.derivative(x(0), data->price[static_cast<std::size_t>(t - 1)]);
            return g;
        };
        p.constraint = [data, share](int t, const VectorXd& x) -> VectorXd {
            VectorXd g(1);
            g(0) = share * data->demand[static_cast<std::size_t>(t - 1)] - x(0);
            return g;
        };
        p.constraint_jac = [](int, const VectorXd&) -> MatrixXd {
            return MatrixXd::Constant(1, 1, -1.0);
        };
        const FeasibleSet set = p.set;
        p.penalized_argmin = [data, cost, set](int t, const VectorXd& nu) -> VectorXd {
            // d/dx [a x^2 + (b - P) x + nu (sD - x)] = 0
            const double price = data->price[static_cast<std::size_t>(t - 1)];
            VectorXd x(1);
            x(0) = (price + nu(0) - cost.b) / (2.0 * cost.a);
            return set.project(x);
        };
        scenario.problems.push_back(std::move(p));
    }
    return scenario;
}

// ---------------------------------------------------------------------------
// Vehicle-charging family
// ---------------------------------------------------------------------------

namespace {

struct PevCoefficients {
    std::vector<std::vector<double>> a;       // [t][i]
    std::vector<std::vector<VectorXd>> beta;  // [t][i]
    std::vector<std::vector<MatrixXd>> mat;   // [t][i], n x d
    std::vector<std::vector<VectorXd>> rhs;   // [t][i], n
};

PevCoefficients generate_pev_coefficients(const PevSpec& spec) {
    PevCoefficients coef;
    const int horizon = spec.horizon;
    const int big_n = spec.nodes;
    coef.a.assign(horizon, std::vector<double>(big_n));
    coef.beta.assign(horizon, std::vector<VectorXd>(big_n));
    coef.mat.assign(horizon, std::vector<MatrixXd>(big_n));
    coef.rhs.assign(horizon, std::vector<VectorXd>(big_n));

    for (int i = 0; i < big_n; ++i) {
        auto init = Rng::stream(spec.seed, static_cast<std::uint64_t>(i), kInitStream);
        auto walk = Rng::stream(spec.seed, static_cast<std::uint64_t>(i), kWalkStream);
        const int d = spec.dims, n = spec.constraint_dim;

        // Draw order: a, beta, A row-major, rhs.
        coef.a[0][i] = init.uniform(spec.a_lo, spec.a_hi);
        VectorXd beta(d);
        for (int k = 0; k < d; ++k) beta(k) = init.uniform(-spec.beta_amp, spec.beta_amp);
        coef.beta[0][i] = beta;
        MatrixXd mat(n, d);
        for (int r = 0; r < n; ++r)
            for (int k = 0; k < d; ++k) mat(r, k) = init.uniform(0.0, spec.a_mat_hi);
        coef.mat[0][i] = mat;
        VectorXd rhs(n);
        for (int r = 0; r < n; ++r) rhs(r) = init.uniform(0.0, spec.rhs_hi);
        coef.rhs[0][i] = rhs;

        for (int t = 1; t < horizon; ++t) {
            coef.a[t][i] = std::max(spec.positivity_floor,
                                    coef.a[t - 1][i] +
                                        walk.uniform(-spec.increment, spec.increment));
            VectorXd db(d);
            for (int k = 0; k < d; ++k)
                db(k) = walk.uniform(-spec.increment, spec.increment);
            coef.beta[t][i] = coef.beta[t - 1][i] + db;
            MatrixXd dm(n, d);
            for (int r = 0; r < n; ++r)
                for (int k = 0; k < d; ++k)
                    dm(r, k) = walk.uniform(-spec.a_mat_increment, spec.a_mat_increment);
            coef.mat[t][i] = coef.mat[t - 1][i] + dm;
            VectorXd dr(n);
            for (int r = 0; r < n; ++r)
                dr(r) = walk.uniform(-spec.increment, spec.increment);
            coef.rhs[t][i] = coef.rhs[t - 1][i] + dr;
        }
    }
    return coef;
}

}  // namespace

Scenario build_pev(const PevSpec& spec) {
    if (spec.nodes < 1 || spec.dims < 1 || spec.constraint_dim < 1 || spec.horizon < 1)
        throw ContractError("build_pev: nodes, dims, constraint_dim, horizon must be positive");
    auto coef = std::make_shared<const PevCoefficients>(generate_pev_coefficients(spec));

    Scenario scenario;
    scenario.id = "pev(N=" + std::to_string(spec.nodes) + ",n=" +
                  std::to_string(spec.constraint_dim) + ",T=" +
                  std::to_string(spec.horizon) + ",seed=" + std::to_string(spec.seed) + ")";
    scenario.horizon = spec.horizon;
    for (int i = 0; i < spec.nodes; ++i) {
        NodeProblem p;
        p.id = i;
        p.decision_dim = spec.dims;
        p.constraint_dim = spec.constraint_dim;
        p.horizon = spec.horizon;
        p.set = FeasibleSet::ball(spec.dims, spec.radius);
        p.objective = [coef, i](int t, const VectorXd& x) {
            return 0.5 * coef->a[t - 1][i] * x.squaredNorm() + coef->beta[t - 1][i].dot(x);
        };
        p.objective_grad = [coef, i](int t, const VectorXd& x) -> VectorXd {
            return coef->a[t - 1][i] * x + coef->beta[t - 1][i];
        };
        p.constraint = [coef, i](int t, const VectorXd& x) -> VectorXd {
            return coef->mat[t - 1][i] * x - coef->rhs[t - 1][i];
        };
        p.constraint_jac = [coef, i](int t, const VectorXd&) -> MatrixXd {
            return coef->mat[t - 1][i];
        };
        const FeasibleSet set = p.set;
        p.penalized_argmin = [coef, i, set](int t, const VectorXd& nu) -> VectorXd {
            const double a = coef->a[t - 1][i];
            const VectorXd v = coef->beta[t - 1][i] + coef->mat[t - 1][i].transpose() * nu;
            return set.project(-v / a);
        };
        scenario.problems.push_back(std::move(p));
    }
    return scenario;
}

}  // namespace odis

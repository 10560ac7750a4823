#include "odis/metrics.hpp"

#include "odis/errors.hpp"

namespace odis {

double path_length(const std::vector<StepOptimum>& optima) {
    double total = 0.0;
    for (std::size_t t = 1; t < optima.size(); ++t) {
        for (std::size_t i = 0; i < optima[t].x_star.size(); ++i)
            total += (optima[t].x_star[i] - optima[t - 1].x_star[i]).norm();
    }
    return total;
}

std::vector<double> dynamic_regret(const RunTrace& trace,
                                   const std::vector<StepOptimum>& optima) {
    if (optima.size() != trace.steps.size())
        throw ContractError("dynamic_regret: trace and optima horizons differ");
    std::vector<double> reg(trace.steps.size());
    double cum = 0.0;
    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
        cum += trace.steps[t].objective_total - optima[t].f_star;
        reg[t] = cum;
    }
    return reg;
}

std::vector<double> constraint_violation(const RunTrace& trace) {
    std::vector<double> vio(trace.steps.size());
    VectorXd cum = VectorXd::Zero(trace.constraint_dim);
    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
        cum += trace.steps[t].aggregate_g;
        vio[t] = cum.cwiseMax(0.0).norm();
    }
    return vio;
}

MetricsReport compute_metrics(const RunTrace& trace,
                              const std::vector<StepOptimum>* optima) {
    MetricsReport report;
    report.violation = constraint_violation(trace);
    if (optima != nullptr) {
        report.regret_cum = dynamic_regret(trace, *optima);
        report.path_length = path_length(*optima);
        report.optima_count = static_cast<int>(optima->size());
        for (const auto& opt : *optima) {
            report.optima_max_residual = std::max(report.optima_max_residual, opt.residual);
            report.optima_max_multiplier =
                std::max(report.optima_max_multiplier, opt.multiplier.norm());
            report.optima_max_iterations =
                std::max(report.optima_max_iterations, opt.iterations);
        }
    }
    return report;
}

}  // namespace odis

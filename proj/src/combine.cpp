#include "overrun/combine.hpp"

#include <cmath>
#include <string>

#include "overrun/errors.hpp"
#include "overrun/numerics.hpp"

namespace overrun {

namespace {

constexpr double kWeightTol = 1e-12;

}  // namespace

WeightPair WeightPair::from_information(double first, double second) {
    if (!(first > 0.0 && second > 0.0)) throw InputError("informations must be positive");
    const double total = first + second;
    WeightPair w;
    w.w1 = std::sqrt(first / total);
    w.w2 = std::sqrt(second / total);
    return w;
}

void WeightPair::validate() const {
    if (!(w1 > 0.0 && w2 > 0.0)) throw InputError("weights must be positive");
    if (std::abs(w1 * w1 + w2 * w2 - 1.0) > kWeightTol) {
        throw InputError("squared weights must sum to one");
    }
}

double combine_two(double p1, double p2, const WeightPair& w) {
    w.validate();
    return phi_bar(w.w1 * z_of(p1) + w.w2 * z_of(p2));
}

StageWeights stage_weights_from_information(const std::vector<double>& information) {
    StageWeights rows;
    double total = 0.0;
    for (double v : information) {
        if (!(v > 0.0)) throw InputError("informations must be positive");
        total += v;
        std::vector<double> row;
        for (std::size_t i = 0; i <= rows.size(); ++i) row.push_back(std::sqrt(information[i] / total));
        rows.push_back(std::move(row));
    }
    return rows;
}

void check_stage_weights(const StageWeights& weights, std::size_t count) {
    if (weights.size() != count) {
        throw InputError("need one weight row per p-value");
    }
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const auto& row = weights[k];
        if (row.size() != k + 1) {
            throw InputError("weight row " + std::to_string(k + 1) + " must have " +
                             std::to_string(k + 1) + " entries");
        }
        double sq = 0.0;
        for (double w : row) {
            if (!(w > 0.0)) throw InputError("weights must be positive");
            sq += w * w;
        }
        if (std::abs(sq - 1.0) > kWeightTol) {
            throw InputError("squared weights of row " + std::to_string(k + 1) + " do not sum to one");
        }
        if (k == 0) continue;
        const double keep = 1.0 - row[k] * row[k];
        for (std::size_t i = 0; i < k; ++i) {
            const double prev = weights[k - 1][i];
            if (std::abs(row[i] * row[i] - prev * prev * keep) > kWeightTol) {
                throw InputError("weight row " + std::to_string(k + 1) +
                                 " breaks the stage recurrence");
            }
        }
    }
}

double combine_recursive(const std::vector<double>& ps, const StageWeights& weights) {
    if (ps.empty()) throw InputError("nothing to combine");
    check_stage_weights(weights, ps.size());
    double p = ps[0];
    z_of(p);  // domain check
    for (std::size_t k = 1; k < ps.size(); ++k) {
        const double last = weights[k][k];
        p = combine_two(p, ps[k], WeightPair{std::sqrt(1.0 - last * last), last});
    }
    return p;
}

double combine_direct(const std::vector<double>& ps, const StageWeights& weights) {
    if (ps.empty()) throw InputError("nothing to combine");
    check_stage_weights(weights, ps.size());
    const auto& row = weights.back();
    double z = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i) z += row[i] * z_of(ps[i]);
    return phi_bar(z);
}

double OverrunData::information_at(double t) const {
    if (model == OverrunModel::ObservedOnly || !c) return t_o;
    switch (model) {
        case OverrunModel::Constant:
            return *c;
        case OverrunModel::SqrtProportional:
            return *c * std::sqrt(t);
        case OverrunModel::Proportional:
            return *c * t;
        case OverrunModel::ObservedOnly:
            break;
    }
    return t_o;
}

void OverrunData::validate(double t) const {
    if (!(t_o >= 0.0) || !std::isfinite(t_o)) throw InputError("overrun information t_o must be >= 0");
    if (!std::isfinite(y)) throw InputError("overrun increment y must be finite");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw InputError("weighting factor rho must be > 0");
    if (c && !(*c >= 0.0)) throw InputError("overrun coefficient c must be >= 0");
    if (model == OverrunModel::Proportional && c && t_o > 0.0) {
        if (std::abs(t_o - *c * t) > 1e-9 * std::max(1.0, t_o)) {
            throw InputError("t_o does not equal c t under the proportional model");
        }
    }
}

double combine_overrun(double p1, double t, double t_o, double y, double rho, double delta0) {
    if (t_o == 0.0) return p1;
    if (p1 <= 0.0) return 0.0;
    if (p1 >= 1.0) return 1.0;
    const double num = std::sqrt(t) * z_of(p1) + std::sqrt(rho) * (y - delta0 * t_o);
    return phi_bar(num / std::sqrt(t + rho * t_o));
}

double combine_overrun_linear(double p1, double t, const OverrunData& overrun, double delta0) {
    if (!(t > 0.0)) throw InputError("stopping information must be positive");
    overrun.validate(t);
    return combine_overrun(p1, t, overrun.t_o, overrun.y, overrun.rho, delta0);
}

double combine_overrun_gs(const GroupDesign& design, int stage, double x, const OverrunData& overrun,
                          double delta0) {
    check_group_outcome(design, stage, x);
    overrun.validate(design.time(stage));
    if (stage == design.stages()) {
        if (overrun.t_o == 0.0) return gs_stagewise_p(design, stage, x + overrun.y, delta0);
        const auto late = design.rescheduled(stage, overrun.t_o);
        const auto density = gs_stage_densities(late, delta0);
        return gs_stagewise_p(density, stage, x + overrun.y);
    }
    const double p1 = gs_stagewise_p(design, stage, x, delta0);
    return combine_overrun(p1, design.time(stage), overrun.t_o, overrun.y, overrun.rho, delta0);
}

}  // namespace overrun

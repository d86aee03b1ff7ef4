#include "dgprm/dpo.hpp"

#include "dgprm/errors.hpp"

#include <cmath>

namespace dgprm {

namespace {

void require_finite_record(const LogProbRecord& r) {
    if (!std::isfinite(r.lp_theta_pos) || !std::isfinite(r.lp_ref_pos) ||
        !std::isfinite(r.lp_theta_neg) || !std::isfinite(r.lp_ref_neg))
        throw NonFiniteInput("log-prob record carries a non-finite value");
}

// log(1 + exp(-x)) without overflow for large |x|.
double softplus_neg(double x) {
    if (x >= 0.0) return std::log1p(std::exp(-x));
    return -x + std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

double delta(const LogProbRecord& rec) {
    require_finite_record(rec);
    return (rec.lp_theta_pos - rec.lp_ref_pos) - (rec.lp_theta_neg - rec.lp_ref_neg);
}

double dpo_loss(const std::vector<LogProbRecord>& recs, double beta) {
    if (recs.empty()) throw InvalidArgument("dpo_loss: no records");
    if (!(beta > 0.0)) throw InvalidArgument("dpo_loss: beta must be > 0");
    double sum = 0.0;
    for (const auto& r : recs) sum += softplus_neg(beta * delta(r));
    return sum / static_cast<double>(recs.size());
}

std::vector<DpoGrad> dpo_loss_grad(const std::vector<LogProbRecord>& recs, double beta) {
    if (recs.empty()) throw InvalidArgument("dpo_loss_grad: no records");
    if (!(beta > 0.0)) throw InvalidArgument("dpo_loss_grad: beta must be > 0");
    const double inv_n = 1.0 / static_cast<double>(recs.size());
    std::vector<DpoGrad> grads;
    grads.reserve(recs.size());
    for (const auto& r : recs) {
        const double s = sigmoid(-beta * delta(r));
        grads.push_back({-beta * s * inv_n, beta * s * inv_n});
    }
    return grads;
}

} // namespace dgprm

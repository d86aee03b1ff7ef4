#pragma once

/**
 * Step-wise preference loss over chosen/rejected log-probability records,
 * as a verifiable numeric function: the training loop itself runs in
 * external trainers.
 */

#include "dgprm/types.hpp"

#include <vector>

namespace dgprm {

/// (lp_theta_pos - lp_ref_pos) - (lp_theta_neg - lp_ref_neg).
double delta(const LogProbRecord& rec);

/// Mean over records of -log sigmoid(beta * delta), computed in the
/// numerically stable softplus form; finite for all finite inputs.
double dpo_loss(const std::vector<LogProbRecord>& recs, double beta);

struct DpoGrad {
    double d_lp_theta_pos = 0.0;
    double d_lp_theta_neg = 0.0;
    // Reference log-probs carry zero gradient by construction.
};

/// Analytic gradient of dpo_loss with respect to each record's policy
/// log-probs: d/d_pos = -beta * sigmoid(-beta*delta) / N and the
/// negated value for d/d_neg.
std::vector<DpoGrad> dpo_loss_grad(const std::vector<LogProbRecord>& recs, double beta);

} // namespace dgprm

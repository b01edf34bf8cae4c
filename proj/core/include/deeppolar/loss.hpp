#pragma once

#include "deeppolar/common.hpp"
#include "deeppolar/tape.hpp"

namespace dpp {

struct LossConfig {
  double epsilon = 1e-10;
};

// All losses take loss-domain logits z with sigmoid(z) = P(bit = 1).
// Decoder logits follow the opposite sign (>= 0 decodes to 0), so callers
// negate decoder outputs before handing them in; see decoder_to_loss_logits.

/// Mean over batch and bits of the binary cross-entropy.
double bce_loss(const Matrix& logits, const BitMatrix& targets);
/// -(1/B) sum_i log( prod_j P(u_ij | z_ij) + epsilon ).
double block_loss(const Matrix& logits, const BitMatrix& targets, const LossConfig& config = {});
/// bce_loss + block_loss.
double total_loss(const Matrix& logits, const BitMatrix& targets, const LossConfig& config = {});

Matrix bce_loss_gradient(const Matrix& logits, const BitMatrix& targets);
Matrix block_loss_gradient(const Matrix& logits, const BitMatrix& targets, const LossConfig& config = {});

inline Matrix decoder_to_loss_logits(const Matrix& decoder_logits) { return -decoder_logits; }

double softplus(double x);

namespace ad {
Var bce_loss(Var logits, const BitMatrix& targets);
Var block_loss(Var logits, const BitMatrix& targets, const LossConfig& config = {});
Var total_loss(Var logits, const BitMatrix& targets, const LossConfig& config = {});
}  // namespace ad

}  // namespace dpp

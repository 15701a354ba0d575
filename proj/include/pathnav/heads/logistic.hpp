// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace pathnav::heads
{

struct LinearHead
{
    Eigen::MatrixXd W; ///< classes x dim
    Eigen::VectorXd b; ///< classes
    double C_reg = 1.0;
};

struct LrOptions
{
    double C_reg = 1.0;
    double tolerance = 1e-6;
    int max_iterations = 2000;
};

struct LrTrainResult
{
    LinearHead head;
    /// Objective after each accepted step, starting with the initial point.
    std::vector<double> losses;
    int iterations = 0;
    bool converged = false;
};

/// Rows of the result are the input vectors. LengthMismatch on ragged input.
[[nodiscard]] Eigen::MatrixXd stack_rows(const std::vector<std::vector<float>>& rows);

/// Mean cross-entropy + ||W||^2 / (2 C N), bias unregularized. When grad is
/// given it receives dJ/dW and dJ/db with the same shapes as head.
[[nodiscard]] double lr_objective(const LinearHead& head, const Eigen::MatrixXd& X, std::span<const int> y,
                                  LinearHead* grad = nullptr);

/// Full-batch gradient descent from zero with Armijo backtracking. Stops when
/// the gradient norm drops below tolerance or at max_iterations. Precondition
/// error when fewer than two classes occur in y, Range on a non-finite loss.
[[nodiscard]] LrTrainResult lr_train(const Eigen::MatrixXd& X, std::span<const int> y, int classes,
                                     const LrOptions& opts = {});

/// softmax(W z + b). LengthMismatch when z does not match the head.
[[nodiscard]] std::vector<double> lr_scores(const LinearHead& head, std::span<const float> z);

} // namespace pathnav::heads

// SPDX-License-Identifier: Apache-2.0
#include "pathnav/heads/logistic.hpp"

#include "pathnav/error.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <set>

namespace pathnav::heads
{

Eigen::MatrixXd stack_rows(const std::vector<std::vector<float>>& rows)
{
    if (rows.empty())
        return {};
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        if (rows[i].size() != rows.front().size())
            throw Error(ErrorCode::LengthMismatch, fmt::format("row {} has {} components", i, rows[i].size()));
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return X;
}

double lr_objective(const LinearHead& head, const Eigen::MatrixXd& X, std::span<const int> y, LinearHead* grad)
{
    const auto n = X.rows();
    if (static_cast<std::size_t>(n) != y.size())
        throw Error(ErrorCode::LengthMismatch, fmt::format("{} rows but {} labels", n, y.size()));
    if (n == 0)
        throw Error(ErrorCode::Precondition, "empty training set");
    Eigen::MatrixXd logits = X * head.W.transpose();
    logits.rowwise() += head.b.transpose();

    double ce = 0;
    Eigen::MatrixXd P(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const double m = logits.row(i).maxCoeff();
        const Eigen::RowVectorXd e = (logits.row(i).array() - m).exp();
        const double z = e.sum();
        P.row(i) = e / z;
        ce += m + std::log(z) - logits(i, y[static_cast<std::size_t>(i)]);
    }
    const double nn = static_cast<double>(n);
    const double J = ce / nn + head.W.squaredNorm() / (2.0 * head.C_reg * nn);

    if (grad)
    {
        for (Eigen::Index i = 0; i < n; ++i)
            P(i, y[static_cast<std::size_t>(i)]) -= 1.0;
        grad->W = P.transpose() * X / nn + head.W / (head.C_reg * nn);
        grad->b = P.colwise().sum().transpose() / nn;
        grad->C_reg = head.C_reg;
    }
    return J;
}

LrTrainResult lr_train(const Eigen::MatrixXd& X, std::span<const int> y, int classes, const LrOptions& opts)
{
    if (opts.C_reg <= 0 || opts.tolerance <= 0 || opts.max_iterations < 0)
        throw Error(ErrorCode::Config, "C_reg and tolerance must be positive");
    const std::set<int> present(y.begin(), y.end());
    if (present.size() < 2)
        throw Error(ErrorCode::Precondition, "logistic regression needs at least two classes");
    for (int label: present)
        if (label < 0 || label >= classes)
            throw Error(ErrorCode::Range, fmt::format("label {} outside [0, {})", label, classes));

    LrTrainResult out;
    auto& h = out.head;
    h.W = Eigen::MatrixXd::Zero(classes, X.cols());
    h.b = Eigen::VectorXd::Zero(classes);
    h.C_reg = opts.C_reg;

    LinearHead g;
    double J = lr_objective(h, X, y, &g);
    out.losses.push_back(J);
    double step = 1.0;
    constexpr double armijo = 1e-4;
    for (out.iterations = 0; out.iterations < opts.max_iterations; ++out.iterations)
    {
        const double g2 = g.W.squaredNorm() + g.b.squaredNorm();
        if (std::sqrt(g2) < opts.tolerance)
        {
            out.converged = true;
            break;
        }
        LinearHead trial = h;
        double Jt = 0;
        bool accepted = false;
        for (int shrink = 0; shrink < 60; ++shrink)
        {
            trial.W = h.W - step * g.W;
            trial.b = h.b - step * g.b;
            Jt = lr_objective(trial, X, y);
            if (!std::isfinite(Jt))
                throw Error(ErrorCode::Range, "non-finite loss; check the embedding scale");
            if (Jt <= J - armijo * step * g2)
            {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
        {
            spdlog::debug("line search stalled at iteration {}", out.iterations);
            break;
        }
        h = std::move(trial);
        J = lr_objective(h, X, y, &g);
        out.losses.push_back(J);
        step *= 2.0;
    }
    if (!std::isfinite(J))
        throw Error(ErrorCode::Range, "non-finite loss; check the embedding scale");
    return out;
}

std::vector<double> lr_scores(const LinearHead& head, std::span<const float> z)
{
    if (static_cast<Eigen::Index>(z.size()) != head.W.cols())
        throw Error(ErrorCode::LengthMismatch,
                    fmt::format("embedding has {} components, head expects {}", z.size(), head.W.cols()));
    Eigen::VectorXd v(static_cast<Eigen::Index>(z.size()));
    for (std::size_t i = 0; i < z.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = z[i];
    const Eigen::VectorXd logits = head.W * v + head.b;
    const Eigen::ArrayXd e = (logits.array() - logits.maxCoeff()).exp();
    const Eigen::ArrayXd p = e / e.sum();
    return {p.data(), p.data() + p.size()};
}

} // namespace pathnav::heads

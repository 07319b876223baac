#include "sinkgeo/space.hpp"

#include <cmath>

namespace sinkgeo {

namespace {

void validate_epsilon(double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw InvalidInput("epsilon must be positive and finite");
    }
}

}  // namespace

GroundSpace GroundSpace::sqeuclidean(Matrix points, double epsilon) {
    validate_epsilon(epsilon);
    if (points.rows() < 1 || points.cols() < 1) {
        throw InvalidInput("need at least one point with at least one coordinate");
    }
    const int n = static_cast<int>(points.rows());
    GroundSpace s;
    s.points_ = std::move(points);
    s.epsilon_ = epsilon;
    s.sqeuclidean_ = true;
    s.cost_.resize(n, n);
    for (int i = 0; i < n; ++i) {
        s.cost_(i, i) = 0.0;
        for (int j = i + 1; j < n; ++j) {
            const double c = (s.points_.row(i) - s.points_.row(j)).squaredNorm();
            s.cost_(i, j) = c;
            s.cost_(j, i) = c;
        }
    }
    s.cost_sup_ = s.cost_.maxCoeff();
    s.gibbs_ = (-s.cost_ / epsilon).array().exp();
    return s;
}

GroundSpace GroundSpace::explicit_cost(Matrix cost, double epsilon,
                                       std::optional<Matrix> points) {
    validate_epsilon(epsilon);
    if (cost.rows() != cost.cols() || cost.rows() < 1) {
        throw InvalidInput("cost matrix must be square and nonempty");
    }
    const int n = static_cast<int>(cost.rows());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (!(cost(i, j) >= 0.0) || !std::isfinite(cost(i, j))) {
                throw InvalidInput("cost entries must be finite and nonnegative");
            }
            if (std::abs(cost(i, j) - cost(j, i)) > 1e-12 * std::max(1.0, std::abs(cost(i, j)))) {
                throw InvalidInput("cost matrix must be symmetric");
            }
        }
    }
    GroundSpace s;
    if (points) {
        if (points->rows() != n) throw InvalidInput("points/cost size mismatch");
        s.points_ = std::move(*points);
    }
    s.epsilon_ = epsilon;
    s.cost_ = std::move(cost);
    s.cost_sup_ = s.cost_.maxCoeff();
    s.gibbs_ = (-s.cost_ / epsilon).array().exp();
    // The theory needs k_c positive definite; that is automatic for squared
    // Euclidean costs but only checkable numerically for user matrices.
    Eigen::SelfAdjointEigenSolver<Matrix> es(s.gibbs_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10 * n) {
        s.gram_warning_ = true;
    }
    return s;
}

const Matrix& GroundSpace::points() const {
    if (!has_points()) throw InvalidInput("ground space carries no point coordinates");
    return points_;
}

double GroundSpace::q_bound() const {
    return 1.0 - std::exp(-4.0 * cost_sup_ / epsilon_);
}

Measure::Measure(const GroundSpace& space, Vector weights) : space_(&space), weights_(std::move(weights)) {
    if (weights_.size() != space.size()) {
        throw InvalidInput("measure weight length does not match space size");
    }
    double sum = 0.0;
    for (int i = 0; i < weights_.size(); ++i) {
        if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
            throw InvalidInput("measure weights must be finite and nonnegative");
        }
        sum += weights_[i];
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw InvalidInput("measure weights must sum to 1 (got " + std::to_string(sum) + ")");
    }
    for (int i = 0; i < weights_.size(); ++i) {
        if (weights_[i] > 0.0) support_.push_back(i);
    }
    if (support_.empty()) throw InvalidInput("measure has empty support");
}

Vector Measure::mean() const {
    const Matrix& pts = space_->points();
    return pts.transpose() * weights_;
}

TangentVector::TangentVector(const GroundSpace& space, Vector weights)
    : space_(&space), weights_(std::move(weights)) {
    if (weights_.size() != space.size()) {
        throw InvalidInput("tangent weight length does not match space size");
    }
    if (!weights_.allFinite()) throw UnbalancedTangent("tangent weights must be finite");
    if (std::abs(weights_.sum()) > 1e-12) {
        throw UnbalancedTangent("tangent weights must sum to 0");
    }
}

double mmd_sq(const GroundSpace& space, const Vector& a) {
    return rkhs_inner(space, a, a);
}

double rkhs_inner(const GroundSpace& space, const Vector& u, const Vector& v) {
    if (u.size() != space.size() || v.size() != space.size()) {
        throw InvalidInput("rkhs_inner: vector length does not match space size");
    }
    return u.dot(space.gibbs() * v);
}

}  // namespace sinkgeo

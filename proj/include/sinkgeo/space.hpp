#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sinkgeo/errors.hpp"

namespace sinkgeo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Discrete ground space: n support points (optional when the cost matrix is
// supplied directly), a symmetric nonnegative cost matrix, the regularization
// epsilon and the Gibbs kernel exp(-cost/epsilon).
class GroundSpace {
  public:
    // points is n x d. The squared-Euclidean cost diagonal is forced to exactly
    // zero so that the kernel satisfies k_c(x,x) = 1 without roundoff.
    static GroundSpace sqeuclidean(Matrix points, double epsilon);

    // Explicit symmetric nonnegative cost matrix; points are optional and only
    // used by operations that move mass in coordinates. The Gibbs matrix of an
    // explicit cost is eigen-checked for positive semidefiniteness; failure
    // does not reject the space but sets gram_warning().
    static GroundSpace explicit_cost(Matrix cost, double epsilon,
                                     std::optional<Matrix> points = std::nullopt);

    int size() const { return static_cast<int>(cost_.rows()); }
    int dim() const { return has_points() ? static_cast<int>(points_.cols()) : 0; }
    double epsilon() const { return epsilon_; }
    const Matrix& cost() const { return cost_; }
    const Matrix& gibbs() const { return gibbs_; }
    bool has_points() const { return points_.size() > 0; }
    const Matrix& points() const;
    bool sqeuclidean_cost() const { return sqeuclidean_; }
    bool gram_warning() const { return gram_warning_; }

    double cost_sup() const { return cost_sup_; }
    // Contraction factor q = 1 - exp(-4 ||c||_inf / eps); bounds the second
    // eigenvalue of the self-transport operator.
    double q_bound() const;

  private:
    GroundSpace() = default;

    Matrix points_;  // n x d, empty when cost-only
    Matrix cost_;    // n x n
    Matrix gibbs_;   // n x n
    double epsilon_ = 0.0;
    double cost_sup_ = 0.0;
    bool sqeuclidean_ = false;
    bool gram_warning_ = false;
};

// Probability vector on a GroundSpace. The space must outlive the measure.
class Measure {
  public:
    Measure(const GroundSpace& space, Vector weights);

    const GroundSpace& space() const { return *space_; }
    const Vector& weights() const { return weights_; }
    double operator[](int i) const { return weights_[i]; }
    int size() const { return static_cast<int>(weights_.size()); }

    // Indices with strictly positive weight, in increasing order.
    const std::vector<int>& support() const { return support_; }

    // Barycenter of the support points; requires coordinates.
    Vector mean() const;

  private:
    const GroundSpace* space_;
    Vector weights_;
    std::vector<int> support_;
};

// Balanced signed vector (weights sum to zero): an admissible vertical
// perturbation of a measure.
class TangentVector {
  public:
    TangentVector(const GroundSpace& space, Vector weights);

    const GroundSpace& space() const { return *space_; }
    const Vector& weights() const { return weights_; }
    int size() const { return static_cast<int>(weights_.size()); }

  private:
    const GroundSpace* space_;
    Vector weights_;
};

// Arbitrary signed vector over the support points; used for RKHS elements
// (beta, beta_dot) given by their function values.
struct SignedVector {
    const GroundSpace* space = nullptr;
    Vector values;
};

// ||nu||^2 in the dual RKHS norm: a^T gibbs a (a maximum mean discrepancy
// when a is the difference of two probability vectors).
double mmd_sq(const GroundSpace& space, const Vector& a);

// <u, v> for RKHS elements given by combination coefficients: u^T gibbs v.
double rkhs_inner(const GroundSpace& space, const Vector& u, const Vector& v);

}  // namespace sinkgeo

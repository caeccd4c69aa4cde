#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mrtkit/path_bundle.hpp"

namespace mrtkit {

// Closed catalog of smooth maps f: R^n -> R with exact gradients.
class ScalarField {
public:
    virtual ~ScalarField() = default;
    virtual int arity() const = 0;
    virtual double value(std::span<const double> x) const = 0;
    virtual void gradient(std::span<const double> x, std::span<double> out) const = 0;
};

// sum of coeff * prod_i x_i^{e_i}
class MonomialSum : public ScalarField {
public:
    struct Term {
        double coeff;
        std::vector<int> exponents;
    };
    MonomialSum(int arity, std::vector<Term> terms);
    int arity() const override { return arity_; }
    double value(std::span<const double> x) const override;
    void gradient(std::span<const double> x, std::span<double> out) const override;

private:
    int arity_;
    std::vector<Term> terms_;
};

// exp(sum a_i x_i + shift)
class ExpAffine : public ScalarField {
public:
    ExpAffine(std::vector<double> weights, double shift);
    int arity() const override { return static_cast<int>(weights_.size()); }
    double value(std::span<const double> x) const override;
    void gradient(std::span<const double> x, std::span<double> out) const override;

private:
    std::vector<double> weights_;
    double shift_;
};

// (x - K)^+ with quadratic smoothing on [K-eps, K+eps]; C^1 everywhere.
class SmoothedCall : public ScalarField {
public:
    SmoothedCall(double strike, double eps);
    int arity() const override { return 1; }
    double value(std::span<const double> x) const override;
    void gradient(std::span<const double> x, std::span<double> out) const override;
    double slope(double x) const;

private:
    double strike_;
    double eps_;
};

// Functional of one path: F(omega) = f(channel values at fixed grid times),
// possibly combined by sums and products across channels. Supplies both the
// pathwise value and the exact derivative of its Brownian dependence.
class PathFunctional {
public:
    virtual ~PathFunctional() = default;
    virtual double eval(const PathView& pv) const = 0;
    // d/dW derivative at time t; zero when the functional does not depend
    // on a Brownian channel.
    virtual double brownian_derivative(const PathView& pv, double t) const = 0;
    virtual std::vector<double> observation_times() const = 0;

    // Derivative at every grid point of one path; out has grid.points() slots.
    virtual void brownian_derivative_profile(const PathView& pv, std::span<double> out) const;

    void validate_on(const TimeGrid& grid) const;
};

using FunctionalPtr = std::shared_ptr<const PathFunctional>;

// f applied to one channel read at fixed, strictly increasing times.
class CylinderFunctional : public PathFunctional {
public:
    CylinderFunctional(std::string channel, std::vector<double> times,
                       std::shared_ptr<const ScalarField> field);

    double eval(const PathView& pv) const override;
    double brownian_derivative(const PathView& pv, double t) const override;
    std::vector<double> observation_times() const override { return times_; }
    void brownian_derivative_profile(const PathView& pv, std::span<double> out) const override;

    const std::string& channel() const { return channel_; }
    bool differentiable() const { return differentiable_; }

private:
    void read(const PathView& pv, std::vector<double>& x) const;

    std::string channel_;
    std::vector<double> times_;
    std::shared_ptr<const ScalarField> field_;
    bool differentiable_;  // true for Brownian channels
};

class SumFunctional : public PathFunctional {
public:
    SumFunctional(std::vector<FunctionalPtr> parts, std::vector<double> coeffs);
    double eval(const PathView& pv) const override;
    double brownian_derivative(const PathView& pv, double t) const override;
    std::vector<double> observation_times() const override;
    void brownian_derivative_profile(const PathView& pv, std::span<double> out) const override;

private:
    std::vector<FunctionalPtr> parts_;
    std::vector<double> coeffs_;
};

class ProductFunctional : public PathFunctional {
public:
    ProductFunctional(FunctionalPtr lhs, FunctionalPtr rhs);
    double eval(const PathView& pv) const override;
    double brownian_derivative(const PathView& pv, double t) const override;
    std::vector<double> observation_times() const override;
    void brownian_derivative_profile(const PathView& pv, std::span<double> out) const override;

private:
    FunctionalPtr lhs_;
    FunctionalPtr rhs_;
};

// convenience builders
FunctionalPtr make_power(std::string channel, double time, int exponent, double coeff = 1.0);
FunctionalPtr make_product_times(std::string channel, std::vector<double> times);
FunctionalPtr make_exp_affine(std::string channel, std::vector<double> times,
                              std::vector<double> weights, double shift);
FunctionalPtr make_smoothed_call(std::string channel, double time, double strike, double eps);
FunctionalPtr make_constant(double value);
FunctionalPtr make_sum(std::vector<FunctionalPtr> parts, std::vector<double> coeffs);
FunctionalPtr make_product(FunctionalPtr lhs, FunctionalPtr rhs);

}  // namespace mrtkit

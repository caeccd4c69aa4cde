#include "mrtkit/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mrtkit {

MonomialSum::MonomialSum(int arity, std::vector<Term> terms)
    : arity_(arity), terms_(std::move(terms)) {
    if (arity < 1) throw std::invalid_argument("MonomialSum: arity must be >= 1");
    for (const auto& t : terms_) {
        if (static_cast<int>(t.exponents.size()) != arity)
            throw std::invalid_argument("MonomialSum: exponent arity mismatch");
        for (int e : t.exponents)
            if (e < 0) throw std::invalid_argument("MonomialSum: negative exponent");
    }
}

double MonomialSum::value(std::span<const double> x) const {
    double acc = 0.0;
    for (const auto& t : terms_) {
        double prod = t.coeff;
        for (int i = 0; i < arity_; ++i)
            for (int e = 0; e < t.exponents[i]; ++e) prod *= x[i];
        acc += prod;
    }
    return acc;
}

void MonomialSum::gradient(std::span<const double> x, std::span<double> out) const {
    for (int i = 0; i < arity_; ++i) out[i] = 0.0;
    for (const auto& t : terms_) {
        for (int i = 0; i < arity_; ++i) {
            if (t.exponents[i] == 0) continue;
            double prod = t.coeff * t.exponents[i];
            for (int j = 0; j < arity_; ++j) {
                const int e = t.exponents[j] - (j == i ? 1 : 0);
                for (int k = 0; k < e; ++k) prod *= x[j];
            }
            out[i] += prod;
        }
    }
}

ExpAffine::ExpAffine(std::vector<double> weights, double shift)
    : weights_(std::move(weights)), shift_(shift) {
    if (weights_.empty()) throw std::invalid_argument("ExpAffine: needs at least one weight");
}

double ExpAffine::value(std::span<const double> x) const {
    double s = shift_;
    for (std::size_t i = 0; i < weights_.size(); ++i) s += weights_[i] * x[i];
    return std::exp(s);
}

void ExpAffine::gradient(std::span<const double> x, std::span<double> out) const {
    const double v = value(x);
    for (std::size_t i = 0; i < weights_.size(); ++i) out[i] = weights_[i] * v;
}

SmoothedCall::SmoothedCall(double strike, double eps) : strike_(strike), eps_(eps) {
    if (eps < 0.0) throw std::invalid_argument("SmoothedCall: eps must be >= 0");
}

double SmoothedCall::value(std::span<const double> x) const {
    const double s = x[0];
    if (eps_ == 0.0) return std::max(s - strike_, 0.0);
    if (s <= strike_ - eps_) return 0.0;
    if (s >= strike_ + eps_) return s - strike_;
    const double d = s - strike_ + eps_;
    return d * d / (4.0 * eps_);
}

double SmoothedCall::slope(double s) const {
    if (eps_ == 0.0) return s > strike_ ? 1.0 : 0.0;
    if (s <= strike_ - eps_) return 0.0;
    if (s >= strike_ + eps_) return 1.0;
    return (s - strike_ + eps_) / (2.0 * eps_);
}

void SmoothedCall::gradient(std::span<const double> x, std::span<double> out) const {
    out[0] = slope(x[0]);
}

void PathFunctional::brownian_derivative_profile(const PathView& pv,
                                                 std::span<double> out) const {
    const TimeGrid& grid = pv.grid();
    for (int k = 0; k <= grid.steps; ++k) out[k] = brownian_derivative(pv, grid.time(k));
}

void PathFunctional::validate_on(const TimeGrid& grid) const {
    for (double t : observation_times())
        if (grid.index_of(t) < 0)
            throw std::invalid_argument("PathFunctional: observation time " +
                                        std::to_string(t) + " is not on the grid");
}

CylinderFunctional::CylinderFunctional(std::string channel, std::vector<double> times,
                                       std::shared_ptr<const ScalarField> field)
    : channel_(std::move(channel)), times_(std::move(times)), field_(std::move(field)),
      differentiable_(channel_.rfind("W.", 0) == 0) {
    if (!field_) throw std::invalid_argument("CylinderFunctional: null field");
    if (static_cast<int>(times_.size()) != field_->arity())
        throw std::invalid_argument("CylinderFunctional: times/arity mismatch");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1]))
            throw std::invalid_argument("CylinderFunctional: times must be strictly increasing");
}

void CylinderFunctional::read(const PathView& pv, std::vector<double>& x) const {
    x.resize(times_.size());
    for (std::size_t i = 0; i < times_.size(); ++i)
        x[i] = pv.value_at_time(channel_, times_[i]);
}

double CylinderFunctional::eval(const PathView& pv) const {
    std::vector<double> x;
    read(pv, x);
    return field_->value(x);
}

double CylinderFunctional::brownian_derivative(const PathView& pv, double t) const {
    if (!differentiable_ || t > times_.back()) return 0.0;
    std::vector<double> x, grad(times_.size());
    read(pv, x);
    field_->gradient(x, grad);
    double acc = 0.0;
    for (std::size_t i = 0; i < times_.size(); ++i)
        if (t <= times_[i]) acc += grad[i];
    return acc;
}

void CylinderFunctional::brownian_derivative_profile(const PathView& pv,
                                                     std::span<double> out) const {
    const TimeGrid& grid = pv.grid();
    if (!differentiable_) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    std::vector<double> x, grad(times_.size());
    read(pv, x);
    field_->gradient(x, grad);
    // suffix sums of partials: derivative at t is the sum over t_i >= t
    std::vector<double> suffix(times_.size() + 1, 0.0);
    for (int i = static_cast<int>(times_.size()) - 1; i >= 0; --i)
        suffix[i] = suffix[i + 1] + grad[i];
    std::size_t i = 0;
    for (int k = 0; k <= grid.steps; ++k) {
        const double t = grid.time(k);
        while (i < times_.size() && times_[i] < t) ++i;
        out[k] = i < times_.size() ? suffix[i] : 0.0;
    }
}

SumFunctional::SumFunctional(std::vector<FunctionalPtr> parts, std::vector<double> coeffs)
    : parts_(std::move(parts)), coeffs_(std::move(coeffs)) {
    if (parts_.empty() || parts_.size() != coeffs_.size())
        throw std::invalid_argument("SumFunctional: parts/coeffs mismatch");
}

double SumFunctional::eval(const PathView& pv) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < parts_.size(); ++i) acc += coeffs_[i] * parts_[i]->eval(pv);
    return acc;
}

double SumFunctional::brownian_derivative(const PathView& pv, double t) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < parts_.size(); ++i)
        acc += coeffs_[i] * parts_[i]->brownian_derivative(pv, t);
    return acc;
}

std::vector<double> SumFunctional::observation_times() const {
    std::vector<double> out;
    for (const auto& part : parts_) {
        const auto t = part->observation_times();
        out.insert(out.end(), t.begin(), t.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void SumFunctional::brownian_derivative_profile(const PathView& pv,
                                                std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    std::vector<double> tmp(out.size());
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        parts_[i]->brownian_derivative_profile(pv, tmp);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += coeffs_[i] * tmp[k];
    }
}

ProductFunctional::ProductFunctional(FunctionalPtr lhs, FunctionalPtr rhs)
    : lhs_(std::move(lhs)), rhs_(std::move(rhs)) {
    if (!lhs_ || !rhs_) throw std::invalid_argument("ProductFunctional: null part");
}

double ProductFunctional::eval(const PathView& pv) const {
    return lhs_->eval(pv) * rhs_->eval(pv);
}

double ProductFunctional::brownian_derivative(const PathView& pv, double t) const {
    return lhs_->eval(pv) * rhs_->brownian_derivative(pv, t) +
           rhs_->eval(pv) * lhs_->brownian_derivative(pv, t);
}

std::vector<double> ProductFunctional::observation_times() const {
    auto out = lhs_->observation_times();
    const auto r = rhs_->observation_times();
    out.insert(out.end(), r.begin(), r.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void ProductFunctional::brownian_derivative_profile(const PathView& pv,
                                                    std::span<double> out) const {
    const double fl = lhs_->eval(pv);
    const double fr = rhs_->eval(pv);
    std::vector<double> dl(out.size()), dr(out.size());
    lhs_->brownian_derivative_profile(pv, dl);
    rhs_->brownian_derivative_profile(pv, dr);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = fl * dr[k] + fr * dl[k];
}

FunctionalPtr make_power(std::string channel, double time, int exponent, double coeff) {
    auto field = std::make_shared<MonomialSum>(
        1, std::vector<MonomialSum::Term>{{coeff, {exponent}}});
    return std::make_shared<CylinderFunctional>(std::move(channel),
                                                std::vector<double>{time}, field);
}

FunctionalPtr make_product_times(std::string channel, std::vector<double> times) {
    const int n = static_cast<int>(times.size());
    auto field = std::make_shared<MonomialSum>(
        n, std::vector<MonomialSum::Term>{{1.0, std::vector<int>(n, 1)}});
    return std::make_shared<CylinderFunctional>(std::move(channel), std::move(times), field);
}

FunctionalPtr make_exp_affine(std::string channel, std::vector<double> times,
                              std::vector<double> weights, double shift) {
    auto field = std::make_shared<ExpAffine>(std::move(weights), shift);
    return std::make_shared<CylinderFunctional>(std::move(channel), std::move(times), field);
}

FunctionalPtr make_smoothed_call(std::string channel, double time, double strike, double eps) {
    auto field = std::make_shared<SmoothedCall>(strike, eps);
    return std::make_shared<CylinderFunctional>(std::move(channel),
                                                std::vector<double>{time}, field);
}

namespace {

class ConstantFunctional : public PathFunctional {
public:
    explicit ConstantFunctional(double v) : v_(v) {}
    double eval(const PathView&) const override { return v_; }
    double brownian_derivative(const PathView&, double) const override { return 0.0; }
    std::vector<double> observation_times() const override { return {}; }

private:
    double v_;
};

}  // namespace

FunctionalPtr make_constant(double value) {
    return std::make_shared<ConstantFunctional>(value);
}

FunctionalPtr make_sum(std::vector<FunctionalPtr> parts, std::vector<double> coeffs) {
    return std::make_shared<SumFunctional>(std::move(parts), std::move(coeffs));
}

FunctionalPtr make_product(FunctionalPtr lhs, FunctionalPtr rhs) {
    return std::make_shared<ProductFunctional>(std::move(lhs), std::move(rhs));
}

}  // namespace mrtkit

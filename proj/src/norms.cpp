#include "psbrm/norms.hpp"

#include "psbrm/kernels.hpp"

#include <sstream>

namespace psbrm {

namespace {

void check_length(const Vector& x, const WeightVector& w)
{
    if (x.size() != w.size())
        throw ValidationError("vector length " + std::to_string(x.size()) + " does not match weight length " +
                              std::to_string(w.size()));
}

void check_gamma(double gamma)
{
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw ValidationError("discount must lie in [0, 1), got " + std::to_string(gamma));
}

} // namespace

WeightVector::WeightVector(Vector weights) : w_(std::move(weights))
{
    if (w_.size() == 0)
        throw ValidationError("weight vector is empty");
    for (Eigen::Index i = 0; i < w_.size(); ++i)
        if (!(w_(i) > 0.0) || !std::isfinite(w_(i)))
            throw ValidationError("weight " + std::to_string(i) + " must be finite and > 0");
    if (std::fabs(w_.sum() - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << "weights must sum to 1, got " << w_.sum();
        throw ValidationError(os.str());
    }
    w_min_ = w_.minCoeff();
    w_max_ = w_.maxCoeff();
}

WeightVector WeightVector::uniform(Eigen::Index n)
{
    if (n <= 0)
        throw ValidationError("uniform weights need n >= 1");
    return WeightVector(Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

PNorm::PNorm(double p) : p_(p)
{
    if (!(p > 1.0) || !std::isfinite(p))
        throw ValidationError("norm exponent must be finite and > 1, got " + std::to_string(p));
}

EvenP::EvenP(int p) : p_(p)
{
    if (p < 2 || p % 2 != 0)
        throw ValidationError("solver exponent must be an even integer >= 2, got " + std::to_string(p));
}

double weighted_lp_norm(const Vector& x, PNorm p, const WeightVector& w)
{
    check_length(x, w);
    const double scale = x.cwiseAbs().maxCoeff();
    if (scale == 0.0)
        return 0.0;
    if (!std::isfinite(scale))
        return std::numeric_limits<double>::infinity();
    const double sum = kernels::parallel::weighted_power_sum(x, w.values(), p.value(), scale);
    return scale * std::pow(sum, 1.0 / p.value());
}

double weighted_lp_norm(const Vector& x, EvenP p, const WeightVector& w)
{
    check_length(x, w);
    const double scale = x.cwiseAbs().maxCoeff();
    if (scale == 0.0)
        return 0.0;
    if (!std::isfinite(scale))
        return std::numeric_limits<double>::infinity();
    const double sum = kernels::parallel::weighted_power_sum(x, w.values(), p.value(), scale);
    return scale * std::pow(sum, 1.0 / p.value());
}

double lp_norm(const Vector& x, PNorm p)
{
    const double scale = x.cwiseAbs().maxCoeff();
    if (scale == 0.0)
        return 0.0;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        sum += kernels::abs_pow(x(i) / scale, p.value());
    return scale * std::pow(sum, 1.0 / p.value());
}

double sup_norm(const Vector& x)
{
    return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
}

double uniform_l2_norm(const Vector& x)
{
    return x.size() == 0 ? 0.0 : std::sqrt(x.squaredNorm() / static_cast<double>(x.size()));
}

double effective_contraction_rate(double gamma, PNorm p, Eigen::Index n, const WeightVector& w)
{
    check_gamma(gamma);
    if (n < 1)
        throw ValidationError("dimension must be >= 1");
    const double spread = static_cast<double>(n) * w.max() / w.min();
    return gamma * std::pow(spread, 1.0 / p.value());
}

double contraction_threshold(double gamma, Eigen::Index n, const WeightVector& w)
{
    check_gamma(gamma);
    if (n < 1)
        throw ValidationError("dimension must be >= 1");
    const double spread = static_cast<double>(n) * w.max() / w.min();
    if (gamma == 0.0 || spread <= 1.0)
        return 0.0;
    return std::log(spread) / std::log(1.0 / gamma);
}

std::optional<double> quasi_optimality_constant(double gamma, PNorm p, Eigen::Index n, const WeightVector& w)
{
    const double rate = effective_contraction_rate(gamma, p, n, w);
    if (rate >= 1.0)
        return std::nullopt;
    return (1.0 + rate) / (1.0 - rate);
}

double limiting_quasi_optimality_constant(double gamma)
{
    check_gamma(gamma);
    return (1.0 + gamma) / (1.0 - gamma);
}

} // namespace psbrm

#pragma once

#include "psbrm/types.hpp"

#include <optional>

namespace psbrm {

/// Positive weights summing to one, with cached extremes.
class WeightVector {
public:
    explicit WeightVector(Vector weights);
    static WeightVector uniform(Eigen::Index n);

    const Vector& values() const noexcept { return w_; }
    Eigen::Index size() const noexcept { return w_.size(); }
    double operator()(Eigen::Index i) const { return w_(i); }
    double min() const noexcept { return w_min_; }
    double max() const noexcept { return w_max_; }
    bool is_uniform() const noexcept { return w_min_ == w_max_; }

private:
    Vector w_;
    double w_min_ = 0.0;
    double w_max_ = 0.0;
};

/// Exponent p > 1 for the analysis routines; may be non-integer.
class PNorm {
public:
    explicit PNorm(double p);
    double value() const noexcept { return p_; }

private:
    double p_;
};

/// Even integer exponent p >= 2, required wherever the objective is differentiated.
class EvenP {
public:
    explicit EvenP(int p);
    int value() const noexcept { return p_; }
    operator PNorm() const { return PNorm(p_); }

private:
    int p_;
};

/// (sum_i w_i |x_i|^p)^(1/p), computed on x / max|x| so large p neither overflows nor underflows.
double weighted_lp_norm(const Vector& x, PNorm p, const WeightVector& w);
double weighted_lp_norm(const Vector& x, EvenP p, const WeightVector& w);

/// Unweighted (sum_i |x_i|^p)^(1/p).
double lp_norm(const Vector& x, PNorm p);
double sup_norm(const Vector& x);
/// ||x||_{2, uniform} = sqrt(mean(x^2)), the fixed cross-p error metric.
double uniform_l2_norm(const Vector& x);

/// gamma * (n * w_max / w_min)^(1/p). Lipschitz constant of the soft backup in L_{p,w}.
double effective_contraction_rate(double gamma, PNorm p, Eigen::Index n, const WeightVector& w);

/// ln(n w_max / w_min) / ln(1 / gamma); 0 when gamma == 0 or n w_max / w_min <= 1.
double contraction_threshold(double gamma, Eigen::Index n, const WeightVector& w);

/// (1 + gamma_pw) / (1 - gamma_pw), or nullopt outside the contraction regime (gamma_pw >= 1).
std::optional<double> quasi_optimality_constant(double gamma, PNorm p, Eigen::Index n, const WeightVector& w);

/// C(p) in the p -> infinity limit: (1 + gamma) / (1 - gamma).
double limiting_quasi_optimality_constant(double gamma);

} // namespace psbrm

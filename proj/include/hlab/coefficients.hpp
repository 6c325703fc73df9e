#ifndef HLAB_COEFFICIENTS_HPP
#define HLAB_COEFFICIENTS_HPP

#include <array>
#include <functional>
#include <string>

#include "hlab/geometry.hpp"

namespace hlab {

/// Pointwise value of a coefficient tensor a_{ij}^{ab}(y), d=2, m in {1,2}.
/// Stored row-major on the dm x dm quadratic-form layout:
/// row = i*m + a (test gradient slot), col = j*m + b (trial gradient slot).
struct CoeffValue {
    int m = 1;
    std::array<double, 16> v{};

    int dm() const { return 2 * m; }
    double& at(int i, int j, int a, int b) {
        return v[static_cast<size_t>((i * m + a) * dm() + j * m + b)];
    }
    double at(int i, int j, int a, int b) const {
        return v[static_cast<size_t>((i * m + a) * dm() + j * m + b)];
    }
};

/// Periodic coefficient tensor A(y) on the unit cell, with its declared
/// structural constants. Evaluation wraps y into [0,1)^2, so periodicity
/// is exact by construction. Immutable after construction.
class CoefficientTensor {
public:
    using Evaluator = std::function<void(const Vec2&, CoeffValue&)>;

    CoefficientTensor(int m, Evaluator eval, double mu, double upper,
                      bool symmetric, std::string name = "custom",
                      double holder_lambda = 0.5, double holder_tau = 0.0);

    int dim() const { return 2; }
    int components() const { return m_; }
    double mu() const { return mu_; }
    double upper_bound() const { return upper_; }
    bool symmetric() const { return symmetric_; }
    const std::string& name() const { return name_; }
    double holder_lambda() const { return lambda_; }
    double holder_tau() const { return tau_; }

    /// a(y) with y reduced modulo 1 per coordinate.
    CoeffValue evaluate(const Vec2& y) const;
    void evaluate_into(const Vec2& y, CoeffValue& out) const;

private:
    int m_;
    Evaluator eval_;
    double mu_;
    double upper_;
    bool symmetric_;
    std::string name_;
    double lambda_;
    double tau_;
};

struct BuiltinParams {
    double c0 = 1.0;
    double c1 = 0.0;
    int m = 1;
    double coupling = 0.0; // constant off-component block for m=2 embeddings
};

/// Catalog: constant, laminate, separable, rotated-laminate.
/// Throws std::invalid_argument on unknown ids or ellipticity-violating params.
CoefficientTensor make_builtin(const std::string& name, const BuiltinParams& p);

/// A* with a*_{ij}^{ab}(y) = a_{ji}^{ba}(y).
CoefficientTensor adjoint(const CoefficientTensor& A);

struct EllipticityReport {
    double lower = 0.0;       // min over samples of smallest eigenvalue
    double upper = 0.0;       // max over samples of largest eigenvalue
    int samples = 0;
    Vec2 worst;               // sample attaining the lower bound
    bool violated = false;    // lower <= 0
};

/// Samples the symmetrized quadratic form on a uniform grid over [0,1)^2.
/// sample_count is rounded to the nearest full grid (side^2 points).
EllipticityReport estimate_ellipticity(const CoefficientTensor& A, int sample_count);

} // namespace hlab

#endif

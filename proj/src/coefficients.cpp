#include "hlab/coefficients.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace hlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

// Scalar profile embedded as a(y) = s(y) delta_ij delta_ab plus an optional
// constant coupling kappa delta_ij (1 - delta_ab) for m = 2.
void fill_scalar_embedding(CoeffValue& out, int m, double s, double kappa) {
    out.m = m;
    out.v.fill(0.0);
    for (int i = 0; i < 2; ++i)
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                out.at(i, i, a, b) = (a == b) ? s : kappa;
}
} // namespace

CoefficientTensor::CoefficientTensor(int m, Evaluator eval, double mu, double upper,
                                     bool symmetric, std::string name,
                                     double holder_lambda, double holder_tau)
    : m_(m), eval_(std::move(eval)), mu_(mu), upper_(upper),
      symmetric_(symmetric), name_(std::move(name)),
      lambda_(holder_lambda), tau_(holder_tau) {
    if (m_ != 1 && m_ != 2)
        throw std::invalid_argument("CoefficientTensor: m must be 1 or 2");
    if (mu_ <= 0.0)
        throw std::invalid_argument("CoefficientTensor: mu must be positive");
}

CoeffValue CoefficientTensor::evaluate(const Vec2& y) const {
    CoeffValue out;
    evaluate_into(y, out);
    return out;
}

void CoefficientTensor::evaluate_into(const Vec2& y, CoeffValue& out) const {
    eval_(wrap_unit(y), out);
}

CoefficientTensor make_builtin(const std::string& name, const BuiltinParams& p) {
    const int m = p.m;
    if (m != 1 && m != 2)
        throw std::invalid_argument("make_builtin: m must be 1 or 2");

    auto check_scalar_range = [&](double lo) {
        if (lo <= 0.0)
            throw std::invalid_argument("make_builtin(" + name +
                                        "): ellipticity violated (c0 <= |c1|)");
    };
    // Coupling must stay below the scalar lower bound to keep the form definite.
    auto mu_with_coupling = [&](double lo) {
        double mu = lo - std::abs(p.coupling);
        if (m == 2 && mu <= 0.0)
            throw std::invalid_argument("make_builtin(" + name +
                                        "): coupling breaks ellipticity");
        return (m == 2) ? mu : lo;
    };

    const double c0 = p.c0, c1 = p.c1, kappa = (m == 2) ? p.coupling : 0.0;

    if (name == "constant") {
        check_scalar_range(c0);
        double mu = mu_with_coupling(c0);
        double up = (m == 2) ? c0 + std::abs(kappa) : c0;
        return CoefficientTensor(
            m,
            [m, c0, kappa](const Vec2&, CoeffValue& out) {
                fill_scalar_embedding(out, m, c0, kappa);
            },
            mu, up, true, "constant", 0.5, 0.0);
    }
    if (name == "laminate") {
        check_scalar_range(c0 - std::abs(c1));
        double mu = mu_with_coupling(c0 - std::abs(c1));
        double up = c0 + std::abs(c1) + std::abs(kappa);
        return CoefficientTensor(
            m,
            [m, c0, c1, kappa](const Vec2& y, CoeffValue& out) {
                fill_scalar_embedding(out, m, c0 + c1 * std::sin(kTwoPi * y.x), kappa);
            },
            mu, up, true, "laminate", 0.5, kTwoPi * std::abs(c1));
    }
    if (name == "separable") {
        check_scalar_range(c0 - std::abs(c1));
        double mu = mu_with_coupling(c0 - std::abs(c1));
        double up = c0 + std::abs(c1) + std::abs(kappa);
        return CoefficientTensor(
            m,
            [m, c0, c1, kappa](const Vec2& y, CoeffValue& out) {
                double s = c0 + c1 * std::sin(kTwoPi * y.x) * std::sin(kTwoPi * y.y);
                fill_scalar_embedding(out, m, s, kappa);
            },
            mu, up, true, "separable", 0.5, kTwoPi * std::abs(c1));
    }
    if (name == "rotated-laminate") {
        // Laminate composed with the integer shear (y1,y2) -> (y1+y2, y2):
        // oscillation along the diagonal, anisotropic homogenized tensor.
        check_scalar_range(c0 - std::abs(c1));
        double mu = mu_with_coupling(c0 - std::abs(c1));
        double up = c0 + std::abs(c1) + std::abs(kappa);
        return CoefficientTensor(
            m,
            [m, c0, c1, kappa](const Vec2& y, CoeffValue& out) {
                fill_scalar_embedding(out, m,
                                      c0 + c1 * std::sin(kTwoPi * (y.x + y.y)), kappa);
            },
            mu, up, true, "rotated-laminate", 0.5, kTwoPi * std::abs(c1));
    }
    throw std::invalid_argument("make_builtin: unknown catalog id '" + name + "'");
}

CoefficientTensor adjoint(const CoefficientTensor& A) {
    const int m = A.components();
    auto eval = [A](const Vec2& y, CoeffValue& out) {
        CoeffValue a = A.evaluate(y);
        out.m = a.m;
        out.v.fill(0.0);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int al = 0; al < a.m; ++al)
                    for (int be = 0; be < a.m; ++be)
                        out.at(i, j, al, be) = a.at(j, i, be, al);
    };
    return CoefficientTensor(m, eval, A.mu(), A.upper_bound(), A.symmetric(),
                             A.name() + "*", A.holder_lambda(), A.holder_tau());
}

EllipticityReport estimate_ellipticity(const CoefficientTensor& A, int sample_count) {
    if (sample_count < 1)
        throw std::invalid_argument("estimate_ellipticity: sample_count >= 1 required");
    int side = std::max(1, static_cast<int>(std::lround(std::sqrt(double(sample_count)))));

    EllipticityReport rep;
    rep.samples = side * side;
    const int dm = 2 * A.components();
    CoeffValue a;
    bool first = true;
    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            Vec2 y{double(i) / side, double(j) / side};
            A.evaluate_into(y, a);
            // symmetrized quadratic form on R^{dm}
            std::array<double, 16> s{};
            for (int r = 0; r < dm; ++r)
                for (int c = 0; c < dm; ++c)
                    s[static_cast<size_t>(r * dm + c)] =
                        0.5 * (a.v[static_cast<size_t>(r * dm + c)] +
                               a.v[static_cast<size_t>(c * dm + r)]);
            EigRange er = symmetric_eig_range(s.data(), dm);
            if (first || er.min < rep.lower) {
                rep.lower = er.min;
                rep.worst = y;
            }
            if (first || er.max > rep.upper) rep.upper = er.max;
            first = false;
        }
    }
    rep.violated = (rep.lower <= 0.0);
    return rep;
}

} // namespace hlab

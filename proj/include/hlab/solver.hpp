#ifndef HLAB_SOLVER_HPP
#define HLAB_SOLVER_HPP

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hlab/coefficients.hpp"
#include "hlab/errors.hpp"
#include "hlab/mesh.hpp"

namespace hlab {

// ----------------------------------------------------------------------------
// Sparse matrix (CSR, full symmetric storage)
// ----------------------------------------------------------------------------
struct SparseCsr {
    int rows = 0;
    std::vector<int> rowptr;
    std::vector<int> col;
    std::vector<double> val;

    void matvec(const double* x, double* y) const;
    /// Entry lookup (binary search); 0 if not in the pattern.
    double coeff(int r, int c) const;
    double max_abs() const;
};

/// Nodal P1 field with m components per node (layout node*m + component)
/// and a lazily cached piecewise-constant gradient table
/// (layout tri*(2*m) + i*m + component).
struct DiscreteField {
    const TriMesh* mesh = nullptr;
    int m = 1;
    std::vector<double> values;

    DiscreteField() = default;
    DiscreteField(const TriMesh* msh, int m_)
        : mesh(msh), m(m_), values(static_cast<size_t>(msh->node_count()) * m_, 0.0) {}

    double value(int node, int comp) const {
        return values[static_cast<size_t>(node) * m + comp];
    }
    double& value(int node, int comp) {
        grad_cache_.clear();
        return values[static_cast<size_t>(node) * m + comp];
    }

    /// Per-triangle P1 gradient, computed on first use.
    const std::vector<double>& gradients() const;
    double grad(int t, int i, int comp) const {
        return gradients()[static_cast<size_t>(t) * (2 * m) + i * m + comp];
    }
    void invalidate_gradients() { grad_cache_.clear(); }

private:
    mutable std::vector<double> grad_cache_;
};

/// Recomputes the gradient table from nodal values (same code path as the
/// cache; exposed for consistency checks).
std::vector<double> compute_gradients(const DiscreteField& f);

/// Mass-weighted mean per component.
std::array<double, 2> field_mean(const DiscreteField& f);
/// Subtract the mass-weighted mean from every component.
void make_mean_zero(DiscreteField& f);

// ----------------------------------------------------------------------------
// Assembled system
// ----------------------------------------------------------------------------
struct LinearSystem {
    SparseCsr K;
    std::vector<double> diag;      // Jacobi preconditioner
    int m = 1;
    const TriMesh* mesh = nullptr;
    std::optional<double> eps;     // empty = cell assembly (A evaluated at y)
    std::string quadrature = "tri-edge-midpoint-3";
    bool symmetric_coeff = false;
    std::vector<std::string> warnings;

    int dof_count() const { return K.rows; }
};

/// Stiffness for the oscillatory form on a domain mesh; A is sampled at
/// edge midpoints divided by eps. Enforces the oscillation-resolution rule
/// (warn at h > eps/4, fail at h > eps/2).
LinearSystem assemble(const CoefficientTensor& A, double eps, const DomainMesh& mesh);

/// Cell-problem stiffness on the torus; A is evaluated at y directly.
LinearSystem assemble_cell(const CoefficientTensor& A, const TorusMesh& mesh);

// ----------------------------------------------------------------------------
// Neumann data and load vectors
// ----------------------------------------------------------------------------

/// Right-hand-side data of the weak form
///   L(phi) = int_Omega (-f . grad phi + F . phi) + int_bdry g . phi dsigma.
/// Slots are optional and additive. The conormal-of-linear kind carries the
/// constant flux matrix Q (Q[i*m+a]) with g^a = n_i Q_i^a, which is exactly
/// compatible on any closed polygon.
struct NeumannData {
    int m = 1;
    std::function<void(const Vec2&, double*)> flux_f;   // fills 2*m, idx i*m+a
    std::function<void(const Vec2&, double*)> body_F;   // fills m
    std::function<void(const Vec2&, double*)> bdry_g;   // fills m
    bool has_conormal = false;
    std::array<double, 4> conormal_Q{};
    std::array<double, 2> bdry_const{}; // constant boundary flux per component

    static NeumannData zero(int m);
    /// Data whose exact solution is the linear field with gradient G
    /// (G[j*m+b]) under the constant tensor M: Q_i^a = M_ij^{ab} G_j^b.
    static NeumannData conormal_of_linear(const CoeffValue& M,
                                          const std::array<double, 4>& G);
};

struct LoadResult {
    std::vector<double> b;
    std::array<double, 2> compat{}; // per-component load sum
};

LoadResult load_vector(const DomainMesh& mesh, const NeumannData& data);
/// Torus variant: boundary slots must be unset.
LoadResult load_vector(const TorusMesh& mesh, const NeumannData& data);

// ----------------------------------------------------------------------------
// Singular solve
// ----------------------------------------------------------------------------
struct SolveOptions {
    double tol = 1e-10;          // relative residual target
    double ctol = 1e-10;         // compatibility tolerance, relative to |load|_1
    double ctol_abs = 1e-12;     // absolute compatibility floor (roundoff-scale
                                 // loads are never rejected)
    bool auto_project = false;   // subtract per-component load mean when needed
    double maxiter_factor = 20.0; // maxiter = factor * sqrt(dofs)
};

struct SolveStats {
    int iterations = 0;
    double rel_residual = 0.0;
    double energy_initial = 0.0;
    double energy_final = 0.0;
    double compat_residual = 0.0;
    bool projected = false;
};

/// Jacobi-preconditioned CG with the constant-per-component nullspace
/// deflated: every residual is kept orthogonal to the constants (the range
/// of K), and the returned field is normalized to mass-weighted mean zero
/// per component.
DiscreteField solve_mean_zero(const LinearSystem& sys, std::vector<double> load,
                              const SolveOptions& opts = {},
                              SolveStats* stats = nullptr);

} // namespace hlab

#endif

#ifndef HLAB_CELL_HPP
#define HLAB_CELL_HPP

#include <functional>
#include <string>
#include <vector>

#include "hlab/coefficients.hpp"
#include "hlab/solver.hpp"

namespace hlab {

/// Cell-problem solutions on the periodic unit cell: the corrector matrix
/// chi, the homogenized tensor, and the flux correctors H (conormal
/// mismatch), U (periodic potential, Delta U = H) and F = grad U.
///
/// Column indexing: chi column (j, beta) at j*m + beta; flux fields
/// (i, l, alpha, gamma) at ((i*2 + l)*m + alpha)*m + gamma.
struct CorrectorSet {
    CoefficientTensor A;
    TorusMesh mesh;
    int m = 1;

    std::vector<DiscreteField> chi;   // d*m columns, m components each
    double chi_residual = 0.0;        // worst CG relative residual

    bool has_ahat = false;
    CoeffValue Ahat;

    bool has_flux = false;
    std::vector<std::vector<double>> H; // per-triangle scalars
    std::vector<DiscreteField> U;       // scalar torus fields, mean zero
    std::vector<std::vector<Vec2>> F;   // per-triangle grad U

    int chi_col(int j, int beta) const { return j * m + beta; }
    int flux_col(int i, int l, int al, int ga) const {
        return ((i * 2 + l) * m + al) * m + ga;
    }
};

/// Solves the d*m periodic cell problems for chi at torus resolution n.
CorrectorSet solve_correctors(const CoefficientTensor& A, int n, double tol = 1e-10);

/// Cell average of a + a grad(chi), same quadrature as assembly.
CoeffValue homogenized_tensor(const CorrectorSet& cs);

/// Fills H, U, F. Requires Ahat (computed if absent). Throws if the discrete
/// mean of H fails to vanish (quadrature mismatch witness).
void flux_correctors(CorrectorSet& cs, double tol = 1e-10);

/// chi, Ahat and flux correctors in one call.
CorrectorSet build_corrector_set(const CoefficientTensor& A, int n,
                                 double tol = 1e-10, bool with_flux = true);

/// Periodic P1 interpolation of a chi column at an arbitrary point
/// (out has m entries: alpha -> chi_j^{alpha beta}(y)).
void sample_chi(const CorrectorSet& cs, int col, const Vec2& y, double* out);

/// Discrete weak-divergence witness for F over its first index:
/// integral of F_{ilk}^{ag} d_i phi over the cell for a smooth periodic phi.
double weak_divergence_F(const CorrectorSet& cs, int l, int k, int al, int ga,
                         const std::function<Vec2(const Vec2&)>& grad_phi);

// Binary export: magic "HLAB-CS1", uint64 JSON header length, JSON header
// (n, m, ahat, residual, array manifest), then float64 arrays back to back.
void write_corrector_set(const CorrectorSet& cs, const std::string& path);

/// Reader view of an exported set (source tensor is not reconstructed).
struct CorrectorSetData {
    int n = 0;
    int m = 0;
    CoeffValue Ahat;
    double chi_residual = 0.0;
    std::vector<std::pair<std::string, std::vector<double>>> arrays;
};
CorrectorSetData read_corrector_set(const std::string& path);

} // namespace hlab

#endif

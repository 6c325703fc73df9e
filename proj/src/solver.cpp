#include "hlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace hlab {

// ----------------------------------------------------------------------------
// SparseCsr
// ----------------------------------------------------------------------------

void SparseCsr::matvec(const double* x, double* y) const {
    for (int r = 0; r < rows; ++r) {
        double s = 0.0;
        for (int k = rowptr[static_cast<size_t>(r)]; k < rowptr[static_cast<size_t>(r) + 1]; ++k)
            s += val[static_cast<size_t>(k)] * x[col[static_cast<size_t>(k)]];
        y[r] = s;
    }
}

double SparseCsr::coeff(int r, int c) const {
    const int* lo = col.data() + rowptr[static_cast<size_t>(r)];
    const int* hi = col.data() + rowptr[static_cast<size_t>(r) + 1];
    const int* it = std::lower_bound(lo, hi, c);
    if (it == hi || *it != c) return 0.0;
    return val[static_cast<size_t>(it - col.data())];
}

double SparseCsr::max_abs() const {
    double m = 0.0;
    for (double v : val) m = std::max(m, std::abs(v));
    return m;
}

// ----------------------------------------------------------------------------
// DiscreteField
// ----------------------------------------------------------------------------

namespace {
// P1 basis gradients on a triangle: grad phi_a = (b_a, c_a) / (2 area).
void basis_gradients(const std::array<Vec2, 3>& p, double area, Vec2 g[3]) {
    double inv = 1.0 / (2.0 * area);
    g[0] = Vec2{p[1].y - p[2].y, p[2].x - p[1].x} * inv;
    g[1] = Vec2{p[2].y - p[0].y, p[0].x - p[2].x} * inv;
    g[2] = Vec2{p[0].y - p[1].y, p[1].x - p[0].x} * inv;
}
} // namespace

std::vector<double> compute_gradients(const DiscreteField& f) {
    const TriMesh& g = *f.mesh;
    const int m = f.m;
    std::vector<double> out(static_cast<size_t>(g.tri_count()) * 2 * m, 0.0);
    Vec2 gphi[3];
    for (int t = 0; t < g.tri_count(); ++t) {
        basis_gradients(g.corner[static_cast<size_t>(t)], g.area[static_cast<size_t>(t)], gphi);
        double* slot = out.data() + static_cast<size_t>(t) * 2 * m;
        for (int a = 0; a < 3; ++a) {
            int node = g.tri[static_cast<size_t>(t)][static_cast<size_t>(a)];
            for (int c = 0; c < m; ++c) {
                double u = f.values[static_cast<size_t>(node) * m + c];
                slot[0 * m + c] += gphi[a].x * u;
                slot[1 * m + c] += gphi[a].y * u;
            }
        }
    }
    return out;
}

const std::vector<double>& DiscreteField::gradients() const {
    if (grad_cache_.empty() && mesh && mesh->tri_count() > 0)
        grad_cache_ = compute_gradients(*this);
    return grad_cache_;
}

std::array<double, 2> field_mean(const DiscreteField& f) {
    std::array<double, 2> mean{0.0, 0.0};
    const TriMesh& g = *f.mesh;
    for (int v = 0; v < g.node_count(); ++v)
        for (int c = 0; c < f.m; ++c)
            mean[static_cast<size_t>(c)] += g.mass[static_cast<size_t>(v)] * f.value(v, c);
    for (int c = 0; c < f.m; ++c) mean[static_cast<size_t>(c)] /= g.total_area;
    return mean;
}

void make_mean_zero(DiscreteField& f) {
    auto mean = field_mean(f);
    for (int v = 0; v < f.mesh->node_count(); ++v)
        for (int c = 0; c < f.m; ++c)
            f.values[static_cast<size_t>(v) * f.m + c] -= mean[static_cast<size_t>(c)];
    f.invalidate_gradients();
}

// ----------------------------------------------------------------------------
// Assembly
// ----------------------------------------------------------------------------

namespace {

// Node-adjacency CSR pattern expanded to m x m dof blocks.
void build_pattern(const TriMesh& g, int m, SparseCsr& K) {
    const int N = g.node_count();
    std::vector<int> deg(static_cast<size_t>(N), 1); // self
    for (const auto& t : g.tri)
        for (int v = 0; v < 3; ++v) deg[static_cast<size_t>(t[static_cast<size_t>(v)])] += 2;

    std::vector<size_t> off(static_cast<size_t>(N) + 1, 0);
    for (int v = 0; v < N; ++v) off[static_cast<size_t>(v) + 1] = off[static_cast<size_t>(v)] + static_cast<size_t>(deg[static_cast<size_t>(v)]);
    std::vector<int> nbr(off[static_cast<size_t>(N)]);
    std::vector<size_t> fill = off;
    for (int v = 0; v < N; ++v) nbr[fill[static_cast<size_t>(v)]++] = v;
    for (const auto& t : g.tri) {
        for (int v = 0; v < 3; ++v) {
            int a = t[static_cast<size_t>(v)];
            nbr[fill[static_cast<size_t>(a)]++] = t[static_cast<size_t>((v + 1) % 3)];
            nbr[fill[static_cast<size_t>(a)]++] = t[static_cast<size_t>((v + 2) % 3)];
        }
    }

    // sort + unique each node's neighbor segment in place
    std::vector<int> counts(static_cast<size_t>(N), 0);
    for (int v = 0; v < N; ++v) {
        auto b = nbr.begin() + static_cast<long>(off[static_cast<size_t>(v)]);
        auto e = nbr.begin() + static_cast<long>(off[static_cast<size_t>(v) + 1]);
        std::sort(b, e);
        counts[static_cast<size_t>(v)] = static_cast<int>(std::unique(b, e) - b);
    }

    K.rows = N * m;
    K.rowptr.assign(static_cast<size_t>(K.rows) + 1, 0);
    for (int v = 0; v < N; ++v)
        for (int c = 0; c < m; ++c)
            K.rowptr[static_cast<size_t>(v * m + c) + 1] = counts[static_cast<size_t>(v)] * m;
    for (size_t r = 1; r < K.rowptr.size(); ++r) K.rowptr[r] += K.rowptr[r - 1];

    K.col.resize(static_cast<size_t>(K.rowptr.back()));
    K.val.assign(K.col.size(), 0.0);
    for (int v = 0; v < N; ++v) {
        const int* u = nbr.data() + off[static_cast<size_t>(v)];
        for (int c = 0; c < m; ++c) {
            int* dst = K.col.data() + K.rowptr[static_cast<size_t>(v * m + c)];
            for (int k = 0; k < counts[static_cast<size_t>(v)]; ++k)
                for (int cc = 0; cc < m; ++cc) *dst++ = u[k] * m + cc;
        }
    }
}

// Position of dof column c in row r (pattern is sorted).
inline size_t pattern_pos(const SparseCsr& K, int r, int c) {
    const int* lo = K.col.data() + K.rowptr[static_cast<size_t>(r)];
    const int* hi = K.col.data() + K.rowptr[static_cast<size_t>(r) + 1];
    const int* it = std::lower_bound(lo, hi, c);
    return static_cast<size_t>(it - K.col.data());
}

LinearSystem assemble_core(const CoefficientTensor& A, std::optional<double> eps,
                           const TriMesh& g) {
    const int m = A.components();
    LinearSystem sys;
    sys.m = m;
    sys.mesh = &g;
    sys.eps = eps;
    sys.symmetric_coeff = A.symmetric();
    build_pattern(g, m, sys.K);

    const double inv_eps = eps ? 1.0 / *eps : 1.0;
    CoeffValue a;
    Vec2 gphi[3];
    for (int t = 0; t < g.tri_count(); ++t) {
        const auto& p = g.corner[static_cast<size_t>(t)];
        const double area = g.area[static_cast<size_t>(t)];
        basis_gradients(p, area, gphi);
        const Vec2 qp[3] = {(p[0] + p[1]) * 0.5, (p[1] + p[2]) * 0.5, (p[2] + p[0]) * 0.5};
        double local[36] = {0.0}; // (3m)^2, row a*m+al, col b*m+be
        const double w = area / 3.0;
        for (int q = 0; q < 3; ++q) {
            A.evaluate_into(eps ? qp[q] * inv_eps : qp[q], a);
            for (int k = 0; k < 2 * m * 2 * m; ++k)
                if (!std::isfinite(a.v[static_cast<size_t>(k)]))
                    throw SolveError("assemble: non-finite coefficient sample");
            for (int ba = 0; ba < 3; ++ba) {
                for (int bb = 0; bb < 3; ++bb) {
                    for (int al = 0; al < m; ++al) {
                        for (int be = 0; be < m; ++be) {
                            double s = 0.0;
                            for (int i = 0; i < 2; ++i) {
                                double gai = (i == 0) ? gphi[ba].x : gphi[ba].y;
                                for (int j = 0; j < 2; ++j) {
                                    double gbj = (j == 0) ? gphi[bb].x : gphi[bb].y;
                                    s += a.at(i, j, al, be) * gai * gbj;
                                }
                            }
                            local[(ba * m + al) * 3 * m + bb * m + be] += w * s;
                        }
                    }
                }
            }
        }
        const auto& tv = g.tri[static_cast<size_t>(t)];
        for (int ba = 0; ba < 3; ++ba) {
            for (int al = 0; al < m; ++al) {
                int r = tv[static_cast<size_t>(ba)] * m + al;
                for (int bb = 0; bb < 3; ++bb) {
                    size_t pos = pattern_pos(sys.K, r, tv[static_cast<size_t>(bb)] * m);
                    for (int be = 0; be < m; ++be)
                        sys.K.val[pos + static_cast<size_t>(be)] +=
                            local[(ba * m + al) * 3 * m + bb * m + be];
                }
            }
        }
    }

    sys.diag.resize(static_cast<size_t>(sys.K.rows));
    for (int r = 0; r < sys.K.rows; ++r) sys.diag[static_cast<size_t>(r)] = sys.K.coeff(r, r);
    return sys;
}

} // namespace

LinearSystem assemble(const CoefficientTensor& A, double eps, const DomainMesh& mesh) {
    if (!(eps > 0.0)) throw std::invalid_argument("assemble: eps must be positive");
    if (mesh.h > eps / 2.0)
        throw SolveError("assemble: oscillation unresolved (h > eps/2)", mesh.h / eps);
    LinearSystem sys = assemble_core(A, eps, mesh.geom);
    if (mesh.h > eps / 4.0)
        sys.warnings.push_back("assemble: h > eps/4, oscillation marginally resolved");
    return sys;
}

LinearSystem assemble_cell(const CoefficientTensor& A, const TorusMesh& mesh) {
    return assemble_core(A, std::nullopt, mesh.geom);
}

// ----------------------------------------------------------------------------
// Load vectors
// ----------------------------------------------------------------------------

NeumannData NeumannData::zero(int m) {
    NeumannData d;
    d.m = m;
    return d;
}

NeumannData NeumannData::conormal_of_linear(const CoeffValue& M,
                                            const std::array<double, 4>& G) {
    NeumannData d;
    d.m = M.m;
    d.has_conormal = true;
    for (int i = 0; i < 2; ++i)
        for (int al = 0; al < M.m; ++al) {
            double q = 0.0;
            for (int j = 0; j < 2; ++j)
                for (int be = 0; be < M.m; ++be)
                    q += M.at(i, j, al, be) * G[static_cast<size_t>(j * M.m + be)];
            d.conormal_Q[static_cast<size_t>(i * M.m + al)] = q;
        }
    return d;
}

namespace {

// Interior (f, F) contributions with the 3-point edge-midpoint rule; P1 test
// values at the midpoints are 1/2 on the two adjacent edges, 0 opposite.
void add_volume_loads(const TriMesh& g, const NeumannData& data, std::vector<double>& b) {
    const int m = data.m;
    if (!data.flux_f && !data.body_F) return;
    Vec2 gphi[3];
    double fval[4], Fval[2];
    // phi_a at midpoint q of edge (q, q+1)
    const double phi_at[3][3] = {{0.5, 0.0, 0.5}, {0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}};
    for (int t = 0; t < g.tri_count(); ++t) {
        const auto& p = g.corner[static_cast<size_t>(t)];
        const double area = g.area[static_cast<size_t>(t)];
        basis_gradients(p, area, gphi);
        const Vec2 qp[3] = {(p[0] + p[1]) * 0.5, (p[1] + p[2]) * 0.5, (p[2] + p[0]) * 0.5};
        const double w = area / 3.0;
        const auto& tv = g.tri[static_cast<size_t>(t)];
        for (int q = 0; q < 3; ++q) {
            if (data.flux_f) {
                data.flux_f(qp[q], fval);
                for (int a = 0; a < 3; ++a) {
                    int node = tv[static_cast<size_t>(a)];
                    for (int al = 0; al < m; ++al)
                        b[static_cast<size_t>(node) * m + al] -=
                            w * (fval[0 * m + al] * gphi[a].x + fval[1 * m + al] * gphi[a].y);
                }
            }
            if (data.body_F) {
                data.body_F(qp[q], Fval);
                for (int a = 0; a < 3; ++a) {
                    int node = tv[static_cast<size_t>(a)];
                    double phi = phi_at[a][q];
                    if (phi == 0.0) continue;
                    for (int al = 0; al < m; ++al)
                        b[static_cast<size_t>(node) * m + al] += w * phi * Fval[al];
                }
            }
        }
    }
}

} // namespace

LoadResult load_vector(const DomainMesh& mesh, const NeumannData& data) {
    const int m = data.m;
    LoadResult out;
    out.b.assign(static_cast<size_t>(mesh.geom.node_count()) * m, 0.0);

    add_volume_loads(mesh.geom, data, out.b);

    // Boundary term, 2-point Gauss per edge.
    const double s3 = 1.0 / std::sqrt(3.0);
    double gval[2];
    bool any_bconst = data.bdry_const[0] != 0.0 || data.bdry_const[1] != 0.0;
    if (data.bdry_g || data.has_conormal || any_bconst) {
        for (const auto& e : mesh.bedge) {
            const Vec2 pa = mesh.geom.node[static_cast<size_t>(e.a)];
            const Vec2 pb = mesh.geom.node[static_cast<size_t>(e.b)];
            for (int gp = 0; gp < 2; ++gp) {
                double s = (gp == 0) ? -s3 : s3;
                Vec2 x = e.midpoint + (pb - pa) * (0.5 * s);
                double wa = 0.5 * (1.0 - s), wb = 0.5 * (1.0 + s);
                double w = 0.5 * e.length;
                for (int al = 0; al < m; ++al) gval[al] = data.bdry_const[static_cast<size_t>(al)];
                if (data.bdry_g) {
                    double tmp[2];
                    data.bdry_g(x, tmp);
                    for (int al = 0; al < m; ++al) gval[al] += tmp[al];
                }
                if (data.has_conormal)
                    for (int al = 0; al < m; ++al)
                        gval[al] += e.normal.x * data.conormal_Q[static_cast<size_t>(0 * m + al)] +
                                    e.normal.y * data.conormal_Q[static_cast<size_t>(1 * m + al)];
                for (int al = 0; al < m; ++al) {
                    out.b[static_cast<size_t>(e.a) * m + al] += w * wa * gval[al];
                    out.b[static_cast<size_t>(e.b) * m + al] += w * wb * gval[al];
                }
            }
        }
    }

    for (int v = 0; v < mesh.geom.node_count(); ++v)
        for (int al = 0; al < m; ++al)
            out.compat[static_cast<size_t>(al)] += out.b[static_cast<size_t>(v) * m + al];
    return out;
}

LoadResult load_vector(const TorusMesh& mesh, const NeumannData& data) {
    if (data.bdry_g || data.has_conormal ||
        data.bdry_const[0] != 0.0 || data.bdry_const[1] != 0.0)
        throw std::invalid_argument("load_vector(torus): boundary data not allowed");
    const int m = data.m;
    LoadResult out;
    out.b.assign(static_cast<size_t>(mesh.geom.node_count()) * m, 0.0);
    add_volume_loads(mesh.geom, data, out.b);
    for (int v = 0; v < mesh.geom.node_count(); ++v)
        for (int al = 0; al < m; ++al)
            out.compat[static_cast<size_t>(al)] += out.b[static_cast<size_t>(v) * m + al];
    return out;
}

// ----------------------------------------------------------------------------
// Deflated PCG
// ----------------------------------------------------------------------------

namespace {

// Subtract the mass-weighted mean per component (solution normalization).
void project_mean(const TriMesh& g, int m, double* v) {
    for (int c = 0; c < m; ++c) {
        double s = 0.0;
        for (int k = 0; k < g.node_count(); ++k)
            s += g.mass[static_cast<size_t>(k)] * v[static_cast<size_t>(k) * m + c];
        double mean = s / g.total_area;
        for (int k = 0; k < g.node_count(); ++k)
            v[static_cast<size_t>(k) * m + c] -= mean;
    }
}

// Subtract the plain mean per component: the orthogonal projection onto
// range(K), which is what keeps the CG recurrence consistent. (The
// mass-weighted mean is an oblique projection in the CG inner product and
// drives the iteration inconsistent on asymmetric loads.)
void project_range(const TriMesh& g, int m, double* v) {
    const int N = g.node_count();
    for (int c = 0; c < m; ++c) {
        double s = 0.0;
        for (int k = 0; k < N; ++k) s += v[static_cast<size_t>(k) * m + c];
        double mean = s / N;
        for (int k = 0; k < N; ++k) v[static_cast<size_t>(k) * m + c] -= mean;
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace

DiscreteField solve_mean_zero(const LinearSystem& sys, std::vector<double> load,
                              const SolveOptions& opts, SolveStats* stats) {
    const TriMesh& g = *sys.mesh;
    const int m = sys.m;
    const size_t N = load.size();
    if (static_cast<int>(N) != sys.K.rows)
        throw std::invalid_argument("solve_mean_zero: load size mismatch");

    double l1 = 0.0;
    for (double v : load) l1 += std::abs(v);
    double compat = 0.0;
    std::array<double, 2> comp_sum{0.0, 0.0};
    for (int k = 0; k < g.node_count(); ++k)
        for (int c = 0; c < m; ++c) comp_sum[static_cast<size_t>(c)] += load[static_cast<size_t>(k) * m + c];
    for (int c = 0; c < m; ++c) compat = std::max(compat, std::abs(comp_sum[static_cast<size_t>(c)]));

    SolveStats st;
    st.compat_residual = compat;
    // relative test with an absolute floor so numerically-zero loads
    // (noise over noise) are not rejected
    if (l1 > 0.0 && compat > opts.ctol * l1 && compat > opts.ctol_abs) {
        if (!opts.auto_project)
            throw SolveError("solve_mean_zero: incompatible load (residual " +
                                 std::to_string(compat) + ")",
                             compat);
        for (int c = 0; c < m; ++c) {
            double shift = comp_sum[static_cast<size_t>(c)] / g.node_count();
            for (int k = 0; k < g.node_count(); ++k) load[static_cast<size_t>(k) * m + c] -= shift;
        }
        st.projected = true;
    }

    DiscreteField x(&g, m);
    double bnorm = std::sqrt(dot(load, load));
    if (bnorm == 0.0) {
        if (stats) *stats = st;
        return x;
    }

    const int maxiter =
        static_cast<int>(std::ceil(opts.maxiter_factor * std::sqrt(double(N)))) + 10;
    std::vector<double> r = load, z(N), p(N), Kp(N);
    project_range(g, m, r.data());
    for (size_t i = 0; i < N; ++i) z[i] = r[i] / sys.diag[i];
    p = z;
    double rz = dot(r, z);
    double rel = std::sqrt(dot(r, r)) / bnorm;
    int it = 0;
    while (rel > opts.tol && it < maxiter) {
        sys.K.matvec(p.data(), Kp.data());
        double pKp = dot(p, Kp);
        if (!(pKp > 0.0))
            throw SolveError("solve_mean_zero: CG breakdown", rel);
        double alpha = rz / pKp;
        for (size_t i = 0; i < N; ++i) x.values[i] += alpha * p[i];
        for (size_t i = 0; i < N; ++i) r[i] -= alpha * Kp[i];
        project_range(g, m, r.data());
        for (size_t i = 0; i < N; ++i) z[i] = r[i] / sys.diag[i];
        double rz_new = dot(r, z);
        double beta = rz_new / rz;
        rz = rz_new;
        for (size_t i = 0; i < N; ++i) p[i] = z[i] + beta * p[i];
        rel = std::sqrt(dot(r, r)) / bnorm;
        ++it;
    }
    st.iterations = it;
    st.rel_residual = rel;
    if (rel > opts.tol)
        throw SolveError("solve_mean_zero: CG did not converge (residual " +
                             std::to_string(rel) + " after " + std::to_string(it) +
                             " iterations)",
                         rel);

    // energy 0.5 x'Kx - b'x (zero at the zero initial guess)
    st.energy_initial = 0.0;
    sys.K.matvec(x.values.data(), Kp.data());
    st.energy_final = 0.5 * dot(x.values, Kp) - dot(x.values, load);
    project_mean(g, m, x.values.data());
    x.invalidate_gradients();
    if (stats) *stats = st;
    return x;
}

} // namespace hlab

#include "hlab/cell.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace hlab {

CorrectorSet solve_correctors(const CoefficientTensor& A, int n, double tol) {
    if (n < 16)
        throw std::invalid_argument("solve_correctors: torus resolution n >= 16 required");
    CorrectorSet cs{A, build_torus_mesh(n), A.components(), {}, 0.0,
                    false, {}, false, {}, {}, {}};
    const int m = cs.m;
    auto sys = assemble_cell(A, cs.mesh);

    // Load for column (j, beta): L(phi) = -int a_{ij}^{ab}(y) d_i phi^a,
    // i.e. divergence-form flux f_i^a(y) = a_{ij}^{ab}(y).
    for (int j = 0; j < 2; ++j) {
        for (int be = 0; be < m; ++be) {
            NeumannData d = NeumannData::zero(m);
            d.flux_f = [&A, j, be, m](const Vec2& y, double* out) {
                CoeffValue a = A.evaluate(y);
                for (int i = 0; i < 2; ++i)
                    for (int al = 0; al < m; ++al)
                        out[i * m + al] = a.at(i, j, al, be);
            };
            auto load = load_vector(cs.mesh, d);
            SolveStats st;
            cs.chi.push_back(solve_mean_zero(sys, load.b, {.tol = tol}, &st));
            cs.chi_residual = std::max(cs.chi_residual, st.rel_residual);
        }
    }
    return cs;
}

CoeffValue homogenized_tensor(const CorrectorSet& cs) {
    const int m = cs.m;
    const TriMesh& g = cs.mesh.geom;
    CoeffValue ahat;
    ahat.m = m;
    ahat.v.fill(0.0);
    CoeffValue a;
    for (int t = 0; t < g.tri_count(); ++t) {
        const auto& p = g.corner[size_t(t)];
        const Vec2 qp[3] = {(p[0] + p[1]) * 0.5, (p[1] + p[2]) * 0.5, (p[2] + p[0]) * 0.5};
        const double w = g.area[size_t(t)] / 3.0;
        for (int q = 0; q < 3; ++q) {
            cs.A.evaluate_into(qp[q], a);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    for (int al = 0; al < m; ++al)
                        for (int be = 0; be < m; ++be) {
                            double s = a.at(i, j, al, be);
                            const auto& chi = cs.chi[size_t(cs.chi_col(j, be))];
                            for (int l = 0; l < 2; ++l)
                                for (int ga = 0; ga < m; ++ga)
                                    s += a.at(i, l, al, ga) * chi.grad(t, l, ga);
                            ahat.at(i, j, al, be) += w * s;
                        }
        }
    }
    return ahat;
}

void flux_correctors(CorrectorSet& cs, double tol) {
    const int m = cs.m;
    const TriMesh& g = cs.mesh.geom;
    if (!cs.has_ahat) {
        cs.Ahat = homogenized_tensor(cs);
        cs.has_ahat = true;
    }

    const int ncols = 4 * m * m;
    cs.H.assign(size_t(ncols), std::vector<double>(size_t(g.tri_count()), 0.0));

    // H_{il}^{ag}(y) = ahat_{il}^{ag} - a_{ij}^{ab}(y) { d_jl d_bg + d_j chi_l^{bg} },
    // averaged per triangle with the assembly quadrature.
    CoeffValue a;
    for (int t = 0; t < g.tri_count(); ++t) {
        const auto& p = g.corner[size_t(t)];
        const Vec2 qp[3] = {(p[0] + p[1]) * 0.5, (p[1] + p[2]) * 0.5, (p[2] + p[0]) * 0.5};
        for (int q = 0; q < 3; ++q) {
            cs.A.evaluate_into(qp[q], a);
            for (int i = 0; i < 2; ++i)
                for (int l = 0; l < 2; ++l)
                    for (int al = 0; al < m; ++al)
                        for (int ga = 0; ga < m; ++ga) {
                            double s = cs.Ahat.at(i, l, al, ga);
                            const auto& chi = cs.chi[size_t(cs.chi_col(l, ga))];
                            for (int j = 0; j < 2; ++j)
                                for (int be = 0; be < m; ++be) {
                                    double dgrad = chi.grad(t, j, be) +
                                                   ((j == l && be == ga) ? 1.0 : 0.0);
                                    s -= a.at(i, j, al, be) * dgrad;
                                }
                            cs.H[size_t(cs.flux_col(i, l, al, ga))][size_t(t)] += s / 3.0;
                        }
        }
    }

    // mean(H) = 0 is an exact identity under the shared quadrature
    for (int c = 0; c < ncols; ++c) {
        double mean = 0.0, scale = 0.0;
        for (int t = 0; t < g.tri_count(); ++t) {
            mean += g.area[size_t(t)] * cs.H[size_t(c)][size_t(t)];
            scale += g.area[size_t(t)] * std::abs(cs.H[size_t(c)][size_t(t)]);
        }
        if (std::abs(mean) > 1e-8 * std::max(scale, 1.0))
            throw std::runtime_error("flux_correctors: mean(H) != 0, quadrature mismatch");
    }

    // U solves Delta U = H on the torus (scalar Laplacian), mean zero.
    auto lap = assemble_cell(make_builtin("constant", {.c0 = 1.0}), cs.mesh);
    cs.U.clear();
    cs.F.assign(size_t(ncols), std::vector<Vec2>(size_t(g.tri_count())));
    for (int c = 0; c < ncols; ++c) {
        std::vector<double> b(size_t(g.node_count()), 0.0);
        for (int t = 0; t < g.tri_count(); ++t) {
            double v = -cs.H[size_t(c)][size_t(t)] * g.area[size_t(t)] / 3.0;
            for (int vtx = 0; vtx < 3; ++vtx)
                b[size_t(g.tri[size_t(t)][size_t(vtx)])] += v;
        }
        cs.U.push_back(solve_mean_zero(lap, b, {.tol = tol}));
        const auto& Uc = cs.U.back();
        for (int t = 0; t < g.tri_count(); ++t)
            cs.F[size_t(c)][size_t(t)] = {Uc.grad(t, 0, 0), Uc.grad(t, 1, 0)};
    }
    cs.has_flux = true;
}

CorrectorSet build_corrector_set(const CoefficientTensor& A, int n, double tol,
                                 bool with_flux) {
    CorrectorSet cs = solve_correctors(A, n, tol);
    cs.Ahat = homogenized_tensor(cs);
    cs.has_ahat = true;
    if (with_flux) flux_correctors(cs, tol);
    return cs;
}

void sample_chi(const CorrectorSet& cs, int col, const Vec2& y, double* out) {
    const int n = cs.mesh.n;
    const int m = cs.m;
    Vec2 w = wrap_unit(y);
    int ci = std::min(int(w.x * n), n - 1);
    int cj = std::min(int(w.y * n), n - 1);
    double fx = w.x * n - ci, fy = w.y * n - cj;

    int ids[3];
    double bary[3];
    if (fx >= fy) { // lower triangle (v00, v10, v11)
        ids[0] = cs.mesh.node_id(ci, cj);
        ids[1] = cs.mesh.node_id(ci + 1, cj);
        ids[2] = cs.mesh.node_id(ci + 1, cj + 1);
        bary[0] = 1.0 - fx;
        bary[1] = fx - fy;
        bary[2] = fy;
    } else { // upper triangle (v00, v11, v01)
        ids[0] = cs.mesh.node_id(ci, cj);
        ids[1] = cs.mesh.node_id(ci + 1, cj + 1);
        ids[2] = cs.mesh.node_id(ci, cj + 1);
        bary[0] = 1.0 - fy;
        bary[1] = fx;
        bary[2] = fy - fx;
    }
    const auto& chi = cs.chi[size_t(col)];
    for (int al = 0; al < m; ++al) {
        double v = 0.0;
        for (int k = 0; k < 3; ++k) v += bary[k] * chi.value(ids[k], al);
        out[al] = v;
    }
}

double weak_divergence_F(const CorrectorSet& cs, int l, int k, int al, int ga,
                         const std::function<Vec2(const Vec2&)>& grad_phi) {
    if (!cs.has_flux)
        throw std::logic_error("weak_divergence_F: flux correctors not computed");
    const TriMesh& g = cs.mesh.geom;
    double acc = 0.0;
    for (int t = 0; t < g.tri_count(); ++t) {
        const auto& p = g.corner[size_t(t)];
        const Vec2 qp[3] = {(p[0] + p[1]) * 0.5, (p[1] + p[2]) * 0.5, (p[2] + p[0]) * 0.5};
        const double w = g.area[size_t(t)] / 3.0;
        for (int q = 0; q < 3; ++q) {
            Vec2 gp = grad_phi(qp[q]);
            for (int i = 0; i < 2; ++i) {
                const Vec2& F = cs.F[size_t(cs.flux_col(i, l, al, ga))][size_t(t)];
                double Filk = (k == 0) ? F.x : F.y;
                acc += w * Filk * ((i == 0) ? gp.x : gp.y);
            }
        }
    }
    return acc;
}

// ----------------------------------------------------------------------------
// HLAB-CS1 export
// ----------------------------------------------------------------------------

namespace {
constexpr char kMagic[8] = {'H', 'L', 'A', 'B', '-', 'C', 'S', '1'};
} // namespace

void write_corrector_set(const CorrectorSet& cs, const std::string& path) {
    nlohmann::ordered_json hdr;
    hdr["n"] = cs.mesh.n;
    hdr["m"] = cs.m;
    hdr["chi_residual"] = cs.chi_residual;
    std::vector<double> ahat_flat;
    if (cs.has_ahat) {
        int dm = 2 * cs.m;
        for (int k = 0; k < dm * dm; ++k) ahat_flat.push_back(cs.Ahat.v[size_t(k)]);
    }
    hdr["ahat"] = ahat_flat;

    nlohmann::ordered_json manifest = nlohmann::ordered_json::array();
    std::vector<std::pair<const double*, size_t>> order;
    std::vector<std::vector<double>> scratch; // flattened per-triangle vectors
    auto append = [&](const std::string& name, const double* data, size_t count) {
        manifest.push_back({{"name", name}, {"count", count}});
        order.emplace_back(data, count);
    };
    for (size_t c = 0; c < cs.chi.size(); ++c)
        append("chi/" + std::to_string(c), cs.chi[c].values.data(), cs.chi[c].values.size());
    if (cs.has_flux) {
        for (size_t c = 0; c < cs.H.size(); ++c)
            append("H/" + std::to_string(c), cs.H[c].data(), cs.H[c].size());
        for (size_t c = 0; c < cs.U.size(); ++c)
            append("U/" + std::to_string(c), cs.U[c].values.data(), cs.U[c].values.size());
        scratch.reserve(cs.F.size());
        for (size_t c = 0; c < cs.F.size(); ++c) {
            scratch.emplace_back();
            auto& flat = scratch.back();
            flat.reserve(cs.F[c].size() * 2);
            for (const auto& v : cs.F[c]) {
                flat.push_back(v.x);
                flat.push_back(v.y);
            }
        }
        for (size_t c = 0; c < cs.F.size(); ++c)
            append("F/" + std::to_string(c), scratch[c].data(), scratch[c].size());
    }
    hdr["arrays"] = manifest;

    std::string hjson = hdr.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_corrector_set: cannot open " + path);
    out.write(kMagic, 8);
    std::uint64_t len = hjson.size();
    out.write(reinterpret_cast<const char*>(&len), 8);
    out.write(hjson.data(), static_cast<std::streamsize>(hjson.size()));
    for (const auto& [ptr, count] : order)
        out.write(reinterpret_cast<const char*>(ptr),
                  static_cast<std::streamsize>(count * sizeof(double)));
    if (!out) throw std::runtime_error("write_corrector_set: write failed for " + path);
}

CorrectorSetData read_corrector_set(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_corrector_set: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("read_corrector_set: bad magic (want HLAB-CS1)");
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), 8);
    std::string hjson(len, '\0');
    in.read(hjson.data(), static_cast<std::streamsize>(len));
    auto hdr = nlohmann::json::parse(hjson);

    CorrectorSetData out;
    out.n = hdr.at("n").get<int>();
    out.m = hdr.at("m").get<int>();
    out.chi_residual = hdr.at("chi_residual").get<double>();
    auto ahat = hdr.at("ahat").get<std::vector<double>>();
    out.Ahat.m = out.m;
    for (size_t k = 0; k < ahat.size() && k < out.Ahat.v.size(); ++k) out.Ahat.v[k] = ahat[k];
    for (const auto& entry : hdr.at("arrays")) {
        std::vector<double> data(entry.at("count").get<size_t>());
        in.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(data.size() * sizeof(double)));
        out.arrays.emplace_back(entry.at("name").get<std::string>(), std::move(data));
    }
    if (!in) throw std::runtime_error("read_corrector_set: truncated file " + path);
    return out;
}

} // namespace hlab

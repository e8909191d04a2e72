#include "fbrk/swe_planar.hpp"

#include "fbrk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fbrk {

void Grid::validate() const {
    if (nx < 4 || ny < 4) throw DomainError("Grid: nx and ny must be >= 4");
    if (!(dx > 0.0) || !(dy > 0.0) || !std::isfinite(dx) || !std::isfinite(dy))
        throw DomainError("Grid: dx and dy must be positive and finite");
}

Field::Field(int nx, int ny, double value) : nx_(nx), ny_(ny) {
    if (nx <= 0 || ny <= 0) throw DomainError("Field: dimensions must be positive");
    data_.assign(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), value);
}

bool Field::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

double Field::max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
}

double Field::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }
double Field::min() const { return *std::min_element(data_.begin(), data_.end()); }
double Field::max() const { return *std::max_element(data_.begin(), data_.end()); }

Field& Field::operator+=(const Field& o) {
    if (o.data_.size() != data_.size()) throw DomainError("Field: shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}

Field& Field::operator-=(const Field& o) {
    if (o.data_.size() != data_.size()) throw DomainError("Field: shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}

Field& Field::operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
}

SWEState SWEState::rest(const Grid& g, double H) { return {Field(g, H), Field(g), Field(g)}; }

void SWEConfig::validate(const Grid& grid) const {
    if (!(g > 0.0) || !std::isfinite(g)) throw DomainError("SWEConfig: g must be positive");
    if (!(H > 0.0) || !std::isfinite(H)) throw DomainError("SWEConfig: H must be positive");
    if (!std::isfinite(f)) throw DomainError("SWEConfig: f must be finite");
    if (zb.size() != 0 && (zb.nx() != grid.nx || zb.ny() != grid.ny))
        throw DomainError("SWEConfig: topography shape does not match the grid");
    if (zb.size() != 0 && !zb.all_finite()) throw DomainError("SWEConfig: non-finite topography");
}

double SWEConfig::wave_speed() const { return std::sqrt(g * H); }

namespace {

// Neighbour tables for periodic indexing.
struct Index {
    int nx, ny;
    std::size_t at(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    int ip(int i) const { return i + 1 == nx ? 0 : i + 1; }
    int im(int i) const { return i == 0 ? nx - 1 : i - 1; }
    int jp(int j) const { return j + 1 == ny ? 0 : j + 1; }
    int jm(int j) const { return j == 0 ? ny - 1 : j - 1; }
};

void require_shape(const Field& a, const Grid& g, const char* name) {
    if (a.nx() != g.nx || a.ny() != g.ny) throw DomainError(std::string(name) + ": shape does not match the grid");
}

// Kinetic energy at centres from edge-averaged squares.
Field kinetic_energy(const Field& u, const Field& v, const Index& ix) {
    Field k(ix.nx, ix.ny);
    for (int j = 0; j < ix.ny; ++j)
        for (int i = 0; i < ix.nx; ++i) {
            const double uu = 0.5 * (u[ix.at(i, j)] * u[ix.at(i, j)] + u[ix.at(ix.ip(i), j)] * u[ix.at(ix.ip(i), j)]);
            const double vv = 0.5 * (v[ix.at(i, j)] * v[ix.at(i, j)] + v[ix.at(i, ix.jp(j))] * v[ix.at(i, ix.jp(j))]);
            k[ix.at(i, j)] = 0.5 * (uu + vv);
        }
    return k;
}

Field vorticity_impl(const Field& u, const Field& v, const Index& ix, double dx, double dy) {
    Field z(ix.nx, ix.ny);
    for (int j = 0; j < ix.ny; ++j)
        for (int i = 0; i < ix.nx; ++i)
            z[ix.at(i, j)] = (v[ix.at(i, j)] - v[ix.at(ix.im(i), j)]) / dx -
                             (u[ix.at(i, j)] - u[ix.at(i, ix.jm(j))]) / dy;
    return z;
}

// Nonlinear part of the momentum tendency, (zeta + f) (vbar, -ubar), on the edges.
Velocity rotation_terms(const Field& u, const Field& v, const SWEConfig& cfg, const Index& ix, double dx, double dy) {
    Field ru(ix.nx, ix.ny), rv(ix.nx, ix.ny);
    Field zeta;
    if (cfg.momentum_advection) zeta = vorticity_impl(u, v, ix, dx, dy);
    for (int j = 0; j < ix.ny; ++j)
        for (int i = 0; i < ix.nx; ++i) {
            const int im = ix.im(i), ip = ix.ip(i), jm = ix.jm(j), jp = ix.jp(j);
            const double vbar =
                0.25 * (v[ix.at(im, j)] + v[ix.at(i, j)] + v[ix.at(im, jp)] + v[ix.at(i, jp)]);
            const double ubar =
                0.25 * (u[ix.at(i, j)] + u[ix.at(ip, j)] + u[ix.at(i, jm)] + u[ix.at(ip, jm)]);
            double qu = cfg.f, qv = cfg.f;
            if (cfg.momentum_advection) {
                qu += 0.5 * (zeta[ix.at(i, j)] + zeta[ix.at(i, jp)]);
                qv += 0.5 * (zeta[ix.at(i, j)] + zeta[ix.at(ip, j)]);
            }
            ru[ix.at(i, j)] = qu * vbar;
            rv[ix.at(i, j)] = -qv * ubar;
        }
    return {std::move(ru), std::move(rv)};
}

// Bernoulli function K + g (h + zb) at centres.
Field bernoulli(const Field& u, const Field& v, const Field& h, const SWEConfig& cfg, const Index& ix) {
    Field b(ix.nx, ix.ny);
    const bool topo = cfg.zb.size() != 0;
    for (std::size_t k = 0; k < h.size(); ++k) b[k] = cfg.g * (h[k] + (topo ? cfg.zb[k] : 0.0));
    if (cfg.momentum_advection) b += kinetic_energy(u, v, ix);
    return b;
}

} // namespace

Velocity PlanarModel::momentum_tendency(const Velocity& w, const Field& h) const {
    const Index ix{grid.nx, grid.ny};
    Velocity t = rotation_terms(w.u, w.v, config, ix, grid.dx, grid.dy);
    const Field b = bernoulli(w.u, w.v, h, config, ix);
    for (int j = 0; j < ix.ny; ++j)
        for (int i = 0; i < ix.nx; ++i) {
            t.u[ix.at(i, j)] -= (b[ix.at(i, j)] - b[ix.at(ix.im(i), j)]) / grid.dx;
            t.v[ix.at(i, j)] -= (b[ix.at(i, j)] - b[ix.at(i, ix.jm(j))]) / grid.dy;
        }
    return t;
}

Field PlanarModel::thickness_tendency(const Velocity& w, const Field& h) const {
    const Index ix{grid.nx, grid.ny};
    Field fu(grid.nx, grid.ny), fv(grid.nx, grid.ny);
    for (int j = 0; j < ix.ny; ++j)
        for (int i = 0; i < ix.nx; ++i) {
            fu[ix.at(i, j)] = 0.5 * (h[ix.at(ix.im(i), j)] + h[ix.at(i, j)]) * w.u[ix.at(i, j)];
            fv[ix.at(i, j)] = 0.5 * (h[ix.at(i, ix.jm(j))] + h[ix.at(i, j)]) * w.v[ix.at(i, j)];
        }
    Field d = divergence(fu, fv, grid);
    d *= -1.0;
    return d;
}

Field divergence(const Field& fu, const Field& fv, const Grid& grid) {
    const Index ix{grid.nx, grid.ny};
    Field d(grid.nx, grid.ny);
    for (int j = 0; j < ix.ny; ++j)
        for (int i = 0; i < ix.nx; ++i)
            d[ix.at(i, j)] = (fu[ix.at(ix.ip(i), j)] - fu[ix.at(i, j)]) / grid.dx +
                             (fv[ix.at(i, ix.jp(j))] - fv[ix.at(i, j)]) / grid.dy;
    return d;
}

Field laplacian(const Field& h, const Grid& grid) {
    const Index ix{grid.nx, grid.ny};
    Field gx(grid.nx, grid.ny), gy(grid.nx, grid.ny);
    for (int j = 0; j < ix.ny; ++j)
        for (int i = 0; i < ix.nx; ++i) {
            gx[ix.at(i, j)] = (h[ix.at(i, j)] - h[ix.at(ix.im(i), j)]) / grid.dx;
            gy[ix.at(i, j)] = (h[ix.at(i, j)] - h[ix.at(i, ix.jm(j))]) / grid.dy;
        }
    return divergence(gx, gy, grid);
}

Field vorticity(const Field& u, const Field& v, const Grid& grid) {
    grid.validate();
    require_shape(u, grid, "vorticity");
    require_shape(v, grid, "vorticity");
    return vorticity_impl(u, v, Index{grid.nx, grid.ny}, grid.dx, grid.dy);
}

Tendencies tendencies(const SWEState& s, const SWEConfig& config, const Grid& grid) {
    grid.validate();
    config.validate(grid);
    require_shape(s.h, grid, "h");
    require_shape(s.u, grid, "u");
    require_shape(s.v, grid, "v");
    if (!s.all_finite()) throw DomainError("tendencies: non-finite state");
    const PlanarModel model{grid, config};
    const Velocity w{s.u, s.v};
    Velocity m = model.momentum_tendency(w, s.h);
    return {std::move(m.u), std::move(m.v), model.thickness_tendency(w, s.h)};
}

StepResult step(const SWEState& s, const SchemeSpec& scheme, double dt, const SWEConfig& config, const Grid& grid) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("step: dt must be positive and finite");
    if (scheme.kind == SchemeKind::FBRK32 && !scheme.weights.finite())
        throw DomainError("step: non-finite FB weights");
    grid.validate();
    config.validate(grid);
    require_shape(s.h, grid, "h");
    require_shape(s.u, grid, "u");
    require_shape(s.v, grid, "v");

    const PlanarModel model{grid, config};
    const SplitState<PlanarModel> in{{s.u, s.v}, s.h};
    auto out = advance(model, in, scheme, dt);
    StepResult r{{std::move(out.h), std::move(out.u.u), std::move(out.u.v)}, false};
    r.unstable = !r.state.all_finite();
    return r;
}

Field balance_rhs(const Field& u0, const Field& v0, const SWEConfig& config, const Grid& grid) {
    grid.validate();
    config.validate(grid);
    require_shape(u0, grid, "u0");
    require_shape(v0, grid, "v0");
    if (!u0.all_finite() || !v0.all_finite()) throw DomainError("balanced_ic: non-finite velocity");

    const Index ix{grid.nx, grid.ny};
    // Divergence of the momentum tendency with h removed: D[rotation] - L[K + g zb].
    const Velocity rot = rotation_terms(u0, v0, config, ix, grid.dx, grid.dy);
    Field rhs = divergence(rot.u, rot.v, grid);
    Field b(grid.nx, grid.ny);
    if (config.momentum_advection) b = kinetic_energy(u0, v0, ix);
    if (config.zb.size() != 0) b += config.g * config.zb;
    rhs -= laplacian(b, grid);
    rhs *= 1.0 / config.g;
    return rhs;
}

BalanceResult balanced_ic(const Field& u0, const Field& v0, const SWEConfig& config, const Grid& grid,
                          const BalanceOptions& options) {
    Field rhs = balance_rhs(u0, v0, config, grid);
    const std::size_t n = rhs.size();
    const double rhs_norm = std::sqrt(std::inner_product(rhs.data().begin(), rhs.data().end(), rhs.data().begin(), 0.0));
    const double mean = rhs.sum() / static_cast<double>(n);
    if (std::abs(mean) * std::sqrt(static_cast<double>(n)) > 1e-10 * rhs_norm && rhs_norm > 0.0)
        throw IncompatibilityError("balanced_ic: right-hand side has non-zero mean");

    BalanceResult result;
    result.state = {Field(grid, config.H), u0, v0};
    if (rhs_norm == 0.0) return result;
    for (double& x : rhs.data()) x -= mean;

    // Conjugate gradients on -L x = -rhs within the zero-mean subspace.
    auto dot = [](const Field& a, const Field& b) {
        return std::inner_product(a.data().begin(), a.data().end(), b.data().begin(), 0.0);
    };
    auto apply = [&](const Field& x) {
        Field y = laplacian(x, grid);
        y *= -1.0;
        return y;
    };
    Field b = rhs;
    b *= -1.0;
    const double b_norm = std::sqrt(dot(b, b));
    Field x(grid);
    Field r = b;
    Field p = r;
    double rr = dot(r, r);
    const int cap = options.max_iterations > 0 ? options.max_iterations : static_cast<int>(10 * n);
    int it = 0;
    // Iterate a little past the target so the true residual also meets it.
    const double target = 0.1 * options.rel_tol * b_norm;
    while (std::sqrt(rr) > target) {
        if (it >= cap) throw ConvergenceError("balanced_ic: iteration cap reached");
        const Field ap = apply(p);
        const double alpha = rr / dot(p, ap);
        for (std::size_t k = 0; k < n; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        const double rr_new = dot(r, r);
        for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + (rr_new / rr) * p[k];
        rr = rr_new;
        ++it;
    }

    const double xmean = x.sum() / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) result.state.h[k] = x[k] - xmean + config.H;

    const Field res = laplacian(result.state.h, grid) - balance_rhs(u0, v0, config, grid);
    result.iterations = it;
    result.relative_residual = std::sqrt(dot(res, res)) / rhs_norm;
    if (result.relative_residual > options.rel_tol)
        throw ConvergenceError("balanced_ic: residual above tolerance after convergence");
    return result;
}

Diagnostics diagnostics(const SWEState& s, const SWEConfig& config, const Grid& grid) {
    grid.validate();
    config.validate(grid);
    require_shape(s.h, grid, "h");
    require_shape(s.u, grid, "u");
    require_shape(s.v, grid, "v");
    const Index ix{grid.nx, grid.ny};
    const Field k = kinetic_energy(s.u, s.v, ix);
    Diagnostics d;
    double energy = 0.0;
    for (int j = 0; j < ix.ny; ++j)
        for (int i = 0; i < ix.nx; ++i) {
            const std::size_t c = ix.at(i, j);
            const double eta = s.h[c] + config.bottom(i, j);
            energy += s.h[c] * k[c] + 0.5 * config.g * eta * eta;
        }
    d.total_mass = s.h.sum() * grid.cell_area();
    d.total_energy = energy * grid.cell_area();
    d.max_abs_vorticity = vorticity_impl(s.u, s.v, ix, grid.dx, grid.dy).max_abs();
    return d;
}

} // namespace fbrk

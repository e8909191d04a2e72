#pragma once

// Shallow water equations on a doubly periodic Arakawa C-grid.
//
// Storage is row-major, index j * nx + i. With cell (i, j) covering
// [i dx, (i+1) dx) x [j dy, (j+1) dy):
//   h(i, j)    cell centre        ((i+1/2) dx, (j+1/2) dy)
//   u(i, j)    west edge          (i dx,       (j+1/2) dy)
//   v(i, j)    south edge         ((i+1/2) dx, j dy)
//   zeta(i, j) south-west corner  (i dx,       j dy)

#include "fbrk/schemes.hpp"

#include <json.hpp>

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace fbrk {

struct Grid {
    int nx = 64;
    int ny = 64;
    double dx = 1.0;
    double dy = 1.0;

    void validate() const;
    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    double cell_area() const { return dx * dy; }
    friend bool operator==(const Grid&, const Grid&) = default;
};

/// nx x ny array of doubles with periodic (i, j) access.
class Field {
public:
    Field() = default;
    Field(int nx, int ny, double value = 0.0);
    explicit Field(const Grid& g, double value = 0.0) : Field(g.nx, g.ny, value) {}

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(int i, int j) { return data_[wrap(i, j)]; }
    double operator()(int i, int j) const { return data_[wrap(i, j)]; }
    double& operator[](std::size_t k) { return data_[k]; }
    double operator[](std::size_t k) const { return data_[k]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool all_finite() const;
    double max_abs() const;
    double sum() const;
    double min() const;
    double max() const;

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double s);

    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(double s, Field a) { return a *= s; }
    friend bool operator==(const Field&, const Field&) = default;

private:
    std::size_t wrap(int i, int j) const {
        i %= nx_;
        j %= ny_;
        if (i < 0) i += nx_;
        if (j < 0) j += ny_;
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
    }

    int nx_ = 0;
    int ny_ = 0;
    std::vector<double> data_;
};

/// Velocity pair (u on x-edges, v on y-edges).
struct Velocity {
    Field u;
    Field v;

    friend Velocity operator+(Velocity a, const Velocity& b) {
        a.u += b.u;
        a.v += b.v;
        return a;
    }
    friend Velocity operator-(Velocity a, const Velocity& b) {
        a.u -= b.u;
        a.v -= b.v;
        return a;
    }
    friend Velocity operator*(double s, Velocity a) {
        a.u *= s;
        a.v *= s;
        return a;
    }
    friend bool operator==(const Velocity&, const Velocity&) = default;
};

struct SWEState {
    Field h;
    Field u;
    Field v;

    static SWEState rest(const Grid& g, double H);
    bool all_finite() const { return h.all_finite() && u.all_finite() && v.all_finite(); }
    friend bool operator==(const SWEState&, const SWEState&) = default;
};

struct SWEConfig {
    double g = 9.80616;
    double f = 1e-4;
    double H = 500.0;
    Field zb;                       ///< bottom topography at centres; empty means flat
    bool momentum_advection = true; ///< false: quasi-linear mode

    void validate(const Grid& grid) const;
    double wave_speed() const;
    double bottom(int i, int j) const { return zb.size() == 0 ? 0.0 : zb(i, j); }
};

struct Tendencies {
    Field du;
    Field dv;
    Field dh;
};

/// Split-system adapter used by the time steppers.
struct PlanarModel {
    using Momentum = Velocity;
    using Thickness = Field;

    const Grid& grid;
    const SWEConfig& config;

    Velocity momentum_tendency(const Velocity& w, const Field& h) const;
    Field thickness_tendency(const Velocity& w, const Field& h) const;
};

/// Throws DomainError on non-finite input or mismatched shapes.
Tendencies tendencies(const SWEState& state, const SWEConfig& config, const Grid& grid);

struct StepResult {
    SWEState state;
    bool unstable = false;  ///< some field became non-finite
};

StepResult step(const SWEState& state, const SchemeSpec& scheme, double dt, const SWEConfig& config,
                const Grid& grid);

/// Relative vorticity at corners.
Field vorticity(const Field& u, const Field& v, const Grid& grid);

/// Discrete Laplacian D G at centres.
Field laplacian(const Field& h, const Grid& grid);

/// Divergence at centres of an edge vector field.
Field divergence(const Field& fu, const Field& fv, const Grid& grid);

struct BalanceOptions {
    double rel_tol = 1e-10;
    int max_iterations = 0;  ///< 0: 10 * cell count
};

struct BalanceResult {
    SWEState state;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Thickness that zeroes the divergence of the initial momentum tendency,
/// normalised to mean(h) = H. Throws IncompatibilityError / ConvergenceError.
BalanceResult balanced_ic(const Field& u0, const Field& v0, const SWEConfig& config, const Grid& grid,
                          const BalanceOptions& options = {});

/// Right-hand side r of L h = r solved by balanced_ic.
Field balance_rhs(const Field& u0, const Field& v0, const SWEConfig& config, const Grid& grid);

struct Diagnostics {
    double total_mass = 0.0;
    double total_energy = 0.0;
    double max_abs_vorticity = 0.0;
};

Diagnostics diagnostics(const SWEState& state, const SWEConfig& config, const Grid& grid);

// Snapshot and configuration I/O.

void write_snapshot_csv(std::ostream& out, const SWEState& state);
SWEState read_snapshot_csv(std::istream& in, const Grid& grid);
void write_snapshot_binary(std::ostream& out, const SWEState& state);
SWEState read_snapshot_binary(std::istream& in);

/// Keys: nx, ny, dx, dy, g, f, H, momentum_advection (all optional). Unknown keys throw DomainError.
void planar_from_json(const nlohmann::json& j, Grid& grid, SWEConfig& config);
nlohmann::ordered_json planar_to_json(const Grid& grid, const SWEConfig& config);

} // namespace fbrk

// Z-periodic Lorentz gas on the cylinder T x R with disk scatterers.
//
// Positions on the collision section are (disk, s, theta, cell): s is arc
// length along the disk boundary counted from angle 0, theta the outgoing
// angle measured from the normal pointing into the billiard domain, and cell
// the vertical index of the obstacle copy carrying the point.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "zxc/geometry.hpp"

namespace zxc {

struct Disk {
    Point2 center;
    double radius = 0.0;
    int id = 0;
};

class BilliardTable {
public:
    BilliardTable() = default;
    /// Throws ValidationError on malformed input (the message names the
    /// offending disk index). Geometry-level checks live in validate_table.
    BilliardTable(std::vector<Disk> disks, double tau_max);

    const std::vector<Disk>& disks() const { return disks_; }
    double tau_max() const { return tau_max_; }
    double quotient_area() const;
    double boundary_length() const;
    /// ceil(tau_max) + 1; bounds |phi|.
    int step_bound() const;

    // Disk copies (offset in [-1,1]^2) whose bounding box meets the unit cell.
    struct Copy {
        int disk;
        int ox;
        int oy;
    };
    const std::vector<Copy>& cell_copies() const { return copies_; }

private:
    std::vector<Disk> disks_;
    double tau_max_ = 0.0;
    std::vector<Copy> copies_;
};

/// Two disks per cell at (0.25,0.25) r=0.40 and (0.75,0.75) r=0.20.
BilliardTable default_table();

struct CollisionState {
    int disk_id = 0;
    double s = 0.0;
    double theta = 0.0;
    std::int64_t cell = 0;
};

struct TableReport {
    double max_flight = 0.0;
    std::int64_t rays = 0;
    double min_clearance = 0.0;
};

/// Disjointness of all periodic copies plus dense ray casting.
/// Throws OverlappingObstacles or HorizonViolation.
TableReport validate_table(const BilliardTable& t, int angle_grid);

struct Flight {
    double tau = 0.0;
    Point2 hit;  // q + tau v, same frame as q
    int disk_id = -1;
    std::int64_t mx = 0;  // horizontal offset of the hit copy
    std::int64_t cell_shift = 0;  // vertical offset of the hit copy
};

/// First obstacle hit from q along v, searching up to tau_max.
Flight free_flight(const BilliardTable& t, Point2 q, UnitVec v);
/// Same with an explicit search limit.
Flight free_flight_limited(const BilliardTable& t, Point2 q, UnitVec v, double limit);

UnitVec reflect(UnitVec v, UnitVec n);

/// Position (fundamental cell frame, cell not added) and outgoing velocity.
Point2 state_position(const BilliardTable& t, const CollisionState& x);
UnitVec state_velocity(const BilliardTable& t, const CollisionState& x);
UnitVec outward_normal(const BilliardTable& t, const CollisionState& x);

struct MapStep {
    CollisionState next;
    double tau = 0.0;
    Segment arc;  // lifted: y includes the starting cell
    UnitVec v_in;  // velocity at arrival
    UnitVec v_out;  // velocity after reflection
};

MapStep billiard_map(const BilliardTable& t, const CollisionState& x);
/// Time-reversal involution (disk, s, theta, cell) -> (disk, s, -theta, cell).
CollisionState kappa(const CollisionState& x);
CollisionState inverse_map(const BilliardTable& t, const CollisionState& x);
/// cell(T x) - cell(x).
int step_phi(const BilliardTable& t, const CollisionState& x);

/// Draw from the normalized collision measure, cell 0.
CollisionState sample_mu_bar(const BilliardTable& t, std::mt19937_64& rng);

struct MeanEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::int64_t n = 0;
};

MeanEstimate mean_free_path(const BilliardTable& t, std::int64_t n_samples,
                            std::mt19937_64& rng);
/// pi * quotient_area / boundary_length.
double mean_free_path_formula(const BilliardTable& t);

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace zxc

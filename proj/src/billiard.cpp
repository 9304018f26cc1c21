#include "zxc/billiard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace zxc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDepartureCut = 1e-12;
constexpr double kTangentDisc = 1e-12;
constexpr double kClearance = 1e-9;

std::string idx(int i) { return "disk " + std::to_string(i) + ": "; }

}  // namespace

BilliardTable::BilliardTable(std::vector<Disk> disks, double tau_max)
    : disks_(std::move(disks)), tau_max_(tau_max) {
    if (!(tau_max_ > 0.0) || !std::isfinite(tau_max_))
        throw ValidationError("tau_max must be positive and finite");
    for (std::size_t i = 0; i < disks_.size(); ++i) {
        Disk& d = disks_[i];
        int ii = static_cast<int>(i);
        d.id = ii;
        if (!std::isfinite(d.radius) || d.radius <= 0.0)
            throw ValidationError(idx(ii) + "radius must be positive");
        if (2.0 * d.radius >= 1.0)
            throw ValidationError(idx(ii) + "diameter must be below the cell width");
        if (!(d.center.x >= 0.0 && d.center.x < 1.0 && d.center.y >= 0.0 && d.center.y < 1.0))
            throw ValidationError(idx(ii) + "center must lie in [0,1)^2");
    }
    for (const Disk& d : disks_)
        for (int ox = -1; ox <= 1; ++ox)
            for (int oy = -1; oy <= 1; ++oy) {
                double x0 = d.center.x + ox - d.radius, x1 = d.center.x + ox + d.radius;
                double y0 = d.center.y + oy - d.radius, y1 = d.center.y + oy + d.radius;
                if (x1 < 0.0 || x0 > 1.0 || y1 < 0.0 || y0 > 1.0) continue;
                copies_.push_back({d.id, ox, oy});
            }
}

double BilliardTable::quotient_area() const {
    double a = 1.0;
    for (const Disk& d : disks_) a -= kPi * d.radius * d.radius;
    return a;
}

double BilliardTable::boundary_length() const {
    double l = 0.0;
    for (const Disk& d : disks_) l += 2.0 * kPi * d.radius;
    return l;
}

int BilliardTable::step_bound() const { return static_cast<int>(std::ceil(tau_max_)) + 1; }

BilliardTable default_table() {
    return BilliardTable({{{0.25, 0.25}, 0.40, 0}, {{0.75, 0.75}, 0.20, 1}}, 1.6);
}

Flight free_flight_limited(const BilliardTable& t, Point2 q, UnitVec v, double limit) {
    const auto& disks = t.disks();
    if (disks.empty()) throw HorizonViolation("no obstacles", std::numeric_limits<double>::infinity());
    const double inf = std::numeric_limits<double>::infinity();
    std::int64_t cx = static_cast<std::int64_t>(std::floor(q.x));
    std::int64_t cy = static_cast<std::int64_t>(std::floor(q.y));
    int sx = v.vx > 0 ? 1 : -1, sy = v.vy > 0 ? 1 : -1;
    double ax = std::abs(v.vx), ay = std::abs(v.vy);
    double tx = ax > 0 ? (v.vx > 0 ? (cx + 1 - q.x) : (q.x - cx)) / ax : inf;
    double ty = ay > 0 ? (v.vy > 0 ? (cy + 1 - q.y) : (q.y - cy)) / ay : inf;
    double dx = ax > 0 ? 1.0 / ax : inf, dy = ay > 0 ? 1.0 / ay : inf;

    Flight best;
    best.tau = inf;
    double best_disc = 0.0;
    for (;;) {
        for (const auto& c : t.cell_copies()) {
            const Disk& d = disks[c.disk];
            Point2 cc{d.center.x + static_cast<double>(c.ox + cx),
                      d.center.y + static_cast<double>(c.oy + cy)};
            Point2 w = q - cc;
            double b = w.x * v.vx + w.y * v.vy;
            double cq = dot(w, w) - d.radius * d.radius;
            double disc = b * b - cq;
            if (disc < 0.0) continue;
            double tau = -b - std::sqrt(disc);
            if (tau <= kDepartureCut || tau >= best.tau) continue;
            best.tau = tau;
            best.disk_id = d.id;
            best.mx = c.ox + cx;
            best.cell_shift = c.oy + cy;
            best_disc = disc;
        }
        double t_exit = std::min(tx, ty);
        if (best.tau <= t_exit) break;
        if (t_exit > limit) break;
        if (tx < ty) {
            tx += dx;
            cx += sx;
        } else {
            ty += dy;
            cy += sy;
        }
    }
    if (best.tau > limit)
        throw HorizonViolation("free flight exceeds the horizon bound", best.tau);
    if (best_disc < kTangentDisc) throw TangentialHit("grazing first hit");
    best.hit = {q.x + best.tau * v.vx, q.y + best.tau * v.vy};
    return best;
}

Flight free_flight(const BilliardTable& t, Point2 q, UnitVec v) {
    return free_flight_limited(t, q, v, t.tau_max());
}

TableReport validate_table(const BilliardTable& t, int angle_grid) {
    require(angle_grid >= 10000, "validate_table: angle_grid must be >= 1e4");
    const auto& disks = t.disks();
    TableReport rep;
    if (disks.empty())
        throw HorizonViolation("empty table has unbounded flights",
                               std::numeric_limits<double>::infinity());
    rep.min_clearance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < disks.size(); ++i)
        for (std::size_t j = i; j < disks.size(); ++j)
            for (int ox = -2; ox <= 2; ++ox)
                for (int oy = -2; oy <= 2; ++oy) {
                    if (i == j && ox == 0 && oy == 0) continue;
                    Point2 d = disks[j].center + Point2{double(ox), double(oy)} - disks[i].center;
                    double gap = norm(d) - disks[i].radius - disks[j].radius;
                    rep.min_clearance = std::min(rep.min_clearance, gap);
                    if (gap < kClearance)
                        throw OverlappingObstacles("disks " + std::to_string(i) + " and " +
                                                   std::to_string(j) + " overlap at offset (" +
                                                   std::to_string(ox) + "," +
                                                   std::to_string(oy) + ")");
                }

    const int n_ang = angle_grid;
    const int n_pts = static_cast<int>(std::ceil(std::sqrt(double(angle_grid))));
    const double search = std::max(10.0 * t.tau_max(), 20.0);
    for (const Disk& d : disks) {
        for (int p = 0; p < n_pts; ++p) {
            double alpha = 2.0 * kPi * (p + 0.5) / n_pts;
            Point2 nrm{std::cos(alpha), std::sin(alpha)};
            Point2 tan{-nrm.y, nrm.x};
            Point2 q = d.center + d.radius * nrm;
            for (int a = 0; a < n_ang; ++a) {
                double th = -0.5 * kPi + kPi * (a + 0.5) / n_ang;
                UnitVec v{std::cos(th) * nrm.x + std::sin(th) * tan.x,
                          std::cos(th) * nrm.y + std::sin(th) * tan.y};
                ++rep.rays;
                try {
                    Flight f = free_flight_limited(t, q, v, search);
                    rep.max_flight = std::max(rep.max_flight, f.tau);
                } catch (const TangentialHit&) {
                } catch (const HorizonViolation& e) {
                    throw HorizonViolation("observed flight beyond search limit", e.flight());
                }
            }
        }
    }
    if (rep.max_flight > t.tau_max())
        throw HorizonViolation("observed flight " + std::to_string(rep.max_flight) +
                                   " exceeds tau_max",
                               rep.max_flight);
    return rep;
}

UnitVec reflect(UnitVec v, UnitVec n) {
    double k = 2.0 * (v.vx * n.vx + v.vy * n.vy);
    return {v.vx - k * n.vx, v.vy - k * n.vy};
}

UnitVec outward_normal(const BilliardTable& t, const CollisionState& x) {
    double r = t.disks()[x.disk_id].radius;
    return UnitVec::from_angle(x.s / r);
}

Point2 state_position(const BilliardTable& t, const CollisionState& x) {
    const Disk& d = t.disks()[x.disk_id];
    UnitVec n = outward_normal(t, x);
    return {d.center.x + d.radius * n.vx, d.center.y + d.radius * n.vy};
}

UnitVec state_velocity(const BilliardTable& t, const CollisionState& x) {
    UnitVec n = outward_normal(t, x);
    double c = std::cos(x.theta), s = std::sin(x.theta);
    return {c * n.vx - s * n.vy, c * n.vy + s * n.vx};
}

MapStep billiard_map(const BilliardTable& t, const CollisionState& x) {
    Point2 q = state_position(t, x);
    UnitVec v = state_velocity(t, x);
    Flight f = free_flight(t, q, v);
    const Disk& d = t.disks()[f.disk_id];
    Point2 c{d.center.x + static_cast<double>(f.mx), d.center.y + static_cast<double>(f.cell_shift)};
    Point2 nn = f.hit - c;
    double alpha = std::atan2(nn.y, nn.x);
    UnitVec n = UnitVec::from_angle(alpha);
    UnitVec vo = reflect(v, n);
    double th = std::atan2(-vo.vx * n.vy + vo.vy * n.vx, vo.vx * n.vx + vo.vy * n.vy);

    MapStep out;
    double s = d.radius * alpha;
    if (s < 0.0) s += 2.0 * kPi * d.radius;
    if (s >= 2.0 * kPi * d.radius) s = 0.0;
    out.next = {f.disk_id, s, th, x.cell + f.cell_shift};
    out.tau = f.tau;
    double cy = static_cast<double>(x.cell);
    out.arc = {{q.x, q.y + cy}, {f.hit.x, f.hit.y + cy}};
    out.v_in = v;
    out.v_out = vo;
    return out;
}

CollisionState kappa(const CollisionState& x) { return {x.disk_id, x.s, -x.theta, x.cell}; }

CollisionState inverse_map(const BilliardTable& t, const CollisionState& x) {
    return kappa(billiard_map(t, kappa(x)).next);
}

int step_phi(const BilliardTable& t, const CollisionState& x) {
    return static_cast<int>(billiard_map(t, x).next.cell - x.cell);
}

CollisionState sample_mu_bar(const BilliardTable& t, std::mt19937_64& rng) {
    const auto& disks = t.disks();
    require(!disks.empty(), "sample_mu_bar: empty table");
    double total = 0.0;
    for (const Disk& d : disks) total += d.radius;
    double u = uniform01(rng) * total;
    int k = 0;
    while (k + 1 < static_cast<int>(disks.size()) && u >= disks[k].radius) {
        u -= disks[k].radius;
        ++k;
    }
    CollisionState x;
    x.disk_id = k;
    x.s = uniform01(rng) * 2.0 * kPi * disks[k].radius;
    x.theta = std::asin(2.0 * uniform01(rng) - 1.0);
    x.cell = 0;
    return x;
}

MeanEstimate mean_free_path(const BilliardTable& t, std::int64_t n_samples,
                            std::mt19937_64& rng) {
    require(n_samples > 0, "mean_free_path: n_samples must be positive");
    double sum = 0.0, sum2 = 0.0;
    for (std::int64_t i = 0; i < n_samples;) {
        CollisionState x = sample_mu_bar(t, rng);
        double tau;
        try {
            tau = billiard_map(t, x).tau;
        } catch (const TangentialHit&) {
            continue;
        }
        sum += tau;
        sum2 += tau * tau;
        ++i;
    }
    MeanEstimate m;
    m.n = n_samples;
    m.mean = sum / n_samples;
    double var = n_samples > 1 ? (sum2 - n_samples * m.mean * m.mean) / (n_samples - 1) : 0.0;
    m.stderr_ = std::sqrt(std::max(var, 0.0) / n_samples);
    return m;
}

double mean_free_path_formula(const BilliardTable& t) {
    return kPi * t.quotient_area() / t.boundary_length();
}

}  // namespace zxc

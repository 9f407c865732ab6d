#pragma once

// Point-mass multirotor flight model with material-deposition reaction force,
// mass depletion, first-order attitude tracking, and optional wind. Pure
// functions over value types; the integrator is semi-implicit Euler.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "amnav/core.hpp"

namespace amnav::dyn {

inline constexpr double kAttitudeLimit = std::numbers::pi / 2.0;

struct DroneState {
    Vec3 position{0.0, 0.0, 0.0};      // m
    Vec3 velocity{0.0, 0.0, 0.0};      // m/s
    Vec3 acceleration{0.0, 0.0, 0.0};  // m/s^2, from the last step
    double roll = 0.0;                 // rad
    double pitch = 0.0;                // rad
    double yaw = 0.0;                  // rad, held at its initial value
    double mass = 0.7;                 // kg
};

struct DepositionModel {
    double density = 1700.0;        // kg/m^3
    double nozzle_diameter = 0.008; // m
    double exit_velocity = 0.5;     // m/s
    bool active = false;
};

struct WindModel {
    Vec3 mean_force{0.0, 0.0, 0.0};     // N
    Vec3 gust_amplitude{0.0, 0.0, 0.0}; // N, per-step uniform gusts in +-amplitude
};

struct PhysicsParams {
    double gravity = 9.81;              // m/s^2
    double timestep = 0.01;             // s
    double attitude_time_constant = 0.1; // s, first-order lag on roll/pitch
    double min_mass = 0.35;             // kg, depletion floor
};

/// Command after scaling to physical ranges: roll/pitch in rad, thrust in N.
struct ScaledAction {
    double roll = 0.0;
    double pitch = 0.0;
    double thrust = 0.0;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// mdot = rho * pi * (d/2)^2 * v_exit
inline double mass_flow_rate(double density, double nozzle_diameter, double exit_velocity) {
    if (density <= 0.0 || nozzle_diameter <= 0.0 || exit_velocity <= 0.0)
        throw DomainError("mass_flow_rate: all inputs must be positive");
    const double r = nozzle_diameter / 2.0;
    return density * std::numbers::pi * r * r * exit_velocity;
}

/// Reaction force magnitude F = mdot * v_exit, acting along -z.
inline double deposition_force(double mdot, double exit_velocity) {
    if (mdot < 0.0 || exit_velocity < 0.0)
        throw DomainError("deposition_force: inputs must be non-negative");
    return mdot * exit_velocity;
}

inline double deposition_acceleration(double force, double mass) {
    if (mass <= 0.0) throw DomainError("deposition_acceleration: mass must be positive");
    return force / mass;
}

/// First-order lag toward the commanded angle, clamped to +-pi/2.
/// With dt/tau >= 1 the command is reached exactly.
inline double attitude_track(double current, double commanded, double tau, double dt) {
    if (dt <= 0.0 || tau <= 0.0) throw DomainError("attitude_track: dt and tau must be positive");
    const double alpha = std::min(dt / tau, 1.0);
    const double next = current + (commanded - current) * alpha;
    return std::clamp(next, -kAttitudeLimit, kAttitudeLimit);
}

/// Thrust direction for roll about x then pitch about y, yaw fixed at 0.
inline Vec3 thrust_direction(double roll, double pitch) {
    const double cr = std::cos(roll), sr = std::sin(roll);
    const double cp = std::cos(pitch), sp = std::sin(pitch);
    return {sp * cr, -sr, cp * cr};
}

/// One fixed-timestep integration step. `wind` may be null (identical to a
/// zero wind model). Deterministic given the RNG stream state.
inline DroneState step(const DroneState& state, const ScaledAction& command,
                       const PhysicsParams& physics, const DepositionModel& deposition,
                       const WindModel* wind, Rng* rng) {
    DroneState next = state;
    const double dt = physics.timestep;

    next.roll = attitude_track(state.roll, command.roll, physics.attitude_time_constant, dt);
    next.pitch = attitude_track(state.pitch, command.pitch, physics.attitude_time_constant, dt);

    Vec3 accel = (command.thrust / state.mass) * thrust_direction(next.roll, next.pitch);
    accel[2] -= physics.gravity;

    if (deposition.active) {
        const double mdot = mass_flow_rate(deposition.density, deposition.nozzle_diameter,
                                           deposition.exit_velocity);
        const double force = deposition_force(mdot, deposition.exit_velocity);
        accel[2] -= deposition_acceleration(force, state.mass);
        next.mass = std::max(state.mass - mdot * dt, physics.min_mass);
    }

    if (wind) {
        Vec3 wind_force = wind->mean_force;
        if (wind->gust_amplitude[0] > 0.0 || wind->gust_amplitude[1] > 0.0 ||
            wind->gust_amplitude[2] > 0.0) {
            expects(rng != nullptr, "step: gusty wind requires an RNG stream");
            for (int i = 0; i < 3; ++i)
                wind_force[i] += rng->uniform(-wind->gust_amplitude[i], wind->gust_amplitude[i]);
        }
        accel += (1.0 / state.mass) * wind_force;
    }

    next.acceleration = accel;
    next.velocity = state.velocity + dt * accel;  // semi-implicit Euler
    next.position = state.position + dt * next.velocity;
    return next;
}

}  // namespace amnav::dyn

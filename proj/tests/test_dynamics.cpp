#include <doctest.h>

#include <cmath>
#include <numbers>

#include "amnav/dynamics.hpp"

using namespace amnav;
using dyn::DroneState;

TEST_CASE("mass flow rate") {
    // rho * pi * (d/2)^2 * v, evaluated independently: 1700 * pi * 1.6e-5 * 0.5
    CHECK(dyn::mass_flow_rate(1700.0, 0.008, 0.5) == doctest::Approx(4.2726e-2).epsilon(1e-4));
    CHECK(dyn::mass_flow_rate(1.0, 2.0 / std::sqrt(std::numbers::pi), 1.0) ==
          doctest::Approx(1.0));
    CHECK_THROWS_AS(dyn::mass_flow_rate(1700.0, 0.008, 0.0), dyn::DomainError);
    CHECK_THROWS_AS(dyn::mass_flow_rate(-1.0, 0.008, 0.5), dyn::DomainError);
}

TEST_CASE("deposition force reproduces the reference value") {
    const double mdot = dyn::mass_flow_rate(1700.0, 0.008, 0.5);
    CHECK(dyn::deposition_force(mdot, 0.5) == doctest::Approx(2.135e-2).epsilon(5e-3));
    CHECK(dyn::deposition_force(0.0, 0.5) == 0.0);
    CHECK(dyn::deposition_force(1.0, 1.0) == 1.0);
    CHECK_THROWS_AS(dyn::deposition_force(-1.0, 0.5), dyn::DomainError);
}

TEST_CASE("deposition acceleration") {
    CHECK(dyn::deposition_acceleration(2.135e-2, 1.0) == doctest::Approx(2.135e-2));
    CHECK(dyn::deposition_acceleration(2.135e-2, 0.5) == doctest::Approx(4.27e-2).epsilon(1e-3));
    CHECK(dyn::deposition_acceleration(0.0, 0.7) == 0.0);
    CHECK_THROWS_AS(dyn::deposition_acceleration(1.0, 0.0), dyn::DomainError);
}

TEST_CASE("attitude tracking lag") {
    CHECK(dyn::attitude_track(0.0, 0.4, 0.1, 0.01) == doctest::Approx(0.04));
    CHECK(dyn::attitude_track(0.3, 0.3, 0.1, 0.01) == doctest::Approx(0.3));
    // dt/tau >= 1 reaches the command (clamped)
    CHECK(dyn::attitude_track(0.0, std::numbers::pi, 0.1, 0.2) ==
          doctest::Approx(std::numbers::pi / 2.0));
    CHECK(dyn::attitude_track(0.0, 0.2, 0.1, 0.2) == doctest::Approx(0.2));
    CHECK_THROWS_AS(dyn::attitude_track(0.0, 0.1, 0.0, 0.01), dyn::DomainError);
}

TEST_CASE("hover force balance") {
    DroneState s;
    s.position = {0.0, 0.0, 2.0};
    s.mass = 0.7;
    dyn::PhysicsParams physics;
    dyn::DepositionModel deposition;  // inactive
    const dyn::ScaledAction hover{0.0, 0.0, s.mass * physics.gravity};
    const DroneState next = dyn::step(s, hover, physics, deposition, nullptr, nullptr);
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(next.acceleration[i]) < 1e-12);
        CHECK(next.velocity[i] == s.velocity[i]);
    }
}

TEST_CASE("one-step free fall") {
    DroneState s;
    s.position = {0.0, 0.0, 5.0};
    dyn::PhysicsParams physics;
    const DroneState next =
        dyn::step(s, {0.0, 0.0, 0.0}, physics, dyn::DepositionModel{}, nullptr, nullptr);
    CHECK(next.velocity[2] == doctest::Approx(-0.0981).epsilon(1e-12));
    CHECK(next.acceleration[2] == doctest::Approx(-9.81));
}

TEST_CASE("active deposition adds downward reaction and depletes mass") {
    DroneState s;
    s.position = {0.0, 0.0, 2.0};
    s.mass = 0.7;
    dyn::PhysicsParams physics;
    dyn::DepositionModel dep;
    dep.active = true;
    const dyn::ScaledAction hover{0.0, 0.0, s.mass * physics.gravity};
    const DroneState next = dyn::step(s, hover, physics, dep, nullptr, nullptr);
    const double expected = -2.135e-2 / s.mass;
    CHECK(next.acceleration[2] == doctest::Approx(expected).epsilon(1e-3));
    const double mdot = dyn::mass_flow_rate(dep.density, dep.nozzle_diameter, dep.exit_velocity);
    CHECK(next.mass == doctest::Approx(s.mass - mdot * physics.timestep));
}

TEST_CASE("mass monotonic and floored under long deposition") {
    DroneState s;
    s.position = {0.0, 0.0, 3.0};
    s.mass = 0.7;
    dyn::PhysicsParams physics;
    physics.min_mass = 0.35;
    dyn::DepositionModel dep;
    dep.active = true;
    double prev_mass = s.mass;
    for (int i = 0; i < 2000; ++i) {
        s = dyn::step(s, {0.0, 0.0, s.mass * physics.gravity}, physics, dep, nullptr, nullptr);
        CHECK(s.mass <= prev_mass);
        CHECK(s.mass >= physics.min_mass);
        prev_mass = s.mass;
    }
    CHECK(s.mass == physics.min_mass);  // 0.7 kg at ~0.0427 kg/s depletes well past the floor
}

TEST_CASE("zero wind model is identical to no wind model") {
    DroneState s;
    s.position = {1.0, -1.0, 2.0};
    s.velocity = {0.3, 0.1, -0.2};
    dyn::PhysicsParams physics;
    dyn::WindModel zero_wind;
    Rng rng(99);
    DroneState a = s, b = s;
    for (int i = 0; i < 100; ++i) {
        const dyn::ScaledAction cmd{0.1, -0.05, 6.0};
        a = dyn::step(a, cmd, physics, dyn::DepositionModel{}, &zero_wind, &rng);
        b = dyn::step(b, cmd, physics, dyn::DepositionModel{}, nullptr, nullptr);
    }
    CHECK(a.position == b.position);
    CHECK(a.velocity == b.velocity);
}

TEST_CASE("determinism: identical inputs, identical outputs") {
    DroneState s;
    s.position = {0.0, 0.0, 2.0};
    dyn::PhysicsParams physics;
    dyn::WindModel wind{{0.1, 0.0, 0.0}, {0.2, 0.2, 0.2}};
    dyn::DepositionModel dep;
    dep.active = true;
    Rng r1(7), r2(7);
    DroneState a = s, b = s;
    for (int i = 0; i < 50; ++i) {
        a = dyn::step(a, {0.2, -0.1, 7.0}, physics, dep, &wind, &r1);
        b = dyn::step(b, {0.2, -0.1, 7.0}, physics, dep, &wind, &r2);
    }
    CHECK(a.position == b.position);
    CHECK(a.velocity == b.velocity);
    CHECK(a.mass == b.mass);
}

TEST_CASE("gravity leaves horizontal velocity untouched") {
    DroneState s;
    s.position = {0.0, 0.0, 50.0};
    s.velocity = {1.5, -2.5, 0.0};
    dyn::PhysicsParams physics;
    for (int i = 0; i < 200; ++i)
        s = dyn::step(s, {0.0, 0.0, 0.0}, physics, dyn::DepositionModel{}, nullptr, nullptr);
    CHECK(s.velocity[0] == 1.5);
    CHECK(s.velocity[1] == -2.5);
}

TEST_CASE("yaw stays fixed, attitude stays bounded") {
    DroneState s;
    s.position = {0.0, 0.0, 2.0};
    s.yaw = 0.25;
    dyn::PhysicsParams physics;
    for (int i = 0; i < 300; ++i) {
        s = dyn::step(s, {std::numbers::pi, -std::numbers::pi, 5.0}, physics,
                      dyn::DepositionModel{}, nullptr, nullptr);
        CHECK(s.yaw == 0.25);
        CHECK(std::abs(s.roll) <= std::numbers::pi / 2.0);
        CHECK(std::abs(s.pitch) <= std::numbers::pi / 2.0);
    }
}

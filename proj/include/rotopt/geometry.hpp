#pragma once

#include "rotopt/linalg.hpp"

#include <json.hpp>

#include <array>
#include <string>
#include <vector>

namespace rotopt {

/// Fixed (non-design) mesh regions plus the design annulus.
enum class Region : int {
    Shaft = 0,       // between bore and shaft surface, magnetically air
    Design,          // design annulus D
    Ring,            // rotor iron ring D_RI
    AirGapRotor,     // rotor half of the air gap
    AirGapStator,    // stator half of the air gap
    StatorIron,      // stator yoke and teeth
    CoilA,           // phase band A+
    CoilB,           // phase band B-
    CoilC,           // phase band C+
};
constexpr int kRegionCount = 9;

inline const char* region_name(Region r) {
    static const char* names[kRegionCount] = {"shaft", "design", "ring", "airgap_rotor",
                                              "airgap_stator", "stator_iron", "coil_a",
                                              "coil_b", "coil_c"};
    return names[static_cast<int>(r)];
}

/// Materials distributed in the design region. Order fixed: f, a, m1, m2.
enum class Material : int { Iron = 0, Air = 1, Magnet1 = 2, Magnet2 = 3 };
constexpr int kMaterialCount = 4;

/// One angular slot of a coil phase band, [start, end) in rad, with sign-carrying phase.
struct CoilSpan {
    double start, end;
    Region phase;  // CoilA / CoilB / CoilC
};

/// Geometry of one machine pole. All lengths in meters, angles in radians.
struct MachineSpec {
    int pole_pairs = 4;
    int slot_count = 48;
    double rotor_inner_radius = 26.5e-3;   // shaft bore, mesh inner boundary
    double shaft_outer_radius = 40.0e-3;   // Gamma_SH circle, inner edge of D
    double rotor_outer_radius = 78.6e-3;   // Gamma_R circle
    double stator_inner_radius = 79.1e-3;
    double stator_outer_radius = 116.0e-3;  // Gamma_S circle
    double iron_ring_width = 1.0e-3;
    double air_gap_width = 0.5e-3;
    double axial_length = 179e-3;
    double slot_inner_radius = 80.1e-3;
    double slot_outer_radius = 98.0e-3;
    double slot_opening_fraction = 0.5;  // fraction of the slot pitch open for copper

    int pole_count() const { return 2 * pole_pairs; }
    double pole_angle() const { return 2.0 * kPi / pole_count(); }
    double ring_inner_radius() const { return rotor_outer_radius - iron_ring_width; }
    double mortar_radius() const { return 0.5 * (rotor_outer_radius + stator_inner_radius); }
    int slots_per_pole() const { return slot_count / pole_count(); }

    /// Coil spans of one pole: slots_per_pole slots, consecutive pairs wired A+, B-, C+.
    std::vector<CoilSpan> coil_spans() const {
        std::vector<CoilSpan> spans;
        const int spp = slots_per_pole();
        const double pitch = pole_angle() / spp;
        const double half_open = 0.5 * slot_opening_fraction * pitch;
        for (int m = 0; m < spp; ++m) {
            const double c = (m + 0.5) * pitch;
            Region phase = (m < spp / 3) ? Region::CoilA : (m < 2 * spp / 3) ? Region::CoilB : Region::CoilC;
            spans.push_back({c - half_open, c + half_open, phase});
        }
        return spans;
    }

    void validate() const {
        auto require = [](bool ok, const char* msg) { if (!ok) throw InvalidInput(msg); };
        require(pole_pairs >= 1, "machine: pole_pairs must be >= 1");
        require(slot_count > 0 && slot_count % (3 * pole_count()) == 0,
                "machine: slot_count must be a positive multiple of 3 per pole");
        require(rotor_inner_radius > 0, "machine: bore radius must be positive");
        require(shaft_outer_radius > rotor_inner_radius, "machine: shaft surface inside bore");
        require(ring_inner_radius() > shaft_outer_radius,
                "machine: design annulus D is empty (shaft meets iron ring)");
        require(iron_ring_width > 0, "machine: iron ring width must be positive");
        require(air_gap_width > 0, "machine: air gap width must be positive");
        require(std::abs((stator_inner_radius - rotor_outer_radius) - air_gap_width) < 1e-12,
                "machine: air_gap_width inconsistent with rotor/stator radii");
        require(stator_outer_radius > stator_inner_radius, "machine: stator radii out of order");
        require(slot_inner_radius > stator_inner_radius && slot_outer_radius < stator_outer_radius &&
                    slot_outer_radius > slot_inner_radius,
                "machine: slot band must lie strictly inside the stator");
        require(slot_opening_fraction > 0 && slot_opening_fraction < 1,
                "machine: slot opening fraction in (0,1)");
        require(axial_length > 0, "machine: axial length must be positive");
    }
};

inline void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& known,
                                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : known) ok |= (it.key() == k);
        if (!ok) throw InvalidInput("config: unknown key '" + it.key() + "' in " + where);
    }
}

inline MachineSpec machine_from_json(const nlohmann::json& j) {
    MachineSpec s;
    reject_unknown_keys(j,
                        {"pole_pairs", "slot_count", "rotor_inner_radius_m", "shaft_outer_radius_m",
                         "rotor_outer_radius_m", "stator_inner_radius_m", "stator_outer_radius_m",
                         "iron_ring_width_m", "air_gap_width_m", "axial_length_m", "slot_inner_radius_m",
                         "slot_outer_radius_m", "slot_opening_fraction"},
                        "machine");
    s.pole_pairs = j.value("pole_pairs", s.pole_pairs);
    s.slot_count = j.value("slot_count", s.slot_count);
    s.rotor_inner_radius = j.value("rotor_inner_radius_m", s.rotor_inner_radius);
    s.shaft_outer_radius = j.value("shaft_outer_radius_m", s.shaft_outer_radius);
    s.rotor_outer_radius = j.value("rotor_outer_radius_m", s.rotor_outer_radius);
    s.stator_inner_radius = j.value("stator_inner_radius_m", s.stator_inner_radius);
    s.stator_outer_radius = j.value("stator_outer_radius_m", s.stator_outer_radius);
    s.iron_ring_width = j.value("iron_ring_width_m", s.iron_ring_width);
    s.air_gap_width = j.value("air_gap_width_m", s.air_gap_width);
    s.axial_length = j.value("axial_length_m", s.axial_length);
    s.slot_inner_radius = j.value("slot_inner_radius_m", s.slot_inner_radius);
    s.slot_outer_radius = j.value("slot_outer_radius_m", s.slot_outer_radius);
    s.slot_opening_fraction = j.value("slot_opening_fraction", s.slot_opening_fraction);
    s.validate();
    return s;
}

}  // namespace rotopt

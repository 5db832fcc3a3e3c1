#pragma once

// Bundled study feeders, built in code so tests and the CLI agree byte for
// byte with the JSON copies shipped under feeders/.
//
//   twobus  - slack + 1 bus, 1 load, no mutual coupling; phase a reduces to
//             the scalar two-bus circuit with a closed-form solution
//   synth10 - 10-bus chain, 9 loads spread unevenly over the phases
//   synth55 - trunk-and-lateral feeder with 55 loads, substation regulated
//             above nominal

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "gridhc/netmodel.hpp"

namespace gridhc {

namespace detail {

inline Mat3c cable_z(Complex z_self, Complex z_mutual) {
    Mat3c z;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) z(r, c) = r == c ? z_self : z_mutual;
    return z;
}

inline std::array<Complex, 3> balanced_slack(double mag) {
    const double rot = 2.0 * std::numbers::pi / 3.0;
    return {Complex(mag, 0.0), mag * std::polar(1.0, -rot), mag * std::polar(1.0, rot)};
}

inline Load default_load(int id, const std::string& bus, Phase phase) {
    Load ld;
    ld.id = id;
    ld.bus = bus;
    ld.phase = phase;
    ld.p_kw = 0.3;
    ld.pf = 0.95;
    ld.lagging = true;
    return ld;
}

} // namespace detail

/// Single 230 V service: one line segment, one 0.3 kW load on phase a.
inline NetworkModel make_twobus() {
    NetworkModel net;
    net.base_power_kva = 1.0;
    net.v_plus_pu = 1.05;
    net.slack.bus = "src";
    net.slack.v_pu = detail::balanced_slack(1.0);
    net.buses = {{"src", 0.230}, {"b1", 0.230}};
    net.branches.push_back({"src", "b1", detail::cable_z({0.529, 0.529}, {0.0, 0.0}), {}});
    net.loads.push_back(detail::default_load(0, "b1", Phase::a));
    return net;
}

/// 10-bus chain with 9 loads on phases a,b,c,a,b,a,c,a,b (4/3/2 split).
inline NetworkModel make_synth10() {
    NetworkModel net;
    net.base_power_kva = 1.0;
    net.v_plus_pu = 1.05;
    net.slack.bus = "src";
    net.slack.v_pu = detail::balanced_slack(1.0);
    net.buses.push_back({"src", 0.230});
    const Mat3c seg = detail::cable_z({0.22, 0.09}, {0.06, 0.03});
    const Phase pattern[9] = {Phase::a, Phase::b, Phase::c, Phase::a, Phase::b,
                              Phase::a, Phase::c, Phase::a, Phase::b};
    std::string prev = "src";
    for (int k = 1; k <= 9; ++k) {
        std::string id = "n" + std::to_string(k);
        net.buses.push_back({id, 0.230});
        net.branches.push_back({prev, id, seg, {}});
        net.loads.push_back(detail::default_load(k - 1, id, pattern[k - 1]));
        prev = id;
    }
    return net;
}

/// Trunk of 14 buses; each trunk bus feeds a two-bus lateral carrying two
/// loads per bus (the last lateral carries three loads total), 55 loads in
/// all. Substation regulated to 1.05 pu with a 1.08 pu limit.
inline NetworkModel make_synth55() {
    NetworkModel net;
    net.base_power_kva = 1.0;
    net.v_plus_pu = 1.08;
    net.slack.bus = "sub";
    net.slack.v_pu = detail::balanced_slack(1.05);
    net.buses.push_back({"sub", 0.230});

    const Mat3c trunk = detail::cable_z({0.05, 0.035}, {0.015, 0.010});
    const Mat3c lateral = detail::cable_z({0.30, 0.06}, {0.08, 0.02});

    auto pad2 = [](int k) { return (k < 10 ? "0" : "") + std::to_string(k); };

    int load_id = 0;
    auto place_pair = [&](const std::string& bus) {
        // Two loads per lateral bus on consecutive phases; cycling the start
        // keeps the per-phase totals within one load of each other.
        auto p1 = static_cast<Phase>(load_id % 3);
        auto p2 = static_cast<Phase>((load_id + 1) % 3);
        net.loads.push_back(detail::default_load(load_id, bus, p1));
        ++load_id;
        net.loads.push_back(detail::default_load(load_id, bus, p2));
        ++load_id;
    };

    std::string prev = "sub";
    for (int k = 1; k <= 14; ++k) {
        std::string t = "t" + pad2(k);
        net.buses.push_back({t, 0.230});
        net.branches.push_back({prev, t, trunk, {}});
        prev = t;

        std::string l1 = t + "l1";
        std::string l2 = t + "l2";
        net.buses.push_back({l1, 0.230});
        net.branches.push_back({t, l1, lateral, {}});
        net.buses.push_back({l2, 0.230});
        net.branches.push_back({l1, l2, lateral, {}});
        place_pair(l1);
        if (k < 14) {
            place_pair(l2);
        } else {
            net.loads.push_back(detail::default_load(load_id, l2, static_cast<Phase>(load_id % 3)));
            ++load_id;
        }
    }
    return net;
}

inline const std::vector<std::string>& builtin_feeder_names() {
    static const std::vector<std::string> names{"twobus", "synth10", "synth55"};
    return names;
}

inline std::optional<NetworkModel> builtin_feeder(const std::string& name) {
    if (name == "twobus") return make_twobus();
    if (name == "synth10") return make_synth10();
    if (name == "synth55") return make_synth55();
    return std::nullopt;
}

inline std::string builtin_feeder_json(const std::string& name) {
    auto net = builtin_feeder(name);
    require(net.has_value(), ErrorCode::usage, "unknown bundled feeder \"" + name + "\"");
    return feeder_to_json(*net).dump(2) + "\n";
}

} // namespace gridhc

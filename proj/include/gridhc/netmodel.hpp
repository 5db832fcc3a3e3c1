#pragma once

// Feeder data model, feeder file ingestion, and assembly/partition of the
// three-phase complex nodal admittance matrix.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gridhc/errors.hpp"

namespace gridhc {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Mat3c = Eigen::Matrix3cd;

enum class Phase : int { a = 0, b = 1, c = 2 };

inline char phase_letter(Phase p) { return static_cast<char>('a' + static_cast<int>(p)); }

inline Phase phase_from_letter(const std::string& s) {
    if (s == "a") return Phase::a;
    if (s == "b") return Phase::b;
    if (s == "c") return Phase::c;
    fail(ErrorCode::parse, "phase must be one of \"a\", \"b\", \"c\", got \"" + s + "\"");
}

struct Bus {
    std::string id;
    double base_kv = 0.0; // line-to-neutral phase base, kV
};

struct Branch {
    std::string from;
    std::string to;
    Mat3c z_ohm;                    // 3x3 series impedance
    std::optional<Mat3c> y_shunt_s; // 3x3 total shunt admittance, half at each end
};

struct Load {
    int id = 0; // canonical load index, 0..N_lds-1
    std::string bus;
    Phase phase = Phase::a;
    double p_kw = 0.0;
    double pf = 1.0;
    bool lagging = true;
};

struct SlackSpec {
    std::string bus;
    std::array<Complex, 3> v_pu{};
};

struct NetworkModel {
    double base_power_kva = 1.0;        // single-phase power base
    std::optional<double> v_plus_pu;    // upper voltage limit; may come from the CLI instead
    SlackSpec slack;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Load> loads;

    int n_bus() const { return static_cast<int>(buses.size()); }
    int n_lds() const { return static_cast<int>(loads.size()); }

    int bus_index(const std::string& id) const {
        for (int i = 0; i < n_bus(); ++i)
            if (buses[i].id == id) return i;
        fail(ErrorCode::validation, "unknown bus id \"" + id + "\"");
    }

    int slack_index() const { return bus_index(slack.bus); }

    double base_voltage_v() const { return buses[slack_index()].base_kv * 1e3; }

    double base_impedance_ohm() const {
        double vb = base_voltage_v();
        return vb * vb / (base_power_kva * 1e3);
    }

    /// Complex power drawn by a load, pu (positive = consumption).
    Complex load_s_pu(const Load& ld) const {
        double p = ld.p_kw / base_power_kva;
        double q = 0.0;
        if (p != 0.0) {
            require(ld.pf > 0.0, ErrorCode::validation,
                    "load " + std::to_string(ld.id) + ": power factor 0 with nonzero power");
            q = p * std::sqrt(1.0 - ld.pf * ld.pf) / ld.pf;
            if (!ld.lagging) q = -q;
        }
        return {p, q};
    }

    ComplexVector slack_voltage() const {
        ComplexVector v0(3);
        for (int p = 0; p < 3; ++p) v0[p] = slack.v_pu[static_cast<std::size_t>(p)];
        return v0;
    }
};

/// Bijection between (bus, phase) pairs and matrix rows. The slack bus owns
/// rows 0..2 of the full matrix; every other bus keeps file order.
struct NodeOrdering {
    int n_bus = 0;
    std::vector<int> position;       // bus index -> ordered position (slack at 0)
    std::vector<int> bus_at;         // ordered position -> bus index
    std::vector<int> load_node_rows; // load index -> row within the L block

    int full_row(int bus_idx, Phase p) const {
        return 3 * position[static_cast<std::size_t>(bus_idx)] + static_cast<int>(p);
    }

    // Row within vL / YLL; only valid for non-slack buses.
    int l_row(int bus_idx, Phase p) const { return full_row(bus_idx, p) - 3; }

    std::pair<int, Phase> bus_phase(int full_row_idx) const {
        return {bus_at[static_cast<std::size_t>(full_row_idx / 3)],
                static_cast<Phase>(full_row_idx % 3)};
    }

    int n_rows() const { return 3 * n_bus; }
    int n_l_rows() const { return 3 * (n_bus - 1); }
};

/// Slack/load partition of the nodal admittance matrix, with YLL factorized.
struct PartitionedAdmittance {
    ComplexMatrix y00; // 3 x 3
    ComplexMatrix y0l; // 3 x 3(N-1)
    ComplexMatrix yl0; // 3(N-1) x 3
    ComplexMatrix yll; // 3(N-1) x 3(N-1)
    NodeOrdering ordering;
    Eigen::PartialPivLU<ComplexMatrix> yll_lu;

    int n_l_rows() const { return static_cast<int>(yll.rows()); }
};

// ---------------------------------------------------------------------------
// Feeder file parsing
// ---------------------------------------------------------------------------

namespace detail {

using json = nlohmann::ordered_json;

[[noreturn]] inline void parse_fail(const std::string& path, const std::string& what) {
    fail(ErrorCode::parse, path + ": " + what);
}

inline const json& member(const json& j, const std::string& path, const std::string& key) {
    if (!j.is_object()) parse_fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) parse_fail(path + "." + key, "missing required field");
    return *it;
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) parse_fail(path, "expected a number");
    return j.get<double>();
}

inline std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) parse_fail(path, "expected a string");
    return j.get<std::string>();
}

inline Complex complex_pair(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) parse_fail(path, "expected [re, im]");
    return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

inline Mat3c matrix3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) parse_fail(path, "expected 3 rows of 3 [re, im] pairs");
    Mat3c m;
    for (int r = 0; r < 3; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        std::string rp = path + "[" + std::to_string(r) + "]";
        if (!row.is_array() || row.size() != 3) parse_fail(rp, "expected 3 [re, im] pairs");
        for (int c = 0; c < 3; ++c)
            m(r, c) = complex_pair(row[static_cast<std::size_t>(c)],
                                   rp + "[" + std::to_string(c) + "]");
    }
    return m;
}

inline json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline json matrix3_to_json(const Mat3c& m) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r) {
        json row = json::array();
        for (int c = 0; c < 3; ++c) row.push_back(complex_to_json(m(r, c)));
        rows.push_back(row);
    }
    return rows;
}

} // namespace detail

/// Parses feeder text (JSON) into a NetworkModel. `source` names the input in
/// error messages. Structural validation happens in validate_network().
inline NetworkModel parse_feeder(const std::string& body, const std::string& source = "feeder") {
    using detail::member;
    using detail::number;
    using detail::text;
    detail::json doc;
    try {
        doc = detail::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        // nlohmann reports a byte offset; convert to a line number for context.
        std::size_t line = 1;
        for (std::size_t i = 0; i < e.byte && i < body.size(); ++i)
            if (body[i] == '\n') ++line;
        fail(ErrorCode::parse, source + ":" + std::to_string(line) + ": " + e.what());
    }

    NetworkModel net;
    net.base_power_kva = number(member(doc, source, "base_power_kva"), source + ".base_power_kva");
    if (doc.contains("v_plus_pu"))
        net.v_plus_pu = number(doc["v_plus_pu"], source + ".v_plus_pu");

    const auto& slack = member(doc, source, "slack");
    net.slack.bus = text(member(slack, source + ".slack", "bus"), source + ".slack.bus");
    const auto& sv = member(slack, source + ".slack", "v_pu");
    if (!sv.is_array() || sv.size() != 3)
        detail::parse_fail(source + ".slack.v_pu", "expected 3 [re, im] pairs");
    for (int p = 0; p < 3; ++p)
        net.slack.v_pu[static_cast<std::size_t>(p)] = detail::complex_pair(
            sv[static_cast<std::size_t>(p)], source + ".slack.v_pu[" + std::to_string(p) + "]");

    const auto& buses = member(doc, source, "buses");
    if (!buses.is_array()) detail::parse_fail(source + ".buses", "expected an array");
    for (std::size_t i = 0; i < buses.size(); ++i) {
        std::string bp = source + ".buses[" + std::to_string(i) + "]";
        Bus b;
        b.id = text(member(buses[i], bp, "id"), bp + ".id");
        b.base_kv = number(member(buses[i], bp, "base_kv"), bp + ".base_kv");
        net.buses.push_back(std::move(b));
    }

    const auto& branches = member(doc, source, "branches");
    if (!branches.is_array()) detail::parse_fail(source + ".branches", "expected an array");
    for (std::size_t i = 0; i < branches.size(); ++i) {
        std::string bp = source + ".branches[" + std::to_string(i) + "]";
        Branch br;
        br.from = text(member(branches[i], bp, "from"), bp + ".from");
        br.to = text(member(branches[i], bp, "to"), bp + ".to");
        br.z_ohm = detail::matrix3(member(branches[i], bp, "z_ohm"), bp + ".z_ohm");
        if (branches[i].contains("y_shunt_s"))
            br.y_shunt_s = detail::matrix3(branches[i]["y_shunt_s"], bp + ".y_shunt_s");
        net.branches.push_back(std::move(br));
    }

    const auto& loads = member(doc, source, "loads");
    if (!loads.is_array()) detail::parse_fail(source + ".loads", "expected an array");
    for (std::size_t i = 0; i < loads.size(); ++i) {
        std::string lp = source + ".loads[" + std::to_string(i) + "]";
        Load ld;
        double id = number(member(loads[i], lp, "id"), lp + ".id");
        ld.id = static_cast<int>(id);
        if (static_cast<double>(ld.id) != id) detail::parse_fail(lp + ".id", "expected an integer");
        ld.bus = text(member(loads[i], lp, "bus"), lp + ".bus");
        ld.phase = phase_from_letter(text(member(loads[i], lp, "phase"), lp + ".phase"));
        ld.p_kw = number(member(loads[i], lp, "p_kw"), lp + ".p_kw");
        ld.pf = number(member(loads[i], lp, "pf"), lp + ".pf");
        const auto& lag = member(loads[i], lp, "lagging");
        if (!lag.is_boolean()) detail::parse_fail(lp + ".lagging", "expected a boolean");
        ld.lagging = lag.get<bool>();
        net.loads.push_back(std::move(ld));
    }
    return net;
}

inline nlohmann::ordered_json feeder_to_json(const NetworkModel& net) {
    using detail::json;
    json doc;
    doc["base_power_kva"] = net.base_power_kva;
    if (net.v_plus_pu) doc["v_plus_pu"] = *net.v_plus_pu;
    json slack;
    slack["bus"] = net.slack.bus;
    json sv = json::array();
    for (const auto& v : net.slack.v_pu) sv.push_back(detail::complex_to_json(v));
    slack["v_pu"] = sv;
    doc["slack"] = slack;
    doc["buses"] = json::array();
    for (const auto& b : net.buses) doc["buses"].push_back({{"id", b.id}, {"base_kv", b.base_kv}});
    doc["branches"] = json::array();
    for (const auto& br : net.branches) {
        json jb{{"from", br.from}, {"to", br.to}, {"z_ohm", detail::matrix3_to_json(br.z_ohm)}};
        if (br.y_shunt_s) jb["y_shunt_s"] = detail::matrix3_to_json(*br.y_shunt_s);
        doc["branches"].push_back(jb);
    }
    doc["loads"] = json::array();
    for (const auto& ld : net.loads)
        doc["loads"].push_back({{"id", ld.id},
                                {"bus", ld.bus},
                                {"phase", std::string(1, phase_letter(ld.phase))},
                                {"p_kw", ld.p_kw},
                                {"pf", ld.pf},
                                {"lagging", ld.lagging}});
    return doc;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Checks every NetworkModel invariant; throws Error(validation) naming the
/// violated one.
inline void validate_network(const NetworkModel& net) {
    require(!net.buses.empty(), ErrorCode::validation, "feeder has no buses");
    require(net.base_power_kva > 0.0, ErrorCode::validation, "base_power_kva must be positive");

    std::unordered_map<std::string, int> bus_idx;
    for (int i = 0; i < net.n_bus(); ++i) {
        const auto& b = net.buses[static_cast<std::size_t>(i)];
        require(!b.id.empty(), ErrorCode::validation, "bus with empty id");
        require(b.base_kv > 0.0, ErrorCode::validation, "bus \"" + b.id + "\": base_kv must be positive");
        require(bus_idx.emplace(b.id, i).second, ErrorCode::validation,
                "duplicate bus id \"" + b.id + "\"");
    }

    auto slack_it = bus_idx.find(net.slack.bus);
    require(slack_it != bus_idx.end(), ErrorCode::validation,
            "slack bus \"" + net.slack.bus + "\" is not in the bus list");

    // One feeder-level voltage base; a base_kv step without a transformer
    // model would silently mis-scale impedances.
    double slack_kv = net.buses[static_cast<std::size_t>(slack_it->second)].base_kv;
    for (const auto& b : net.buses)
        require(std::abs(b.base_kv - slack_kv) <= 1e-9 * slack_kv, ErrorCode::validation,
                "bus \"" + b.id + "\": base_kv differs from the slack bus (single-base feeders only)");

    double max_slack_v = 0.0;
    for (const auto& v : net.slack.v_pu) {
        require(std::abs(v) > 0.0, ErrorCode::validation, "slack voltage phase with zero magnitude");
        max_slack_v = std::max(max_slack_v, std::abs(v));
    }
    if (net.v_plus_pu)
        require(*net.v_plus_pu > max_slack_v, ErrorCode::validation,
                "v_plus_pu must exceed the largest slack voltage magnitude (hosting capacity would be zero)");

    for (std::size_t i = 0; i < net.branches.size(); ++i) {
        const auto& br = net.branches[i];
        std::string tag = "branch[" + std::to_string(i) + "] " + br.from + "->" + br.to;
        require(bus_idx.count(br.from) != 0, ErrorCode::validation, tag + ": unknown from-bus");
        require(bus_idx.count(br.to) != 0, ErrorCode::validation, tag + ": unknown to-bus");
        require(br.from != br.to, ErrorCode::validation, tag + ": self-loop");
        double scale = br.z_ohm.cwiseAbs().maxCoeff();
        require((br.z_ohm - br.z_ohm.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(scale, 1.0),
                ErrorCode::validation, tag + ": series impedance matrix is not symmetric");
        if (br.y_shunt_s) {
            double yscale = br.y_shunt_s->cwiseAbs().maxCoeff();
            require((*br.y_shunt_s - br.y_shunt_s->transpose()).cwiseAbs().maxCoeff() <=
                        1e-12 * std::max(yscale, 1.0),
                    ErrorCode::validation, tag + ": shunt admittance matrix is not symmetric");
        }
    }

    std::vector<bool> phase_used(net.buses.size() * 3, false);
    for (std::size_t i = 0; i < net.loads.size(); ++i) {
        const auto& ld = net.loads[i];
        std::string tag = "load[" + std::to_string(i) + "] (id " + std::to_string(ld.id) + ")";
        require(ld.id == static_cast<int>(i), ErrorCode::validation,
                tag + ": load ids must be the contiguous sequence 0..N_lds-1 in file order");
        auto it = bus_idx.find(ld.bus);
        require(it != bus_idx.end(), ErrorCode::validation, tag + ": unknown bus \"" + ld.bus + "\"");
        require(ld.bus != net.slack.bus, ErrorCode::validation, tag + ": loads may not sit on the slack bus");
        require(ld.p_kw >= 0.0, ErrorCode::validation, tag + ": p_kw must be nonnegative");
        require(ld.pf >= 0.0 && ld.pf <= 1.0, ErrorCode::validation, tag + ": pf must be in [0, 1]");
        require(!(ld.p_kw > 0.0 && ld.pf == 0.0), ErrorCode::validation,
                tag + ": pf 0 with nonzero p_kw");
        std::size_t slot =
            static_cast<std::size_t>(it->second) * 3 + static_cast<std::size_t>(ld.phase);
        require(!phase_used[slot], ErrorCode::validation,
                tag + ": second load on bus \"" + ld.bus + "\" phase " + phase_letter(ld.phase));
        phase_used[slot] = true;
    }

    // Connectivity: every bus (hence every load bus) reachable from the slack.
    std::vector<std::vector<int>> adj(net.buses.size());
    for (const auto& br : net.branches) {
        int f = bus_idx[br.from], t = bus_idx[br.to];
        adj[static_cast<std::size_t>(f)].push_back(t);
        adj[static_cast<std::size_t>(t)].push_back(f);
    }
    std::vector<bool> seen(net.buses.size(), false);
    std::vector<int> stack{slack_it->second};
    seen[static_cast<std::size_t>(slack_it->second)] = true;
    while (!stack.empty()) {
        int b = stack.back();
        stack.pop_back();
        for (int nb : adj[static_cast<std::size_t>(b)])
            if (!seen[static_cast<std::size_t>(nb)]) {
                seen[static_cast<std::size_t>(nb)] = true;
                stack.push_back(nb);
            }
    }
    for (std::size_t i = 0; i < net.buses.size(); ++i)
        require(seen[i], ErrorCode::validation,
                "bus \"" + net.buses[i].id + "\" is not connected to the slack bus");
}

/// Reads and validates a feeder file.
inline NetworkModel load_feeder(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::io, "cannot open feeder file \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    NetworkModel net = parse_feeder(buf.str(), path);
    validate_network(net);
    return net;
}

// ---------------------------------------------------------------------------
// Admittance assembly
// ---------------------------------------------------------------------------

inline NodeOrdering make_ordering(const NetworkModel& net) {
    NodeOrdering ord;
    ord.n_bus = net.n_bus();
    ord.position.assign(static_cast<std::size_t>(ord.n_bus), -1);
    ord.bus_at.assign(static_cast<std::size_t>(ord.n_bus), -1);
    int slack = net.slack_index();
    ord.position[static_cast<std::size_t>(slack)] = 0;
    ord.bus_at[0] = slack;
    int pos = 1;
    for (int b = 0; b < ord.n_bus; ++b) {
        if (b == slack) continue;
        ord.position[static_cast<std::size_t>(b)] = pos;
        ord.bus_at[static_cast<std::size_t>(pos)] = b;
        ++pos;
    }
    ord.load_node_rows.reserve(net.loads.size());
    for (const auto& ld : net.loads)
        ord.load_node_rows.push_back(ord.l_row(net.bus_index(ld.bus), ld.phase));
    return ord;
}

/// Builds the full admittance matrix from branch primitives (per-unit on the
/// feeder base), partitions it slack-first, and factorizes YLL.
inline PartitionedAdmittance assemble_admittance(const NetworkModel& net) {
    validate_network(net);
    NodeOrdering ord = make_ordering(net);
    const int n = ord.n_rows();
    const double z_base = net.base_impedance_ohm();

    ComplexMatrix y = ComplexMatrix::Zero(n, n);
    for (std::size_t i = 0; i < net.branches.size(); ++i) {
        const auto& br = net.branches[i];
        Mat3c z_pu = br.z_ohm / z_base;
        Eigen::FullPivLU<Mat3c> lu(z_pu);
        require(lu.isInvertible(), ErrorCode::singular,
                "branch[" + std::to_string(i) + "] " + br.from + "->" + br.to +
                    ": singular series impedance matrix");
        Mat3c yb = lu.inverse();
        int rf = ord.full_row(net.bus_index(br.from), Phase::a);
        int rt = ord.full_row(net.bus_index(br.to), Phase::a);
        y.block<3, 3>(rf, rf) += yb;
        y.block<3, 3>(rt, rt) += yb;
        y.block<3, 3>(rf, rt) -= yb;
        y.block<3, 3>(rt, rf) -= yb;
        if (br.y_shunt_s) {
            Mat3c ysh = (*br.y_shunt_s * z_base) / 2.0;
            y.block<3, 3>(rf, rf) += ysh;
            y.block<3, 3>(rt, rt) += ysh;
        }
    }

    PartitionedAdmittance adm;
    adm.ordering = std::move(ord);
    const int nl = n - 3;
    adm.y00 = y.topLeftCorner(3, 3);
    adm.y0l = y.topRightCorner(3, nl);
    adm.yl0 = y.bottomLeftCorner(nl, 3);
    adm.yll = y.bottomRightCorner(nl, nl);

    Eigen::FullPivLU<ComplexMatrix> rank_check(adm.yll);
    require(rank_check.isInvertible(), ErrorCode::singular,
            "YLL is singular (network disconnected or degenerate branch data)");
    adm.yll_lu.compute(adm.yll);
    return adm;
}

/// Net complex power injections at the L-block nodes from the feeder's nominal
/// loads (consumption enters with a negative sign), pu.
inline ComplexVector base_injections(const NetworkModel& net, const NodeOrdering& ord) {
    ComplexVector s = ComplexVector::Zero(ord.n_l_rows());
    for (std::size_t i = 0; i < net.loads.size(); ++i)
        s[ord.load_node_rows[i]] -= net.load_s_pu(net.loads[i]);
    return s;
}

} // namespace gridhc

#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace bbmnet::cli {

ConfigError::ConfigError(std::string field, int line, const std::string& message)
    : std::invalid_argument(line > 0 ? fmt::format("config error at line {} ({}): {}", line, field, message)
                                     : fmt::format("config error ({}): {}", field, message)),
      field_(std::move(field)),
      line_(line) {}

std::string_view to_string(Scheme scheme) noexcept {
    switch (scheme) {
        case Scheme::Rk4: return "rk4";
        case Scheme::ImplicitMidpoint: return "midpoint";
        case Scheme::Picard: return "picard";
    }
    return "?";
}

namespace {

int line_of(const YAML::Node& node) { return node.IsDefined() ? node.Mark().line + 1 : 0; }

// Accepts a plain number, "pi", "<number>*pi" or "sqrt(<number>)".
std::optional<double> parse_length_expression(std::string text) {
    text.erase(std::remove_if(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); }),
               text.end());
    auto parse_number = [](const std::string& s) -> std::optional<double> {
        if (s.empty()) return std::nullopt;
        std::size_t used = 0;
        try {
            const double v = std::stod(s, &used);
            if (used != s.size()) return std::nullopt;
            return v;
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };
    if (text == "pi") return std::numbers::pi;
    if (text.size() > 3 && text.ends_with("*pi")) {
        if (auto v = parse_number(text.substr(0, text.size() - 3))) return *v * std::numbers::pi;
        return std::nullopt;
    }
    if (text.starts_with("sqrt(") && text.ends_with(")")) {
        if (auto v = parse_number(text.substr(5, text.size() - 6)); v && *v >= 0.0) return std::sqrt(*v);
        return std::nullopt;
    }
    return parse_number(text);
}

class Block {
public:
    Block(const YAML::Node& node, std::string name, std::initializer_list<std::string_view> allowed)
        : node_(node), name_(std::move(name)) {
        if (!node_.IsMap()) throw ConfigError(name_, line_of(node_), "expected a block of key: value pairs");
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
                throw ConfigError(field(key), line_of(kv.first), "unknown key");
            }
        }
    }

    [[nodiscard]] std::string field(std::string_view key) const { return name_ + "." + std::string(key); }
    [[nodiscard]] bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }
    [[nodiscard]] YAML::Node node(const std::string& key) const { return node_[key]; }
    [[nodiscard]] int line(const std::string& key) const { return line_of(node_[key]); }

    template <class T>
    [[nodiscard]] T get(const std::string& key) const {
        const YAML::Node n = node_[key];
        if (!n) throw ConfigError(field(key), line_of(node_), "required field is missing");
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(field(key), line_of(n), "cannot convert value '" + scalar(n) + "'");
        }
    }

    template <class T>
    [[nodiscard]] T get(const std::string& key, T fallback) const {
        return has(key) ? get<T>(key) : fallback;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        throw ConfigError(field(key), has(key) ? line(key) : line_of(node_), message);
    }

private:
    static std::string scalar(const YAML::Node& n) { return n.IsScalar() ? n.Scalar() : "<non-scalar>"; }

    YAML::Node node_;
    std::string name_;
};

void require(bool ok, const Block& b, const std::string& key, const std::string& message) {
    if (!ok) b.fail(key, message);
}

NetworkBlock parse_network(const YAML::Node& n) {
    const Block b(n, "network", {"lengths", "alpha", "conservative"});
    NetworkBlock out;
    const YAML::Node lengths = b.node("lengths");
    if (!lengths) b.fail("lengths", "required field is missing");
    if (!lengths.IsSequence()) b.fail("lengths", "expected a list of edge lengths");
    for (const auto& item : lengths) {
        const auto text = item.as<std::string>();
        const auto value = parse_length_expression(text);
        if (!value) throw ConfigError("network.lengths", line_of(item), "cannot parse length '" + text + "'");
        if (!(*value > 0.0) || !std::isfinite(*value)) {
            throw ConfigError("network.lengths", line_of(item), "edge lengths must be positive");
        }
        out.length_text.push_back(text);
        out.lengths.push_back(*value);
    }
    require(out.lengths.size() >= 2, b, "lengths", "at least two edges are required");
    out.alpha = b.get<double>("alpha");
    out.conservative = b.get<bool>("conservative", false);
    const double half_n = 0.5 * static_cast<double>(out.lengths.size());
    if (out.conservative) {
        require(out.alpha == half_n, b, "alpha", fmt::format("conservative networks need alpha = N/2 = {}", half_n));
    } else {
        require(out.alpha > half_n, b, "alpha", fmt::format("damping requires alpha > N/2 = {}", half_n));
    }
    return out;
}

MeshBlock parse_mesh(const YAML::Node& n, std::size_t edges) {
    const Block b(n, "mesh", {"h", "cells_per_edge"});
    MeshBlock out;
    require(b.has("h") != b.has("cells_per_edge"), b, "h", "give exactly one of 'h' or 'cells_per_edge'");
    if (b.has("h")) {
        out.h = b.get<double>("h");
        require(*out.h > 0.0, b, "h", "spacing must be positive");
        return out;
    }
    const YAML::Node cells = b.node("cells_per_edge");
    if (cells.IsSequence()) {
        out.cells_per_edge = b.get<std::vector<int>>("cells_per_edge");
        require(out.cells_per_edge.size() == edges, b, "cells_per_edge", "need one cell count per edge");
    } else {
        out.cells_per_edge = {b.get<int>("cells_per_edge")};
    }
    for (int m : out.cells_per_edge) require(m >= 2, b, "cells_per_edge", "cell counts must be >= 2");
    return out;
}

TimeBlock parse_time(const YAML::Node& n) {
    const Block b(n, "time",
                  {"scheme", "dt", "t_end", "linear", "limit_system", "inner_tolerance", "inner_max_iterations",
                   "picard"});
    TimeBlock out;
    const auto scheme = b.get<std::string>("scheme", "midpoint");
    if (scheme == "rk4") {
        out.scheme = Scheme::Rk4;
    } else if (scheme == "midpoint" || scheme == "implicit-midpoint") {
        out.scheme = Scheme::ImplicitMidpoint;
    } else if (scheme == "picard") {
        out.scheme = Scheme::Picard;
    } else {
        b.fail("scheme", "unknown scheme '" + scheme + "' (expected rk4, midpoint or picard)");
    }
    out.dt = b.get<double>("dt");
    out.t_end = b.get<double>("t_end");
    require(out.dt > 0.0, b, "dt", "time step must be positive");
    require(out.t_end >= out.dt, b, "t_end", "final time must be >= dt");
    out.linear = b.get<bool>("linear", true);
    out.limit_system = b.get<bool>("limit_system", false);
    out.midpoint.tolerance = b.get<double>("inner_tolerance", out.midpoint.tolerance);
    out.midpoint.max_iterations = b.get<int>("inner_max_iterations", out.midpoint.max_iterations);
    require(out.midpoint.tolerance > 0.0, b, "inner_tolerance", "must be positive");
    require(out.midpoint.max_iterations >= 1, b, "inner_max_iterations", "must be >= 1");
    if (b.has("picard")) {
        const Block p(b.node("picard"), "time.picard", {"tolerance", "max_iterations", "window", "max_retries"});
        out.picard.tolerance = p.get<double>("tolerance", out.picard.tolerance);
        out.picard.max_iterations = p.get<int>("max_iterations", out.picard.max_iterations);
        out.picard.window = p.get<double>("window", out.picard.window);
        out.picard.max_retries = p.get<int>("max_retries", out.picard.max_retries);
        require(out.picard.tolerance > 0.0, p, "tolerance", "must be positive");
        require(out.picard.max_iterations >= 1, p, "max_iterations", "must be >= 1");
        require(out.picard.window > 0.0, p, "window", "must be positive");
        require(out.picard.max_retries >= 0, p, "max_retries", "must be >= 0");
    }
    return out;
}

InitialBlock parse_initial(const YAML::Node& n, const NetworkBlock& net) {
    const Block b(n, "initial", {"preset", "edge", "center", "width", "amplitude", "mode"});
    InitialBlock out;
    out.preset = b.get<std::string>("preset", "zero");
    if (std::find(std::begin(kPresets), std::end(kPresets), out.preset) == std::end(kPresets)) {
        b.fail("preset", "unknown preset '" + out.preset + "' (expected zero, gaussian, eigenmode or random)");
    }
    out.edge = b.get<int>("edge", 1);
    require(out.edge >= 1 && static_cast<std::size_t>(out.edge) <= net.lengths.size(), b, "edge",
            "edge must be between 1 and N");
    if (b.has("center")) {
        out.center = b.get<double>("center");
        const double l = net.lengths[static_cast<std::size_t>(out.edge - 1)];
        require(*out.center >= 0.0 && *out.center <= l, b, "center", "center must lie on the edge");
    }
    if (b.has("width")) {
        out.width = b.get<double>("width");
        require(*out.width > 0.0, b, "width", "width must be positive");
    }
    out.amplitude = b.get<double>("amplitude", 1.0);
    out.mode = b.get<int>("mode", 1);
    require(out.mode >= 1, b, "mode", "mode index is 1-based");
    return out;
}

OutputBlock parse_output(const YAML::Node& n) {
    const Block b(n, "output", {"directory", "snapshot_stride"});
    OutputBlock out;
    out.directory = b.get<std::string>("directory", out.directory);
    out.snapshot_stride = b.get<int>("snapshot_stride", 0);
    require(out.snapshot_stride >= 0, b, "snapshot_stride", "must be >= 0");
    return out;
}

SpectralBlock parse_spectral(const YAML::Node& n) {
    const Block b(n, "spectral", {"q_max", "tolerance", "m_max", "delta", "points_per_wavelength"});
    SpectralBlock out;
    out.q_max = b.get<long long>("q_max", out.q_max);
    out.tolerance = b.get<double>("tolerance", out.tolerance);
    out.m_max = b.get<int>("m_max", out.m_max);
    out.delta = b.get<double>("delta", out.delta);
    out.points_per_wavelength = b.get<double>("points_per_wavelength", out.points_per_wavelength);
    require(out.q_max >= 1, b, "q_max", "denominator bound must be >= 1");
    require(out.tolerance > 0.0, b, "tolerance", "must be positive");
    require(out.m_max >= 1, b, "m_max", "must be >= 1");
    require(out.delta > 0.0 && out.delta < 0.5, b, "delta", "must lie in (0, 1/2)");
    require(out.points_per_wavelength >= 2.0, b, "points_per_wavelength", "must be >= 2");
    return out;
}

ConvergenceBlock parse_convergence(const YAML::Node& n) {
    const Block b(n, "convergence", {"study", "levels", "base_cells", "dt", "t_end"});
    ConvergenceBlock out;
    out.study = b.get<std::string>("study", out.study);
    require(out.study == "elliptic" || out.study == "rk4" || out.study == "midpoint", b, "study",
            "unknown study '" + out.study + "' (expected elliptic, rk4 or midpoint)");
    out.levels = b.get<int>("levels", out.levels);
    require(out.levels >= 3, b, "levels", "need >= 3 refinement levels");
    out.base_cells = b.get<int>("base_cells", out.base_cells);
    require(out.base_cells >= 2, b, "base_cells", "must be >= 2");
    out.dt = b.get<double>("dt", out.dt);
    out.t_end = b.get<double>("t_end", out.t_end);
    require(out.dt > 0.0, b, "dt", "must be positive");
    require(out.t_end >= out.dt, b, "t_end", "must be >= dt");
    return out;
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ConfigError("<document>", e.mark.line + 1, e.msg);
    }
    if (!root.IsMap()) throw ConfigError("<document>", line_of(root), "expected top-level blocks");
    static constexpr std::string_view blocks[] = {"network", "mesh",     "time",        "initial",
                                                  "output",  "spectral", "convergence", "seed"};
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (std::find(std::begin(blocks), std::end(blocks), key) == std::end(blocks)) {
            throw ConfigError(key, line_of(kv.first), "unknown block");
        }
    }
    if (!root["network"]) throw ConfigError("network", 0, "required block is missing");

    ScenarioConfig cfg;
    cfg.network = parse_network(root["network"]);
    if (root["mesh"]) cfg.mesh = parse_mesh(root["mesh"], cfg.network.lengths.size());
    if (root["time"]) cfg.time = parse_time(root["time"]);
    if (root["initial"]) cfg.initial = parse_initial(root["initial"], cfg.network);
    if (root["output"]) cfg.output = parse_output(root["output"]);
    if (root["spectral"]) cfg.spectral = parse_spectral(root["spectral"]);
    if (root["convergence"]) cfg.convergence = parse_convergence(root["convergence"]);
    if (const YAML::Node seed = root["seed"]) {
        try {
            cfg.seed = seed.as<std::uint64_t>();
        } catch (const YAML::Exception&) {
            throw ConfigError("seed", line_of(seed), "expected a non-negative integer");
        }
    }
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", 0, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

StarNetwork make_network(const ScenarioConfig& config) {
    if (config.network.conservative) return StarNetwork::conservative(config.network.lengths);
    return StarNetwork(config.network.lengths, config.network.alpha);
}

MeshPtr make_mesh(const ScenarioConfig& config) {
    if (!config.mesh) throw ConfigError("mesh", 0, "required block is missing");
    const StarNetwork net = make_network(config);
    if (config.mesh->h) return build_mesh(net, Spacing{*config.mesh->h});
    const auto& cells = config.mesh->cells_per_edge;
    if (cells.size() == 1) return build_mesh(net, cells.front());
    return build_mesh(net, CellCounts(cells));
}

SimulationConfig make_simulation_config(const ScenarioConfig& config) {
    if (!config.time) throw ConfigError("time", 0, "required block is missing");
    const TimeBlock& t = *config.time;
    SimulationConfig out;
    out.scheme = t.scheme;
    out.dt = t.dt;
    out.t_end = t.t_end;
    out.model = t.linear ? Model::Linear : Model::Nonlinear;
    out.limit_system = t.limit_system;
    out.midpoint = t.midpoint;
    out.picard = t.picard;
    out.snapshot_stride = config.output.snapshot_stride;
    return out;
}

RationalSearch make_rational_search(const ScenarioConfig& config) {
    return {config.spectral.q_max, config.spectral.tolerance};
}

std::string resolved_config_yaml(const ScenarioConfig& c) {
    YAML::Emitter e;
    e.SetDoublePrecision(17);
    e << YAML::BeginMap;
    e << YAML::Key << "network" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "lengths" << YAML::Value << YAML::Flow << c.network.length_text;
    e << YAML::Key << "alpha" << YAML::Value << c.network.alpha;
    e << YAML::Key << "conservative" << YAML::Value << c.network.conservative;
    e << YAML::EndMap;
    if (c.mesh) {
        e << YAML::Key << "mesh" << YAML::Value << YAML::BeginMap;
        if (c.mesh->h) {
            e << YAML::Key << "h" << YAML::Value << *c.mesh->h;
        } else if (c.mesh->cells_per_edge.size() == 1) {
            e << YAML::Key << "cells_per_edge" << YAML::Value << c.mesh->cells_per_edge.front();
        } else {
            e << YAML::Key << "cells_per_edge" << YAML::Value << YAML::Flow << c.mesh->cells_per_edge;
        }
        e << YAML::EndMap;
    }
    if (c.time) {
        const TimeBlock& t = *c.time;
        e << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "scheme" << YAML::Value << std::string(to_string(t.scheme));
        e << YAML::Key << "dt" << YAML::Value << t.dt;
        e << YAML::Key << "t_end" << YAML::Value << t.t_end;
        e << YAML::Key << "linear" << YAML::Value << t.linear;
        e << YAML::Key << "limit_system" << YAML::Value << t.limit_system;
        e << YAML::Key << "inner_tolerance" << YAML::Value << t.midpoint.tolerance;
        e << YAML::Key << "inner_max_iterations" << YAML::Value << t.midpoint.max_iterations;
        e << YAML::Key << "picard" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "tolerance" << YAML::Value << t.picard.tolerance;
        e << YAML::Key << "max_iterations" << YAML::Value << t.picard.max_iterations;
        e << YAML::Key << "window" << YAML::Value << t.picard.window;
        e << YAML::Key << "max_retries" << YAML::Value << t.picard.max_retries;
        e << YAML::EndMap << YAML::EndMap;
    }
    e << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "preset" << YAML::Value << c.initial.preset;
    e << YAML::Key << "edge" << YAML::Value << c.initial.edge;
    if (c.initial.center) e << YAML::Key << "center" << YAML::Value << *c.initial.center;
    if (c.initial.width) e << YAML::Key << "width" << YAML::Value << *c.initial.width;
    e << YAML::Key << "amplitude" << YAML::Value << c.initial.amplitude;
    e << YAML::Key << "mode" << YAML::Value << c.initial.mode;
    e << YAML::EndMap;
    e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "directory" << YAML::Value << c.output.directory;
    e << YAML::Key << "snapshot_stride" << YAML::Value << c.output.snapshot_stride;
    e << YAML::EndMap;
    e << YAML::Key << "spectral" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "q_max" << YAML::Value << c.spectral.q_max;
    e << YAML::Key << "tolerance" << YAML::Value << c.spectral.tolerance;
    e << YAML::Key << "m_max" << YAML::Value << c.spectral.m_max;
    e << YAML::Key << "delta" << YAML::Value << c.spectral.delta;
    e << YAML::Key << "points_per_wavelength" << YAML::Value << c.spectral.points_per_wavelength;
    e << YAML::EndMap;
    e << YAML::Key << "convergence" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "study" << YAML::Value << c.convergence.study;
    e << YAML::Key << "levels" << YAML::Value << c.convergence.levels;
    e << YAML::Key << "base_cells" << YAML::Value << c.convergence.base_cells;
    e << YAML::Key << "dt" << YAML::Value << c.convergence.dt;
    e << YAML::Key << "t_end" << YAML::Value << c.convergence.t_end;
    e << YAML::EndMap;
    e << YAML::Key << "seed" << YAML::Value << c.seed;
    e << YAML::EndMap;
    return e.c_str();
}

}  // namespace bbmnet::cli

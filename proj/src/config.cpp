#include "bohm/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace bohm {

const char* to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::single_run: return "single_run";
        case ExperimentKind::scan: return "scan";
        case ExperimentKind::n_sweep: return "n_sweep";
        case ExperimentKind::baseline: return "baseline";
        case ExperimentKind::two_detector_suite: return "two_detector_suite";
    }
    return "unknown";
}

namespace {

const std::set<std::string, std::less<>> kKnownKeys{
    "experiment",        "half_width",       "dx",
    "dt",                "mass",             "pointer_mass",
    "coupling",          "dof_count",        "detector_half_width",
    "detector_centers",  "detector_centers_lattice", "detector_array",
    "r0",                "r0_lattice",       "collapse_threshold",
    "max_steps",         "record_every",     "density_every",
    "short_circuit_stationary", "restoring_stiffness", "window_outside_value",
    "window_edges",      "node_epsilon",     "n_values",
    "scan_nodes",        "sampling_count",   "seed",
    "suite_pairs",       "output_directory", "csv_precision",
    "threads",
};

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

struct Entry {
    std::string value;
    std::size_t line;
};

class Document {
public:
    explicit Document(std::string_view text) {
        std::size_t line_no = 0;
        std::size_t start = 0;
        while (start <= text.size()) {
            const auto end = text.find('\n', start);
            std::string_view line = text.substr(start, end == std::string_view::npos ? end : end - start);
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
            line = trim(line);
            if (!line.empty()) {
                const auto eq = line.find('=');
                if (eq == std::string_view::npos) throw ConfigError(line_no, "expected 'key = value'");
                const std::string key(trim(line.substr(0, eq)));
                const std::string_view value = trim(line.substr(eq + 1));
                if (key.empty()) throw ConfigError(line_no, "missing key before '='");
                if (!kKnownKeys.contains(key)) throw ConfigError(line_no, "unknown key '" + key + "'");
                if (value.empty()) throw ConfigError(line_no, "missing value for '" + key + "'");
                if (entries_.contains(key)) throw ConfigError(line_no, "duplicate key '" + key + "'");
                entries_.emplace(key, Entry{std::string(value), line_no});
            }
            if (end == std::string_view::npos) break;
            start = end + 1;
        }
    }

    bool has(const std::string& key) const { return entries_.contains(key); }
    std::size_t line(const std::string& key) const { return has(key) ? entries_.at(key).line : 0; }

    double real(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        return parse_real(entries_.at(key).value, key);
    }

    std::int64_t integer(const std::string& key, std::int64_t fallback) const {
        if (!has(key)) return fallback;
        return parse_integer(entries_.at(key).value, key);
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string& v = entries_.at(key).value;
        if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "off" || v == "no" || v == "0") return false;
        throw ConfigError(line(key), "'" + key + "' expects true or false, got '" + v + "'");
    }

    std::string text(const std::string& key, std::string fallback) const {
        return has(key) ? entries_.at(key).value : std::move(fallback);
    }

    std::vector<double> reals(const std::string& key) const {
        std::vector<double> out;
        for (auto part : split(entries_.at(key).value, ',')) out.push_back(parse_real(part, key));
        return out;
    }

    std::vector<std::int64_t> integers(const std::string& key) const {
        std::vector<std::int64_t> out;
        for (auto part : split(entries_.at(key).value, ',')) out.push_back(parse_integer(part, key));
        return out;
    }

    double parse_real(std::string_view s, const std::string& key) const {
        double v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
            throw ConfigError(line(key), "'" + key + "' expects a number, got '" + std::string(s) + "'");
        }
        return v;
    }

    std::int64_t parse_integer(std::string_view s, const std::string& key) const {
        std::int64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            throw ConfigError(line(key), "'" + key + "' expects an integer, got '" + std::string(s) + "'");
        }
        return v;
    }

private:
    std::map<std::string, Entry, std::less<>> entries_;
};

ExperimentKind parse_kind(const Document& doc) {
    const std::string v = doc.text("experiment", "single_run");
    for (auto k : {ExperimentKind::single_run, ExperimentKind::scan, ExperimentKind::n_sweep,
                   ExperimentKind::baseline, ExperimentKind::two_detector_suite}) {
        if (v == to_string(k)) return k;
    }
    throw ConfigError(doc.line("experiment"), "unknown experiment '" + v + "'");
}

void require(bool ok, const Document& doc, const std::string& key, const std::string& message) {
    if (!ok) throw ConfigError(doc.line(key), "'" + key + "' " + message);
}

}  // namespace

ExperimentSpec parse_config(std::string_view text) {
    const Document doc(text);
    ExperimentSpec spec;
    spec.kind = parse_kind(doc);
    auto& sim = spec.sim;

    const double half_width = doc.real("half_width", 10.0);
    require(half_width > 0, doc, "half_width", "must be positive");
    const double dx = doc.real("dx", 0.1);
    require(dx > 0, doc, "dx", "must be positive");
    const double intervals = 2.0 * half_width / dx;
    require(std::abs(intervals - std::round(intervals)) < 1e-9 * intervals, doc, "dx",
            "must divide 2 * half_width into a whole number of intervals");
    sim.half_width = half_width;
    sim.interior_nodes = static_cast<Index>(std::llround(intervals)) - 1;
    require(sim.interior_nodes >= 3, doc, "dx", "leaves fewer than 3 interior nodes");
    const Grid<double> grid = sim.grid();
    const double spacing = grid.spacing();

    sim.dt = doc.real("dt", spacing * spacing / 4.0);
    require(sim.dt > 0, doc, "dt", "must be positive");
    sim.mass = doc.real("mass", 1.0);
    require(sim.mass > 0, doc, "mass", "must be positive");

    Detector<double> proto;
    proto.pointer_mass = doc.real("pointer_mass", 1.0);
    require(proto.pointer_mass > 0, doc, "pointer_mass", "must be positive");
    proto.coupling = doc.real("coupling", 0.01);
    const auto dof = doc.integer("dof_count", 1);
    require(dof >= 1 && dof <= 1'000'000, doc, "dof_count", "must be a positive integer");
    proto.dof_count = static_cast<int>(dof);
    proto.half_width = doc.real("detector_half_width", 1.0);
    require(proto.half_width > 0, doc, "detector_half_width", "must be positive");
    proto.restoring.stiffness = doc.real("restoring_stiffness", 0.0);
    require(proto.restoring.stiffness >= 0, doc, "restoring_stiffness", "must be non-negative");
    proto.outside_value = doc.real("window_outside_value", 0.0);
    require(proto.outside_value == 0.0 || proto.outside_value == -1.0, doc, "window_outside_value",
            "must be 0 or -1");
    const std::string edges = doc.text("window_edges", "midpoint");
    require(edges == "midpoint" || edges == "half_open", doc, "window_edges", "must be midpoint or half_open");
    proto.edges = edges == "midpoint" ? EdgeConvention::midpoint : EdgeConvention::half_open;

    const int layouts = int(doc.has("detector_centers")) + int(doc.has("detector_centers_lattice")) +
                        int(doc.has("detector_array"));
    if (layouts > 1) {
        throw ConfigError(std::max({doc.line("detector_array"), doc.line("detector_centers"),
                                    doc.line("detector_centers_lattice")}),
                          "give only one of detector_centers, detector_centers_lattice, detector_array");
    }
    std::vector<double> centers{5.0};
    if (doc.has("detector_centers")) centers = doc.reals("detector_centers");
    if (doc.has("detector_centers_lattice")) {
        centers.clear();
        for (auto k : doc.integers("detector_centers_lattice")) centers.push_back(LatticeCoordinate{k}.to_length(grid));
    }
    try {
        if (doc.has("detector_array")) {
            const auto count = doc.integer("detector_array", 10);
            require(count >= 1 && count <= grid.size(), doc, "detector_array", "must be between 1 and the node count");
            sim.detectors = partition_array(half_width, static_cast<int>(count), proto);
        } else {
            std::vector<Detector<double>> dets;
            for (double c : centers) {
                Detector<double> det = proto;
                det.center = c;
                dets.push_back(det);
            }
            sim.detectors = DetectorArray<double>(std::move(dets));
        }
    } catch (const std::invalid_argument& e) {
        const std::size_t line = std::max({doc.line("detector_centers"), doc.line("detector_centers_lattice"),
                                           doc.line("detector_array")});
        throw ConfigError(line, e.what());
    }

    require(!(doc.has("r0") && doc.has("r0_lattice")), doc, "r0_lattice", "conflicts with 'r0'");
    sim.r0 = doc.real("r0", 5.5);
    if (doc.has("r0_lattice")) sim.r0 = LatticeCoordinate{doc.integer("r0_lattice", 0)}.to_length(grid);
    require(std::abs(sim.r0) <= half_width, doc, doc.has("r0_lattice") ? "r0_lattice" : "r0",
            "must lie inside [-half_width, half_width]");

    sim.collapse_threshold = doc.real("collapse_threshold", 0.95);
    require(sim.collapse_threshold > 0 && sim.collapse_threshold <= 1, doc, "collapse_threshold",
            "must lie in (0, 1]");
    sim.max_steps = doc.integer("max_steps", 2'000'000);
    require(sim.max_steps >= 1, doc, "max_steps", "must be >= 1");
    sim.record_every = doc.integer("record_every", 1000);
    require(sim.record_every >= 0, doc, "record_every", "must be >= 0");
    sim.density_every = doc.integer("density_every", 0);
    require(sim.density_every >= 0, doc, "density_every", "must be >= 0");
    sim.short_circuit_stationary = doc.boolean("short_circuit_stationary", true);
    sim.node_epsilon = doc.real("node_epsilon", kDefaultNodeEpsilon);
    require(sim.node_epsilon >= 0, doc, "node_epsilon", "must be non-negative");

    if (doc.has("n_values")) {
        spec.n_values.clear();
        for (auto n : doc.integers("n_values")) {
            require(n >= 1 && n <= 1'000'000, doc, "n_values", "entries must be positive integers");
            spec.n_values.push_back(static_cast<int>(n));
        }
    }
    if (doc.has("scan_nodes") && doc.text("scan_nodes", "") != "all") {
        for (auto j : doc.integers("scan_nodes")) {
            require(j >= 0 && j < grid.size(), doc, "scan_nodes", "entries must be interior node indices");
            spec.scan_nodes.push_back(static_cast<Index>(j));
        }
    }
    const auto samples = doc.integer("sampling_count", 0);
    require(samples >= 0, doc, "sampling_count", "must be >= 0");
    spec.sampling_count = static_cast<std::size_t>(samples);
    const auto seed = doc.integer("seed", 0);
    require(seed >= 0, doc, "seed", "must be >= 0");
    spec.seed = static_cast<std::uint64_t>(seed);

    if (doc.has("suite_pairs")) {
        spec.suite_pairs.clear();
        const std::string pairs = doc.text("suite_pairs", "");
        for (auto pair : split(pairs, ';')) {
            const auto parts = split(pair, ':');
            require(parts.size() == 2, doc, "suite_pairs", "expects 'left:right; left:right; ...'");
            const double a = doc.parse_real(parts[0], "suite_pairs");
            const double b = doc.parse_real(parts[1], "suite_pairs");
            require(a < b, doc, "suite_pairs", "needs the left center below the right center");
            spec.suite_pairs.emplace_back(a, b);
        }
    }

    spec.output_directory = doc.text("output_directory", ".");
    const auto precision = doc.integer("csv_precision", 12);
    require(precision >= 1 && precision <= 17, doc, "csv_precision", "must be between 1 and 17");
    spec.csv_precision = static_cast<int>(precision);
    const auto threads = doc.integer("threads", 1);
    require(threads >= 1 && threads <= 1024, doc, "threads", "must be between 1 and 1024");
    spec.threads = static_cast<unsigned>(threads);

    try {
        sim.validate();
    } catch (const std::exception& e) {
        throw ConfigError(0, e.what());
    }
    return spec;
}

ExperimentSpec load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace bohm

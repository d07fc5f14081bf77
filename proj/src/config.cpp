#include "pilotwave/config.hpp"

#include "pilotwave/errors.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace pilotwave {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& path, const std::string& text) {
    const std::string t = trim(text);
    double value = 0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || t.empty())
        throw bad_value_error(path, "expected a number, got \"" + text + "\"");
    return value;
}

std::uint64_t parse_u64(const std::string& path, const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t value = 0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || t.empty())
        throw bad_value_error(path, "expected a non-negative integer, got \"" + text + "\"");
    return value;
}

/// Holds every key=value from the file; the schema consumes the keys it
/// recognizes and finish() flags whatever is left over.
class KeyBag {
public:
    void insert(const std::string& path, const std::string& value) {
        if (!values_.emplace(path, value).second)
            throw bad_value_error(path, "key appears more than once");
    }

    const std::string* find(const std::string& path) {
        auto it = values_.find(path);
        if (it == values_.end())
            return nullptr;
        consumed_.insert(path);
        return &it->second;
    }

    std::string require(const std::string& path) {
        const std::string* v = find(path);
        if (v == nullptr)
            throw missing_key_error(path);
        return *v;
    }

    bool has(const std::string& path) const { return values_.count(path) != 0; }

    void finish() const {
        for (const auto& [path, value] : values_)
            if (consumed_.count(path) == 0)
                throw unknown_key_error(path);
    }

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
};

void take_double(KeyBag& bag, const std::string& path, double& out) {
    if (const std::string* v = bag.find(path))
        out = parse_double(path, *v);
}

void take_u64(KeyBag& bag, const std::string& path, std::uint64_t& out) {
    if (const std::string* v = bag.find(path))
        out = parse_u64(path, *v);
}

void take_size(KeyBag& bag, const std::string& path, std::size_t& out) {
    if (const std::string* v = bag.find(path))
        out = static_cast<std::size_t>(parse_u64(path, *v));
}

} // namespace

std::string to_string(ExperimentName name) {
    switch (name) {
    case ExperimentName::equivariance: return "equivariance";
    case ExperimentName::coincidence: return "coincidence";
    case ExperimentName::constrained: return "constrained";
    case ExperimentName::ghose_pstar: return "ghose_pstar";
    case ExperimentName::spread: return "spread";
    case ExperimentName::ergodicity_toy: return "ergodicity_toy";
    case ExperimentName::eq44: return "eq44";
    }
    throw bad_value_error("experiment.name", "unhandled enum value");
}

ExperimentName experiment_from_string(const std::string& s) {
    for (ExperimentName name : {ExperimentName::equivariance, ExperimentName::coincidence,
                                ExperimentName::constrained, ExperimentName::ghose_pstar,
                                ExperimentName::spread, ExperimentName::ergodicity_toy,
                                ExperimentName::eq44}) {
        if (to_string(name) == s)
            return name;
    }
    throw bad_value_error("experiment.name", "unknown experiment \"" + s + "\"");
}

void ToyConfig::validate() const {
    if (n_systems < 1)
        throw bad_value_error("ergodicity.n_systems", "must be at least 1");
    if (n_modes < 2)
        throw bad_value_error("ergodicity.n_modes", "need at least two modes to beat");
    if (!(min_gap > 0) || !(min_gap < 1.0 / static_cast<double>(n_modes)))
        throw bad_value_error("ergodicity.min_gap",
                              "must lie in (0, 1/n_modes) so gapped spectra exist");
}

void ExperimentSpec::validate() const {
    const bool evolves = name == ExperimentName::equivariance ||
                         name == ExperimentName::coincidence ||
                         name == ExperimentName::constrained ||
                         name == ExperimentName::ghose_pstar;
    const bool samples = evolves || name == ExperimentName::spread;

    if (name != ExperimentName::ergodicity_toy)
        params.validate();
    if (samples) {
        ensemble.validate();
        const bool wants_antidiagonal = name == ExperimentName::constrained ||
                                        name == ExperimentName::ghose_pstar;
        const InitialConstraint required = wants_antidiagonal
                                               ? InitialConstraint::antidiagonal
                                               : InitialConstraint::equilibrium;
        if (ensemble.constraint != required)
            throw bad_value_error("ensemble.constraint",
                                  "experiment " + to_string(name) + " requires " +
                                      (wants_antidiagonal ? std::string("antidiagonal")
                                                          : std::string("equilibrium")) +
                                      " preparation");
    }
    if (evolves)
        integrator.validate();
    if (has_windows) {
        if (name != ExperimentName::coincidence && name != ExperimentName::constrained)
            throw bad_value_error("windows", "experiment " + to_string(name) +
                                                 " takes no detector windows");
        w1.validate();
        w2.validate();
    }
    if (name == ExperimentName::ergodicity_toy)
        toy.validate();
    if (n_trajectory_dump > 0 && !evolves)
        throw bad_value_error("output.n_trajectory_dump",
                              "experiment " + to_string(name) + " integrates no trajectories");
}

ExperimentSpec parse_config(const std::string& text) {
    KeyBag bag;
    std::string section;
    std::istringstream lines(text);
    std::string raw;
    while (std::getline(lines, raw)) {
        std::size_t cut = raw.find_first_of("#;");
        std::string line = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw bad_value_error(line, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw bad_value_error(line, "empty section name");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw bad_value_error(line, "expected key=value or [section]");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw bad_value_error(line, "empty key");
        bag.insert(section.empty() ? key : section + "." + key, value);
    }

    ExperimentSpec spec;
    spec.name = experiment_from_string(bag.require("experiment.name"));

    const bool evolves = spec.name == ExperimentName::equivariance ||
                         spec.name == ExperimentName::coincidence ||
                         spec.name == ExperimentName::constrained ||
                         spec.name == ExperimentName::ghose_pstar;
    const bool samples = evolves || spec.name == ExperimentName::spread;
    const bool windowed = spec.name == ExperimentName::coincidence ||
                          spec.name == ExperimentName::constrained;

    if (spec.name != ExperimentName::ergodicity_toy) {
        take_double(bag, "params.hbar", spec.params.hbar);
        take_double(bag, "params.m", spec.params.m);
        take_double(bag, "params.sigma0", spec.params.sigma0);
        take_double(bag, "params.Y", spec.params.Y);
        take_double(bag, "params.ky", spec.params.ky);
        take_double(bag, "params.t0", spec.params.t0);
        // The transverse geometry is one-dimensional; a forward wavenumber in
        // the config is accepted as run metadata but plays no dynamical role.
        if (const std::string* v = bag.find("params.kx"))
            parse_double("params.kx", *v);
    }

    if (samples) {
        take_size(bag, "ensemble.n_pairs", spec.ensemble.n_pairs);
        take_u64(bag, "ensemble.master_seed", spec.ensemble.master_seed);
        const bool wants_antidiagonal = spec.name == ExperimentName::constrained ||
                                        spec.name == ExperimentName::ghose_pstar;
        spec.ensemble.constraint = wants_antidiagonal ? InitialConstraint::antidiagonal
                                                      : InitialConstraint::equilibrium;
        if (const std::string* v = bag.find("ensemble.constraint")) {
            if (*v == "equilibrium")
                spec.ensemble.constraint = InitialConstraint::equilibrium;
            else if (*v == "antidiagonal")
                spec.ensemble.constraint = InitialConstraint::antidiagonal;
            else
                throw bad_value_error("ensemble.constraint",
                                      "expected equilibrium or antidiagonal, got \"" + *v + "\"");
        }
    }

    if (evolves) {
        take_double(bag, "integrator.rel_tol", spec.integrator.rel_tol);
        take_double(bag, "integrator.abs_tol", spec.integrator.abs_tol);
        take_double(bag, "integrator.max_step", spec.integrator.max_step);
        take_double(bag, "integrator.node_eps", spec.integrator.node_eps);
        take_size(bag, "output.n_trajectory_dump", spec.n_trajectory_dump);
    }

    if (windowed) {
        const bool any = bag.has("windows.w1_lo") || bag.has("windows.w1_width") ||
                         bag.has("windows.w2_lo") || bag.has("windows.w2_width");
        if (any) {
            spec.has_windows = true;
            spec.w1.lo = parse_double("windows.w1_lo", bag.require("windows.w1_lo"));
            spec.w1.width = parse_double("windows.w1_width", bag.require("windows.w1_width"));
            spec.w2.lo = parse_double("windows.w2_lo", bag.require("windows.w2_lo"));
            spec.w2.width = parse_double("windows.w2_width", bag.require("windows.w2_width"));
        }
    }

    if (spec.name == ExperimentName::ergodicity_toy) {
        take_size(bag, "ergodicity.n_systems", spec.toy.n_systems);
        take_size(bag, "ergodicity.n_modes", spec.toy.n_modes);
        take_double(bag, "ergodicity.min_gap", spec.toy.min_gap);
        take_u64(bag, "ergodicity.seed", spec.toy.seed);
    }

    if (const std::string* v = bag.find("output.dir"))
        spec.output_dir = *v;

    bag.finish();
    spec.validate();
    return spec;
}

ExperimentSpec load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

} // namespace pilotwave

#pragma once

#include <stdexcept>
#include <string>

namespace pilotwave {

/// Configuration-space density dropped below the node threshold; the caller
/// must shrink the step or abort the trajectory.
class node_proximity_error : public std::runtime_error {
public:
    explicit node_proximity_error(const std::string& what) : std::runtime_error(what) {}
};

/// Adaptive quadrature exhausted its refinement depth before reaching tolerance.
class quadrature_error : public std::runtime_error {
public:
    explicit quadrature_error(const std::string& what) : std::runtime_error(what) {}
};

/// Rejection-sampling target exceeded its analytic envelope. This indicates a
/// wavefunction bug, not bad luck; the run aborts.
class envelope_violation_error : public std::logic_error {
public:
    explicit envelope_violation_error(const std::string& what) : std::logic_error(what) {}
};

/// Node-abort fraction of an evolved ensemble reached the failure threshold.
class abort_fraction_error : public std::runtime_error {
public:
    explicit abort_fraction_error(const std::string& what) : std::runtime_error(what) {}
};

/// Config parsing: key that the schema requires is absent.
class missing_key_error : public std::runtime_error {
public:
    explicit missing_key_error(const std::string& key)
        : std::runtime_error("missing required key: " + key), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Config parsing: key present but its value violates an invariant.
class bad_value_error : public std::runtime_error {
public:
    bad_value_error(const std::string& key, const std::string& why)
        : std::runtime_error("bad value for " + key + ": " + why), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Config parsing: key that the schema does not know (or does not accept for
/// the requested experiment).
class unknown_key_error : public std::runtime_error {
public:
    explicit unknown_key_error(const std::string& key)
        : std::runtime_error("unknown key: " + key), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

} // namespace pilotwave

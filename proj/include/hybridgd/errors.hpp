#pragma once

#include <stdexcept>
#include <string>

namespace hybridgd {

// Base for everything thrown by this library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid or inconsistent configuration: bad spectra, timer windows,
// partition sizes, unparsable experiment files.
class config_error : public error {
public:
    explicit config_error(const std::string& what) : error(what) {}
};

// Timer window violates the certified bound tau_max < beta^2/(3 K^3).
class bound_violation_error : public config_error {
public:
    explicit bound_violation_error(const std::string& what) : config_error(what) {}
};

// Vector/matrix dimensions do not match the objective.
class dimension_error : public error {
public:
    explicit dimension_error(const std::string& what) : error(what) {}
};

// NaN/Inf in a state, or a linear solve that lost too much accuracy.
class numerical_error : public error {
public:
    explicit numerical_error(const std::string& what) : error(what) {}
};

// Attempt to flow past the jump set (requested duration exceeds tau).
class flow_past_jump_error : public error {
public:
    explicit flow_past_jump_error(const std::string& what) : error(what) {}
};

// Jump requested while tau != 0.
class not_in_jump_set_error : public error {
public:
    explicit not_in_jump_set_error(const std::string& what) : error(what) {}
};

// A trajectory check was requested whose hypothesis the trajectory does not
// satisfy (e.g. an equal-initialization lemma on an unequal-init run).
// Distinct from a check failure.
class hypothesis_error : public config_error {
public:
    explicit hypothesis_error(const std::string& what) : config_error(what) {}
};

// Not enough usable samples for a diagnostic fit.
class insufficient_data_error : public error {
public:
    explicit insufficient_data_error(const std::string& what) : error(what) {}
};

} // namespace hybridgd

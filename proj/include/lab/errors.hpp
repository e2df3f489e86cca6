#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lab {

class LabError : public std::runtime_error {
public:
    explicit LabError(const std::string& msg) : std::runtime_error(msg) {}
};

// Text did not conform to the polynomial grammar. `position` is the byte
// offset of the offending token in the input string.
class ParseError : public LabError {
public:
    ParseError(const std::string& msg, std::size_t position)
        : LabError(msg + " (at position " + std::to_string(position) + ")"),
          position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

class DimensionMismatch : public LabError {
public:
    explicit DimensionMismatch(const std::string& msg) : LabError(msg) {}
};

// Point handed to surface_point() has too large a residual |F|.
class NotOnSurface : public LabError {
public:
    explicit NotOnSurface(const std::string& msg) : LabError(msg) {}
};

// |grad F| vanished on the zero level, contradicting the regularity
// assumption on the family.
class SingularGradient : public LabError {
public:
    explicit SingularGradient(const std::string& msg) : LabError(msg) {}
};

class EmptyLevelInBall : public LabError {
public:
    explicit EmptyLevelInBall(const std::string& msg) : LabError(msg) {}
};

// The sphere-tangent component of the transport field vanished.
class DegenerateSphericalComponent : public LabError {
public:
    explicit DegenerateSphericalComponent(const std::string& msg) : LabError(msg) {}
};

// Tangent root / degenerate section; the caller should redraw the hyperplane.
class RootIsolationFailure : public LabError {
public:
    explicit RootIsolationFailure(const std::string& msg) : LabError(msg) {}
};

class ConfigError : public LabError {
public:
    explicit ConfigError(const std::string& msg) : LabError(msg) {}
};

}  // namespace lab

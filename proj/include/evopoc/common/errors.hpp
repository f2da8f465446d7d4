#pragma once

#include <stdexcept>
#include <string>

namespace evopoc {

/// A reasoning backend could not deliver a usable answer.
class OracleFailure : public std::runtime_error {
public:
    enum class Cause { Exhausted, Mismatch, Timeout, Transport, Schema };
    OracleFailure(Cause cause, const std::string& what) : std::runtime_error(what), cause_(cause) {}
    Cause cause() const { return cause_; }

private:
    Cause cause_;
};

const char* to_string(OracleFailure::Cause c);

}  // namespace evopoc

#include "evopoc/common/errors.hpp"

namespace evopoc {

const char* to_string(OracleFailure::Cause c) {
    switch (c) {
        case OracleFailure::Cause::Exhausted: return "exhausted";
        case OracleFailure::Cause::Mismatch: return "mismatch";
        case OracleFailure::Cause::Timeout: return "timeout";
        case OracleFailure::Cause::Transport: return "transport";
        case OracleFailure::Cause::Schema: return "schema";
    }
    return "?";
}

}  // namespace evopoc

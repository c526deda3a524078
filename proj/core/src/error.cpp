#include "ghostsim/error.hpp"

#include <cstdio>

#include "ghostsim/types.hpp"

namespace ghostsim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownParent: return "UnknownParent";
    case ErrorCode::kDuplicateBlockId: return "DuplicateBlockId";
    case ErrorCode::kNonIncreasingSlot: return "NonIncreasingSlot";
    case ErrorCode::kUnknownBlock: return "UnknownBlock";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kNotAdversarial: return "NotAdversarial";
    case ErrorCode::kNotProposer: return "NotProposer";
    case ErrorCode::kNotCommitteeMember: return "NotCommitteeMember";
    case ErrorCode::kPoolTooSmall: return "PoolTooSmall";
    case ErrorCode::kSetupImpossible: return "SetupImpossible";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kTickOutOfRange: return "TickOutOfRange";
  }
  return "Unknown";
}

std::string to_string(BlockId id) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(id.value));
  return buf;
}

}  // namespace ghostsim

#include "guifusion/error.hpp"

namespace guifusion {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownReference: return "UnknownReference";
    case ErrorCode::CapabilityMismatch: return "CapabilityMismatch";
    case ErrorCode::UnknownComponent: return "UnknownComponent";
    case ErrorCode::HistoryHitsCrash: return "HistoryHitsCrash";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::UnknownToken: return "UnknownToken";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptySteps: return "EmptySteps";
    case ErrorCode::UnresolvedComponent: return "UnresolvedComponent";
    case ErrorCode::AppMismatch: return "AppMismatch";
    case ErrorCode::EmptyOwnershipMap: return "EmptyOwnershipMap";
    case ErrorCode::UnknownApp: return "UnknownApp";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::UnknownReport: return "UnknownReport";
    case ErrorCode::UnknownScreenshot: return "UnknownScreenshot";
    case ErrorCode::SessionClosed: return "SessionClosed";
    case ErrorCode::InvalidStep: return "InvalidStep";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace guifusion

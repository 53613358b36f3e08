#pragma once

#include <stdexcept>
#include <string>

namespace hgcr {

enum class ErrorCode {
  // kgraph
  DuplicateDocument,
  FrozenGraph,
  NotFrozen,
  UnknownConcept,
  NoSuchEdge,
  // pathgen
  NoFutureEvidence,
  DirectEdgePresent,
  Disconnected,
  EndpointMismatch,
  EmptyPool,
  CannotDiffer,
  // embed
  DimMismatch,
  DuplicateId,
  ParseError,
  ZeroVector,
  UnknownId,
  // ranker
  ShapeMismatch,
  EmptyNegatives,
  EmptyDataset,
  // ireval
  DegenerateLabels,
  NoPositives,
  AllDegenerate,
  // expl
  NoContext,
  ClientTimeout,
  ClientError,
  OracleFailure,
  ExhaustedCandidates,
  // io / cli
  IoError,
  ConfigError,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateDocument: return "DuplicateDocument";
    case ErrorCode::FrozenGraph: return "FrozenGraph";
    case ErrorCode::NotFrozen: return "NotFrozen";
    case ErrorCode::UnknownConcept: return "UnknownConcept";
    case ErrorCode::NoSuchEdge: return "NoSuchEdge";
    case ErrorCode::NoFutureEvidence: return "NoFutureEvidence";
    case ErrorCode::DirectEdgePresent: return "DirectEdgePresent";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::EndpointMismatch: return "EndpointMismatch";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::CannotDiffer: return "CannotDiffer";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyNegatives: return "EmptyNegatives";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::NoPositives: return "NoPositives";
    case ErrorCode::AllDegenerate: return "AllDegenerate";
    case ErrorCode::NoContext: return "NoContext";
    case ErrorCode::ClientTimeout: return "ClientTimeout";
    case ErrorCode::ClientError: return "ClientError";
    case ErrorCode::OracleFailure: return "OracleFailure";
    case ErrorCode::ExhaustedCandidates: return "ExhaustedCandidates";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace hgcr

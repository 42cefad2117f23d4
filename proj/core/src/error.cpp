#include "scatterkit/error.hpp"

namespace spk {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::usage: return "usage";
    case Errc::io: return "io";
    case Errc::format: return "format";
    case Errc::truncation: return "truncation";
    case Errc::shape: return "shape";
    case Errc::invalid_spec: return "invalid-spec";
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::invalid_offset: return "invalid-offset";
    case Errc::invalid_point: return "invalid-point";
    case Errc::unsupported_kind: return "unsupported-kind";
    case Errc::solver_failure: return "solver";
    case Errc::convergence: return "convergence";
    case Errc::divergence: return "divergence";
    case Errc::undefined_metric: return "undefined-metric";
    case Errc::empty_input: return "empty-input";
    case Errc::degenerate_input: return "degenerate-input";
    case Errc::consistency: return "consistency";
  }
  return "unknown";
}

int errc_exit_code(Errc c) {
  switch (c) {
    case Errc::usage:
      return 1;
    case Errc::io:
    case Errc::format:
    case Errc::truncation:
    case Errc::shape:
    case Errc::invalid_spec:
    case Errc::invalid_argument:
    case Errc::invalid_offset:
    case Errc::invalid_point:
    case Errc::unsupported_kind:
    case Errc::empty_input:
    case Errc::degenerate_input:
    case Errc::consistency:
      return 2;
    case Errc::solver_failure:
    case Errc::convergence:
    case Errc::divergence:
    case Errc::undefined_metric:
      return 3;
  }
  return 2;
}

}  // namespace spk

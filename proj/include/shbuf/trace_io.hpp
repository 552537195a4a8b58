#pragma once

// Text formats for arrival traces and per-packet outcomes.
//
// Arrival trace:
//   # spec: <free-form provenance>     (optional comment lines)
//   slot,port
//   0,3
//   0,1
//   2,0
// Lines are sorted by slot; within a slot, line order is processing order.

#include <iosfwd>
#include <string>

#include "shbuf/core.hpp"

namespace shbuf {

void write_trace(std::ostream& out, const ArrivalSequence& sequence,
                 const std::string& spec_comment = {});
// Throws ValidationError on malformed input, including rows that carry a
// packet size other than 1.
ArrivalSequence read_trace(std::istream& in);

// CSV columns packet_slot,packet_pos,port,verdict
void write_outcomes(std::ostream& out, const RunResult& result);

std::string read_file(const std::string& path);
// Writes atomically via a temporary sibling file.
void write_file(const std::string& path, const std::string& contents);

}  // namespace shbuf
